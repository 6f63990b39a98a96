use std::fmt;

use serde::{Deserialize, Serialize};

use super::schedule::{NSchedule, ShrinkSchedule};
use crate::cumulant::tail_cgf;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ext::ExtReal;
use crate::grid::UniformGrid;
use crate::interval::Interval;
use crate::sources::SourceSpec;

pub const DEFAULT_FLOOR: f64 = -50.0;
/// Two consecutive surrogates closer than this count as a plateau.
pub const STALL_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TightnessVerdict {
    Consistent,
    NotTight,
    Inconclusive,
}

impl TightnessVerdict {
    /// `E-TIGHT-CONSISTENT`, `NOT-C-TIGHT`, ...
    pub fn label(self, kind: char) -> String {
        match self {
            TightnessVerdict::Consistent => format!("{kind}-TIGHT-CONSISTENT"),
            TightnessVerdict::NotTight => format!("NOT-{kind}-TIGHT"),
            TightnessVerdict::Inconclusive => "INCONCLUSIVE".to_string(),
        }
    }
}

/// Reads a sequence of limsup surrogates indexed by increasing `K`.
///
/// Reaching the floor is conclusive. Short of that, a strictly decreasing
/// tail whose decrements do not shrink is extrapolated to minus infinity,
/// while a final plateau or increase above the floor means no tightness.
pub fn classify_tightness(values: &[ExtReal], floor: f64) -> TightnessVerdict {
    let Some(&last) = values.last() else {
        return TightnessVerdict::Inconclusive;
    };
    if last <= ExtReal::from(floor) {
        return TightnessVerdict::Consistent;
    }
    if values.len() < 2 || last.is_pos_inf() {
        return if last.is_pos_inf() { TightnessVerdict::NotTight } else { TightnessVerdict::Inconclusive };
    }
    let len = values.len();
    let drop = |a: ExtReal, b: ExtReal| a.to_f64() - b.to_f64();
    let d_last = drop(values[len - 2], last);
    if d_last <= STALL_TOL {
        return TightnessVerdict::NotTight;
    }
    if len >= 3 {
        let d_prev = drop(values[len - 3], values[len - 2]);
        if d_prev > STALL_TOL && d_last >= d_prev {
            return TightnessVerdict::Consistent;
        }
    }
    TightnessVerdict::Inconclusive
}

fn check_k_schedule(k_schedule: &[f64]) -> Result<()> {
    if k_schedule.is_empty() || k_schedule.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::arg("K schedule must be nonempty, positive and finite"));
    }
    if k_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("K schedule must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ETightnessReport {
    pub k_schedule: Vec<f64>,
    /// Limsup surrogate of `(1/n) ln P(|Z_n| > K)` for each `K`.
    pub slopes: Vec<ExtReal>,
    pub spreads: Vec<f64>,
    pub floor: f64,
    pub verdict: TightnessVerdict,
}

impl ETightnessReport {
    pub fn label(&self) -> String {
        self.verdict.label('E')
    }
}

pub fn e_tightness_diagnostic(source: &SourceSpec, k_schedule: &[f64], n: &NSchedule) -> Result<ETightnessReport> {
    e_tightness_with_floor(source, k_schedule, n, DEFAULT_FLOOR)
}

pub fn e_tightness_with_floor(
    source: &SourceSpec,
    k_schedule: &[f64],
    n: &NSchedule,
    floor: f64,
) -> Result<ETightnessReport> {
    check_k_schedule(k_schedule)?;
    n.validate()?;
    let mut slopes = Vec::with_capacity(k_schedule.len());
    let mut spreads = Vec::with_capacity(k_schedule.len());
    for &k in k_schedule {
        let s = n.surrogates(|m| tail_cgf(source, k, 0.0, m))?;
        slopes.push(s.upper);
        spreads.push(s.spread_upper);
    }
    let verdict = classify_tightness(&slopes, floor);
    Ok(ETightnessReport { k_schedule: k_schedule.to_vec(), slopes, spreads, floor, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CTightnessReport {
    pub theta_grid: UniformGrid,
    pub k_schedule: Vec<f64>,
    /// `tail[j][k]`: limsup surrogate of the tail cumulant function at
    /// `theta_grid.point(j)` and `k_schedule[k]`.
    pub tail: Vec<Vec<ExtReal>>,
    pub per_theta: Vec<TightnessVerdict>,
    pub floor: f64,
    /// Smallest scheduled `K` whose tail cumulant function is below the floor
    /// at every theta.
    pub k0: Option<f64>,
    pub verdict: TightnessVerdict,
}

impl CTightnessReport {
    pub fn label(&self) -> String {
        self.verdict.label('C')
    }
}

pub fn c_tightness_diagnostic(
    source: &SourceSpec,
    theta_grid: &UniformGrid,
    k_schedule: &[f64],
    n: &NSchedule,
) -> Result<CTightnessReport> {
    c_tightness_with(source, theta_grid, k_schedule, n, DEFAULT_FLOOR, Execution::default())
}

pub fn c_tightness_with(
    source: &SourceSpec,
    theta_grid: &UniformGrid,
    k_schedule: &[f64],
    n: &NSchedule,
    floor: f64,
    exec: Execution,
) -> Result<CTightnessReport> {
    check_k_schedule(k_schedule)?;
    theta_grid.validate()?;
    n.validate()?;
    let tail = exec
        .map(theta_grid.len(), |j| {
            let theta = theta_grid.point(j);
            k_schedule
                .iter()
                .map(|&k| Ok(n.surrogates(|m| tail_cgf(source, k, theta, m))?.upper))
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_theta: Vec<TightnessVerdict> = tail.iter().map(|row| classify_tightness(row, floor)).collect();
    let verdict = if per_theta.contains(&TightnessVerdict::NotTight) {
        TightnessVerdict::NotTight
    } else if per_theta.iter().all(|v| *v == TightnessVerdict::Consistent) {
        TightnessVerdict::Consistent
    } else {
        TightnessVerdict::Inconclusive
    };
    let floor_x = ExtReal::from(floor);
    let k0 = (0..k_schedule.len()).find(|&k| tail.iter().all(|row| row[k] <= floor_x)).map(|k| k_schedule[k]);
    Ok(CTightnessReport {
        theta_grid: *theta_grid,
        k_schedule: k_schedule.to_vec(),
        tail,
        per_theta,
        floor,
        k0,
        verdict,
    })
}

/// Candidate subsequences of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsequence {
    Full,
    Odd,
    Even,
}

impl Subsequence {
    pub const ALL: [Subsequence; 3] = [Subsequence::Full, Subsequence::Odd, Subsequence::Even];

    pub fn contains(self, n: u64) -> bool {
        match self {
            Subsequence::Full => true,
            Subsequence::Odd => n % 2 == 1,
            Subsequence::Even => n.is_multiple_of(2),
        }
    }
}

impl fmt::Display for Subsequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subsequence::Full => "full schedule",
            Subsequence::Odd => "odd n",
            Subsequence::Even => "even n",
        })
    }
}

/// Where a candidate subsequence first fell short of the limsup surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaViolation {
    pub candidate: Subsequence,
    pub r: f64,
    pub n: u64,
    #[serde(with = "crate::ext::as_string")]
    pub deficit: ExtReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaVerdict {
    /// No violation found; not a proof.
    HeuristicPass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub domain: (f64, f64),
    pub gamma: f64,
    pub i: u32,
    pub verdict: SigmaVerdict,
    pub witness: Option<Subsequence>,
    /// First violation of every rejected candidate.
    pub violations: Vec<SigmaViolation>,
}

impl SigmaReport {
    pub fn passed(&self) -> bool {
        self.verdict == SigmaVerdict::HeuristicPass
    }
}

/// Searches for one subsequence along which `f_n(R) >= limsup f_n(R) - gamma`
/// at every grid point of `domain`, with `f_n` built on the half-width of
/// level `i_max`. Every candidate needs at least one entry in the tail window.
pub fn sigma_convergence_diagnostic(
    source: &SourceSpec,
    domain: &Interval,
    gamma: f64,
    schedule: &ShrinkSchedule,
    step: f64,
) -> Result<SigmaReport> {
    schedule.validate()?;
    if !(domain.lo.is_finite() && domain.hi.is_finite()) {
        return Err(Error::arg("the domain must be bounded"));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::arg(format!("gamma must be positive, got {gamma}")));
    }
    let grid = if domain.is_degenerate() {
        UniformGrid { lo: domain.lo, hi: domain.lo, step: 1.0 }
    } else {
        UniformGrid::new(domain.lo, domain.hi, step)?
    };
    let i = schedule.i_max;
    let w = schedule.half_width(i);
    let tail = schedule.n.tail();
    let rows = Execution::default()
        .map(grid.len(), |j| {
            let r = grid.point(j);
            tail.iter()
                .map(|&n| Ok((-source.log_interval_prob(n, r - w, r + w)?).scale(1.0 / n as f64)))
                .collect::<Result<Vec<ExtReal>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let slack = ExtReal::from(-gamma);
    let mut violations = Vec::new();
    let mut witness = None;
    for cand in Subsequence::ALL {
        if !tail.iter().any(|&n| cand.contains(n)) {
            continue;
        }
        let first = rows.iter().enumerate().find_map(|(j, fs)| {
            let limsup = fs.iter().copied().fold(ExtReal::NegInf, ExtReal::max);
            let target = limsup + slack;
            tail.iter().zip(fs).filter(|(&n, _)| cand.contains(n)).find_map(|(&n, &f)| {
                let margin = target.slack_le(f);
                (margin < ExtReal::ZERO).then(|| SigmaViolation {
                    candidate: cand,
                    r: grid.point(j),
                    n,
                    deficit: -margin,
                })
            })
        });
        match first {
            Some(v) => violations.push(v),
            None => {
                witness = Some(cand);
                break;
            }
        }
    }
    let verdict = if witness.is_some() { SigmaVerdict::HeuristicPass } else { SigmaVerdict::Fail };
    Ok(SigmaReport { domain: (domain.lo, domain.hi), gamma, i, verdict, witness, violations })
}
