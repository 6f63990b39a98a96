use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::schedule::{Extrapolation, NSchedule, ShrinkSchedule, Surrogates};
use crate::conjugate::SampledFunction;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ext::ExtReal;
use crate::grid::UniformGrid;
use crate::sources::SourceSpec;
use crate::table;

/// How `P(Z_n in (R - w, R + w))` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Exact,
    /// Empirical frequencies from `count >= 1e6` draws per `n`. Counts below
    /// [`CENSOR_COUNT`] are censored: only a lower bound on the rate is kept.
    MonteCarlo { count: usize, seed: u64 },
}

pub const MIN_MC_COUNT: usize = 1_000_000;
pub const CENSOR_COUNT: usize = 30;

/// The liminf/limsup surrogates of `f_n(R) = -(1/n) ln P(Z_n in (R-w, R+w))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiEstimate {
    pub lower: ExtReal,
    pub upper: ExtReal,
    /// Movement of each surrogate when the tail window is shifted one entry
    /// earlier (plus Wilson half-widths under Monte Carlo).
    pub spread_lower: f64,
    pub spread_upper: f64,
    /// Every probability along the window was zero.
    pub all_zero: bool,
    /// Some value is only a lower bound (Monte-Carlo resolution limit).
    pub censored: bool,
}

#[derive(Debug, Clone, Copy)]
struct RateSample {
    value: ExtReal,
    censored: bool,
    /// Half-width of the Wilson interval in rate units.
    uncertainty: f64,
}

/// Probability oracle for `Z_n`, exact or empirical.
enum Model<'a> {
    Exact(&'a SourceSpec),
    Empirical { draws: Vec<(u64, Vec<f64>)> },
}

impl<'a> Model<'a> {
    fn build(source: &'a SourceSpec, ns: &[u64], backend: Backend, exec: Execution) -> Result<Self> {
        match backend {
            Backend::Exact => Ok(Model::Exact(source)),
            Backend::MonteCarlo { count, seed } => {
                if count < MIN_MC_COUNT {
                    return Err(Error::arg(format!("Monte-Carlo fallback needs count >= {MIN_MC_COUNT}, got {count}")));
                }
                let draws = ns
                    .iter()
                    .map(|&n| {
                        let mut xs = source.sample_with(n, count, crate::sources::task_seed(seed, n), exec)?;
                        xs.sort_by(f64::total_cmp);
                        Ok((n, xs))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Empirical { draws })
            }
        }
    }

    fn rate(&self, n: u64, lo: f64, hi: f64) -> Result<RateSample> {
        let nf = n as f64;
        match self {
            Model::Exact(source) => {
                let lp = source.log_interval_prob(n, lo, hi)?;
                Ok(RateSample { value: (-lp).scale(1.0 / nf), censored: false, uncertainty: 0.0 })
            }
            Model::Empirical { draws } => {
                let xs =
                    &draws.iter().find(|(m, _)| *m == n).ok_or_else(|| Error::arg(format!("no draws for n = {n}")))?.1;
                let a = xs.partition_point(|&x| x <= lo);
                let b = xs.partition_point(|&x| x < hi);
                let k = b.saturating_sub(a);
                let count = xs.len() as f64;
                if k < CENSOR_COUNT {
                    let bound = -(CENSOR_COUNT as f64 / count).ln() / nf;
                    return Ok(RateSample { value: ExtReal::from(bound), censored: true, uncertainty: 0.0 });
                }
                let (p_lo, p_hi) = wilson(k as f64, count, 3.0);
                let p = k as f64 / count;
                let value = -p.ln() / nf;
                let uncertainty = (-p_lo.ln() / nf - value).max(value + p_hi.ln() / nf);
                Ok(RateSample { value: ExtReal::from(value), censored: false, uncertainty })
            }
        }
    }
}

/// Wilson score interval for `k` successes out of `count` at `z` sigmas.
fn wilson(k: f64, count: f64, z: f64) -> (f64, f64) {
    let p = k / count;
    let z2 = z * z;
    let denom = 1.0 + z2 / count;
    let centre = (p + z2 / (2.0 * count)) / denom;
    let half = z * (p * (1.0 - p) / count + z2 / (4.0 * count * count)).sqrt() / denom;
    ((centre - half).max(f64::MIN_POSITIVE), (centre + half).min(1.0))
}

fn estimate_with_model(model: &Model<'_>, r: f64, half_width: f64, n: &NSchedule) -> Result<HiEstimate> {
    let samples =
        n.needed().iter().map(|&m| model.rate(m, r - half_width, r + half_width)).collect::<Result<Vec<_>>>()?;
    let values: Vec<ExtReal> = samples.iter().map(|s| s.value).collect();
    let sur = Surrogates::of(&values, n.window);
    let tail = &samples[samples.len() - n.window..];
    let noise = tail.iter().map(|s| s.uncertainty).fold(0.0, f64::max);
    Ok(HiEstimate {
        lower: sur.lower,
        upper: sur.upper,
        spread_lower: sur.spread_lower + noise,
        spread_upper: sur.spread_upper + noise,
        all_zero: tail.iter().all(|s| s.value.is_pos_inf()),
        censored: tail.iter().any(|s| s.censored),
    })
}

/// Finite-`n` surrogates of the level-`i` rate functions at `R`, for the
/// interval half-width `2^-i`.
pub fn estimate_hi(source: &SourceSpec, r: f64, i: u32, n: &NSchedule) -> Result<HiEstimate> {
    estimate_hi_width(source, r, 2f64.powi(-(i as i32)), n, Backend::Exact)
}

/// [`estimate_hi`] for an arbitrary half-width and probability backend.
pub fn estimate_hi_width(
    source: &SourceSpec,
    r: f64,
    half_width: f64,
    n: &NSchedule,
    backend: Backend,
) -> Result<HiEstimate> {
    n.validate()?;
    if half_width.is_nan() || half_width <= 0.0 || !r.is_finite() {
        return Err(Error::arg("R must be finite and the half-width positive"));
    }
    let model = Model::build(source, n.needed(), backend, Execution::default())?;
    estimate_with_model(&model, r, half_width, n)
}

/// Per-point record of the shrinking-interval sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub lower_by_i: Vec<ExtReal>,
    pub upper_by_i: Vec<ExtReal>,
    /// A surrogate decreased in `i` by more than its spread, which exact
    /// probabilities cannot produce: estimation noise.
    pub monotonicity_violation: bool,
    pub all_zero: bool,
    pub censored: bool,
    pub n_range: (u64, u64),
}

/// Estimates of the lower/upper rate functions on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub grid: UniformGrid,
    pub lower: Vec<ExtReal>,
    pub upper: Vec<ExtReal>,
    pub spread_lower: Vec<f64>,
    pub spread_upper: Vec<f64>,
    pub i_max: u32,
    pub n_max: u64,
    /// Empty for curves read back from CSV.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<PointDiagnostics>,
}

pub const CSV_HEADER: [&str; 7] = ["R", "H_lower", "H_upper", "spread_lower", "spread_upper", "i_max", "n_max"];

impl RateCurve {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower_function(&self) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.lower.clone() }
    }

    pub fn upper_function(&self) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.upper.clone() }
    }

    pub fn max_spread(&self) -> f64 {
        self.spread_lower.iter().chain(&self.spread_upper).copied().fold(0.0, f64::max)
    }

    /// Curve with both sides replaced by one function, for checks that
    /// assume the limit exists.
    pub fn with_common(&self, values: Vec<ExtReal>) -> RateCurve {
        RateCurve { lower: values.clone(), upper: values, ..self.clone() }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.len()).map(|j| {
            vec![
                self.grid.point(j).to_string(),
                self.lower[j].to_string(),
                self.upper[j].to_string(),
                ExtReal::from(self.spread_lower[j]).to_string(),
                ExtReal::from(self.spread_upper[j]).to_string(),
                self.i_max.to_string(),
                self.n_max.to_string(),
            ]
        });
        table::write_rows(out, &CSV_HEADER, rows)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = table::read_rows(input, &CSV_HEADER)?;
        let mut xs = Vec::new();
        let mut curve = RateCurve {
            grid: UniformGrid { lo: 0.0, hi: 0.0, step: 1.0 },
            lower: Vec::new(),
            upper: Vec::new(),
            spread_lower: Vec::new(),
            spread_upper: Vec::new(),
            i_max: 0,
            n_max: 0,
            diagnostics: Vec::new(),
        };
        for rec in &rows {
            xs.push(table::real(rec, 0)?);
            curve.lower.push(table::ext(rec, 1)?);
            curve.upper.push(table::ext(rec, 2)?);
            curve.spread_lower.push(table::ext(rec, 3)?.to_f64());
            curve.spread_upper.push(table::ext(rec, 4)?.to_f64());
            curve.i_max = table::int(rec, 5)? as u32;
            curve.n_max = table::int(rec, 6)?;
        }
        curve.grid = UniformGrid::from_points(&xs)?;
        Ok(curve)
    }
}

/// Rate curve over `grid` with exact probabilities on the default executor.
pub fn estimate_rate_curve(source: &SourceSpec, grid: &UniformGrid, schedule: &ShrinkSchedule) -> Result<RateCurve> {
    estimate_rate_curve_with(source, grid, schedule, Backend::Exact, Execution::default())
}

pub fn estimate_rate_curve_with(
    source: &SourceSpec,
    grid: &UniformGrid,
    schedule: &ShrinkSchedule,
    backend: Backend,
    exec: Execution,
) -> Result<RateCurve> {
    grid.validate()?;
    schedule.validate()?;
    source.validate()?;
    let n = &schedule.n;
    let model = Model::build(source, n.needed(), backend, exec)?;
    let window = n.tail();
    let n_range = (window[0], n.n_max());

    let points = exec.map(grid.len(), |j| -> Result<(HiEstimate, PointDiagnostics, ExtReal, ExtReal)> {
        let r = grid.point(j);
        let per_i = schedule
            .levels()
            .map(|i| estimate_with_model(&model, r, schedule.half_width(i), n))
            .collect::<Result<Vec<_>>>()?;
        let lower_by_i: Vec<ExtReal> = per_i.iter().map(|e| e.lower).collect();
        let upper_by_i: Vec<ExtReal> = per_i.iter().map(|e| e.upper).collect();
        let last = *per_i.last().expect("at least one level");
        let decreasing =
            |seq: &[ExtReal], tol: f64| seq.windows(2).any(|w| w[1] < w[0] && w[0].distance(w[1]) > ExtReal::from(tol));
        let tol = last.spread_lower.max(last.spread_upper) + 1e-9;
        let diag = PointDiagnostics {
            monotonicity_violation: decreasing(&lower_by_i, tol) || decreasing(&upper_by_i, tol),
            all_zero: last.all_zero,
            censored: per_i.iter().any(|e| e.censored),
            n_range,
            lower_by_i,
            upper_by_i,
        };
        let lo = extrapolate(&diag.lower_by_i, schedule);
        let hi = extrapolate(&diag.upper_by_i, schedule);
        Ok((last, diag, lo, hi))
    });

    let mut curve = RateCurve {
        grid: *grid,
        lower: Vec::with_capacity(grid.len()),
        upper: Vec::with_capacity(grid.len()),
        spread_lower: Vec::with_capacity(grid.len()),
        spread_upper: Vec::with_capacity(grid.len()),
        i_max: schedule.i_max,
        n_max: n.n_max(),
        diagnostics: Vec::with_capacity(grid.len()),
    };
    for p in points {
        let (est, diag, lo, hi) = p?;
        curve.lower.push(lo);
        curve.upper.push(hi);
        curve.spread_lower.push(est.spread_lower);
        curve.spread_upper.push(est.spread_upper);
        curve.diagnostics.push(diag);
    }
    Ok(curve)
}

/// The `i -> infinity` reading of a level sequence that is increasing in `i`.
fn extrapolate(by_i: &[ExtReal], schedule: &ShrinkSchedule) -> ExtReal {
    let last = *by_i.last().expect("at least one level");
    match (schedule.extrapolation, by_i.len()) {
        (Extrapolation::None, _) | (_, 1) => last,
        (Extrapolation::Richardson, len) => match (by_i[len - 2], last) {
            (ExtReal::Finite(prev), ExtReal::Finite(cur)) if cur >= prev => {
                let r = schedule.ratio;
                ExtReal::Finite((r * cur - prev) / (r - 1.0))
            }
            _ => last,
        },
    }
}
