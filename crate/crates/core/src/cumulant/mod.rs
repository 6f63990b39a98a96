//! Full-line, truncated and tail cumulant generating functions of `Z_n`,
//! their liminf/limsup surrogates, and the rate functions obtained from them
//! by Legendre conjugation.
//!
//! Every integral is evaluated through the exponential tilt identity of the
//! exact law (see [`crate::sources::Law::log_tilted_mass`]), which stays
//! accurate where `exp(n theta z)` spans thousands of orders of magnitude.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::conjugate::{legendre_conjugate, Conjugate, SampledFunction};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ext::ExtReal;
use crate::grid::UniformGrid;
use crate::interval::Interval;
use crate::sources::SourceSpec;
use crate::spectrum::NSchedule;
use crate::table;

/// Integration region for the cumulant functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationWindow {
    /// The whole real line.
    Full,
    /// The closed interval `[m1, m2]`.
    Interval { m1: f64, m2: f64 },
    /// The closed interval `[-k, k]`.
    Symmetric { k: f64 },
}

impl TruncationWindow {
    pub fn interval(m1: f64, m2: f64) -> Result<Self> {
        let w = TruncationWindow::Interval { m1, m2 };
        w.validate()?;
        Ok(w)
    }

    pub fn symmetric(k: f64) -> Result<Self> {
        let w = TruncationWindow::Symmetric { k };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TruncationWindow::Full => Ok(()),
            TruncationWindow::Interval { m1, m2 } if m1.is_finite() && m2.is_finite() && m1 < m2 => Ok(()),
            TruncationWindow::Interval { m1, m2 } => Err(Error::InvalidInterval { lo: m1, hi: m2 }),
            TruncationWindow::Symmetric { k } if k.is_finite() && k > 0.0 => Ok(()),
            TruncationWindow::Symmetric { k } => Err(Error::arg(format!("K must be positive and finite, got {k}"))),
        }
    }

    pub fn region(&self) -> Interval {
        match *self {
            TruncationWindow::Full => Interval::real_line(),
            TruncationWindow::Interval { m1, m2 } => Interval { lo: m1, hi: m2, lo_closed: true, hi_closed: true },
            TruncationWindow::Symmetric { k } => Interval { lo: -k, hi: k, lo_closed: true, hi_closed: true },
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("theta must be finite, got {theta}")))
    }
}

fn scaled_log_mass(source: &SourceSpec, region: &[Interval], theta: f64, n: u64) -> Result<ExtReal> {
    check_theta(theta)?;
    let law = source.law(n)?;
    let nf = n as f64;
    Ok(law.log_tilted_mass(nf * theta, region).scale(1.0 / nf))
}

/// `(1/n) ln of the integral over M of exp(n theta z) P_{Z_n}(dz)`; `-inf`
/// when the window carries no mass.
pub fn truncated_cgf(source: &SourceSpec, window: TruncationWindow, theta: f64, n: u64) -> Result<ExtReal> {
    window.validate()?;
    if window == TruncationWindow::Full {
        return source.exact_cgf(n, theta);
    }
    scaled_log_mass(source, &[window.region()], theta, n)
}

/// The same integral over the tail `|z| > k`.
pub fn tail_cgf(source: &SourceSpec, k: f64, theta: f64, n: u64) -> Result<ExtReal> {
    TruncationWindow::symmetric(k)?;
    let tails = [Interval::open(f64::NEG_INFINITY, -k)?, Interval::open(k, f64::INFINITY)?];
    scaled_log_mass(source, &tails, theta, n)
}

/// Liminf/limsup surrogates of the cumulant function on a theta grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgfCurves {
    pub theta_grid: UniformGrid,
    pub lower: Vec<ExtReal>,
    pub upper: Vec<ExtReal>,
    /// Larger of the two tail-window spreads at each theta.
    pub spread: Vec<f64>,
    pub window: TruncationWindow,
    pub n_schedule: NSchedule,
}

pub const CSV_HEADER: [&str; 4] = ["theta", "phi_lower", "phi_upper", "spread"];

impl CgfCurves {
    pub fn lower_function(&self) -> SampledFunction {
        SampledFunction { grid: self.theta_grid, values: self.lower.clone() }
    }

    pub fn upper_function(&self) -> SampledFunction {
        SampledFunction { grid: self.theta_grid, values: self.upper.clone() }
    }

    pub fn max_spread(&self) -> f64 {
        self.spread.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.lower.len()).map(|j| {
            vec![
                self.theta_grid.point(j).to_string(),
                self.lower[j].to_string(),
                self.upper[j].to_string(),
                ExtReal::from(self.spread[j]).to_string(),
            ]
        });
        table::write_rows(out, &CSV_HEADER, rows)
    }

    /// Reads curves written by [`CgfCurves::write_csv`]; the window and
    /// schedule are not part of the table and must be supplied.
    pub fn read_csv<R: Read>(input: R, window: TruncationWindow, n_schedule: NSchedule) -> Result<Self> {
        let rows = table::read_rows(input, &CSV_HEADER)?;
        let mut thetas = Vec::with_capacity(rows.len());
        let (mut lower, mut upper, mut spread) = (Vec::new(), Vec::new(), Vec::new());
        for rec in &rows {
            thetas.push(table::real(rec, 0)?);
            lower.push(table::ext(rec, 1)?);
            upper.push(table::ext(rec, 2)?);
            spread.push(table::ext(rec, 3)?.to_f64());
        }
        Ok(CgfCurves { theta_grid: UniformGrid::from_points(&thetas)?, lower, upper, spread, window, n_schedule })
    }
}

pub fn cgf_curves(
    source: &SourceSpec,
    window: TruncationWindow,
    theta_grid: &UniformGrid,
    n_schedule: &NSchedule,
) -> Result<CgfCurves> {
    cgf_curves_with(source, window, theta_grid, n_schedule, Execution::default())
}

pub fn cgf_curves_with(
    source: &SourceSpec,
    window: TruncationWindow,
    theta_grid: &UniformGrid,
    n_schedule: &NSchedule,
    exec: Execution,
) -> Result<CgfCurves> {
    window.validate()?;
    theta_grid.validate()?;
    n_schedule.validate()?;
    source.validate()?;
    let points = exec.map(theta_grid.len(), |j| {
        let theta = theta_grid.point(j);
        n_schedule.surrogates(|n| truncated_cgf(source, window, theta, n))
    });
    let mut curves = CgfCurves {
        theta_grid: *theta_grid,
        lower: Vec::with_capacity(points.len()),
        upper: Vec::with_capacity(points.len()),
        spread: Vec::with_capacity(points.len()),
        window,
        n_schedule: n_schedule.clone(),
    };
    for p in points {
        let s = p?;
        curves.lower.push(s.lower);
        curves.upper.push(s.upper);
        curves.spread.push(s.spread());
    }
    Ok(curves)
}

/// Rate functions of Cramér-Gärtner-Ellis type: the lower one conjugates the
/// limsup cumulant function, the upper one the liminf.
#[derive(Debug, Clone, PartialEq)]
pub struct CgeRates {
    pub lower: Conjugate,
    pub upper: Conjugate,
}

pub const CGE_CSV_HEADER: [&str; 3] = ["R", "I_lower", "I_upper"];

impl CgeRates {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let (lo, hi) = (&self.lower.function, &self.upper.function);
        let rows = (0..lo.len())
            .map(|j| vec![lo.grid.point(j).to_string(), lo.values[j].to_string(), hi.values[j].to_string()]);
        table::write_rows(out, &CGE_CSV_HEADER, rows)
    }

    /// Reads the lower and upper rate functions back from
    /// [`CgeRates::write_csv`] output.
    pub fn read_csv<R: Read>(input: R) -> Result<(SampledFunction, SampledFunction)> {
        let rows = table::read_rows(input, &CGE_CSV_HEADER)?;
        let mut rs = Vec::with_capacity(rows.len());
        let (mut lower, mut upper) = (Vec::new(), Vec::new());
        for rec in &rows {
            rs.push(table::real(rec, 0)?);
            lower.push(table::ext(rec, 1)?);
            upper.push(table::ext(rec, 2)?);
        }
        let grid = UniformGrid::from_points(&rs)?;
        Ok((SampledFunction::new(grid, lower)?, SampledFunction::new(grid, upper)?))
    }
}

pub fn rate_from_cgf(curves: &CgfCurves, r_grid: &UniformGrid) -> Result<CgeRates> {
    let finite = curves.lower.iter().chain(&curves.upper).filter(|v| v.is_finite()).count();
    if finite < 4 {
        return Err(Error::arg("cumulant curves must be finite on a nondegenerate theta range"));
    }
    Ok(CgeRates {
        lower: legendre_conjugate(&curves.upper_function(), r_grid)?,
        upper: legendre_conjugate(&curves.lower_function(), r_grid)?,
    })
}
