//! Fenchel-Legendre conjugation of sampled extended-real functions.
//!
//! The fast path builds the lower convex hull of the finite samples once and
//! sweeps the sorted slope grid with a monotone pointer, giving
//! `O(|R| + |theta|)` work per call. The brute-force path evaluates every
//! `(theta, R)` pair and exists as an independent cross-check.

mod hull;
mod sampled;

pub use hull::lower_hull;
pub use sampled::SampledFunction;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::ext::ExtReal;
use crate::grid::UniformGrid;

/// Result of a conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub function: SampledFunction,
    /// The input was `+inf` everywhere, so the conjugate is `-inf` everywhere.
    pub degenerate: bool,
    /// Slopes for which the supremum over the sample grid is not attained at a
    /// grid boundary where the input is finite, i.e. where truncating the
    /// real line to the grid cannot bias the value. `None` when empty.
    pub trust_region: Option<(f64, f64)>,
}

impl Conjugate {
    pub fn values(&self) -> &[ExtReal] {
        &self.function.values
    }
}

enum Shape {
    /// Some sample is `-inf`.
    MinusInfinity,
    /// No finite sample.
    Empty,
    Hull(Vec<(f64, f64)>),
}

fn shape(f: &SampledFunction) -> Shape {
    if f.values.iter().any(|v| v.is_neg_inf()) {
        return Shape::MinusInfinity;
    }
    let finite: Vec<(f64, f64)> = f.finite_points().collect();
    if finite.is_empty() {
        Shape::Empty
    } else {
        Shape::Hull(lower_hull(&finite))
    }
}

/// `g(theta) = max_j (theta R_j - f(R_j))` on `theta_grid` via the hull sweep.
pub fn legendre_conjugate(f: &SampledFunction, theta_grid: &UniformGrid) -> Result<Conjugate> {
    theta_grid.validate()?;
    let thetas = theta_grid.points();
    let (values, degenerate, trust) = match shape(f) {
        Shape::MinusInfinity => (vec![ExtReal::PosInf; thetas.len()], false, None),
        Shape::Empty => (vec![ExtReal::NegInf; thetas.len()], true, None),
        Shape::Hull(vertices) => (sweep(&vertices, &thetas), false, trust_region(f, &vertices)),
    };
    Ok(Conjugate { function: SampledFunction::new(*theta_grid, values)?, degenerate, trust_region: trust })
}

/// Same contract as [`legendre_conjugate`], evaluated pair by pair.
pub fn legendre_conjugate_brute(f: &SampledFunction, theta_grid: &UniformGrid) -> Result<Conjugate> {
    legendre_conjugate_brute_with(f, theta_grid, Execution::default())
}

pub fn legendre_conjugate_brute_with(
    f: &SampledFunction,
    theta_grid: &UniformGrid,
    exec: Execution,
) -> Result<Conjugate> {
    theta_grid.validate()?;
    let xs = f.grid.points();
    let values = exec.map(theta_grid.len(), |t| {
        let theta = theta_grid.point(t);
        xs.iter().zip(&f.values).map(|(&x, &v)| ExtReal::from(theta * x) - v).fold(ExtReal::NegInf, ExtReal::max)
    });
    let (degenerate, trust) = match shape(f) {
        Shape::Hull(vertices) => (false, trust_region(f, &vertices)),
        Shape::Empty => (true, None),
        Shape::MinusInfinity => (false, None),
    };
    Ok(Conjugate { function: SampledFunction::new(*theta_grid, values)?, degenerate, trust_region: trust })
}

/// Conjugate of the point set given by hull vertices (sorted by abscissa), at
/// ascending slopes.
fn sweep(vertices: &[(f64, f64)], thetas: &[f64]) -> Vec<ExtReal> {
    debug_assert!(thetas.windows(2).all(|w| w[0] <= w[1]));
    let mut k = 0;
    thetas
        .iter()
        .map(|&theta| {
            let value = |k: usize| theta * vertices[k].0 - vertices[k].1;
            while k + 1 < vertices.len() && value(k + 1) >= value(k) {
                k += 1;
            }
            ExtReal::from(value(k))
        })
        .collect()
}

fn trust_region(f: &SampledFunction, vertices: &[(f64, f64)]) -> Option<(f64, f64)> {
    let first_finite = f.values.first().is_some_and(|v| v.is_finite());
    let last_finite = f.values.last().is_some_and(|v| v.is_finite());
    let edge_slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
    let m = vertices.len();
    let lo = match (first_finite, m) {
        (false, _) => f64::NEG_INFINITY,
        (true, 1) => f64::INFINITY,
        (true, _) => edge_slope(vertices[0], vertices[1]),
    };
    let hi = match (last_finite, m) {
        (false, _) => f64::INFINITY,
        (true, 1) => f64::NEG_INFINITY,
        (true, _) => edge_slope(vertices[m - 2], vertices[m - 1]),
    };
    (lo <= hi).then_some((lo, hi))
}

/// `(f*)*` on the grid of `f`: the numerical closed convex hull.
///
/// The conjugate of a finite point set is piecewise linear with breakpoints
/// at the hull edge slopes, so the outer supremum is evaluated exactly at
/// those slopes. Outside the hull's abscissa range the result is `+inf`.
pub fn biconjugate(f: &SampledFunction) -> Result<SampledFunction> {
    let xs = f.grid.points();
    let values = match shape(f) {
        Shape::MinusInfinity => vec![ExtReal::NegInf; xs.len()],
        Shape::Empty => vec![ExtReal::PosInf; xs.len()],
        Shape::Hull(vertices) => {
            let (first, last) = (vertices[0].0, vertices[vertices.len() - 1].0);
            // conjugate sampled at the edge slopes: (s_k, f*(s_k))
            let dual: Vec<(f64, f64)> = vertices
                .windows(2)
                .map(|w| {
                    let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    (s, s * w[0].0 - w[0].1)
                })
                .collect();
            let inner: Vec<f64> = xs.iter().copied().filter(|&x| x >= first && x <= last).collect();
            let mut inside = if dual.is_empty() {
                vec![ExtReal::from(vertices[0].1); inner.len()]
            } else {
                sweep(&lower_hull(&dual), &inner)
            }
            .into_iter();
            xs.iter().map(|&x| if x >= first && x <= last { inside.next().unwrap() } else { ExtReal::PosInf }).collect()
        }
    };
    SampledFunction::new(f.grid, values)
}

/// Outcome of [`is_closed_convex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCheck {
    pub closed_convex: bool,
    /// Largest finite gap `f - hull(f)`.
    pub max_gap: f64,
    /// First grid point (left to right) that breaks the tolerance.
    pub first_violation: Option<Violation>,
    /// Grid point of the largest gap (or of an infinity mismatch).
    pub worst: Option<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub x: f64,
    pub gap: ExtReal,
}

/// Default tolerance for [`is_closed_convex`]: ten grid steps.
pub fn default_convexity_tol(f: &SampledFunction) -> f64 {
    10.0 * f.grid.step
}

/// True iff `f` matches its closed convex hull within `tol` at every finite
/// point and the two agree on where they are infinite.
pub fn is_closed_convex(f: &SampledFunction, tol: f64) -> Result<ConvexityCheck> {
    let hull = biconjugate(f)?;
    let mut max_gap = 0.0f64;
    let mut first = None;
    let mut worst: Option<Violation> = None;
    for (j, (&v, &h)) in f.values.iter().zip(&hull.values).enumerate() {
        let gap = v.distance(h);
        let violation = Violation { index: j, x: f.grid.point(j), gap };
        if let ExtReal::Finite(g) = gap {
            max_gap = max_gap.max(g);
        }
        if gap > ExtReal::from(tol) && first.is_none() {
            first = Some(violation);
        }
        if worst.is_none_or(|w| gap > w.gap) {
            worst = Some(violation);
        }
    }
    let worst = worst.filter(|w| w.gap > ExtReal::ZERO);
    Ok(ConvexityCheck { closed_convex: first.is_none(), max_gap, first_violation: first, worst })
}
