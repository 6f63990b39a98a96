use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `lo, lo + step, ...` up to and including `hi` (when `hi` lies
/// on the lattice up to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

const MAX_POINTS: usize = 50_000_000;

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = UniformGrid { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidGrid("bounds and step must be finite".into()));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {}", self.step)));
        }
        if self.hi < self.lo {
            return Err(Error::InvalidGrid(format!("hi = {} is below lo = {}", self.hi, self.lo)));
        }
        if (self.hi - self.lo) / self.step > MAX_POINTS as f64 {
            return Err(Error::InvalidGrid("too many grid points".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x - self.lo) / self.step).round();
        j.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Recovers a grid from explicit abscissae, checking uniform spacing.
    pub fn from_points(xs: &[f64]) -> Result<Self> {
        match xs {
            [] => Err(Error::InvalidGrid("no points".into())),
            [x] => UniformGrid::new(*x, *x, 1.0),
            _ => {
                let lo = xs[0];
                let hi = xs[xs.len() - 1];
                let step = (hi - lo) / (xs.len() - 1) as f64;
                let g = UniformGrid::new(lo, hi, step)?;
                let scale = lo.abs().max(hi.abs()).max(step);
                for (j, &x) in xs.iter().enumerate() {
                    if (g.point(j) - x).abs() > 1e-9 * scale {
                        return Err(Error::InvalidGrid(format!("point {j} ({x}) breaks uniform spacing")));
                    }
                }
                if g.len() != xs.len() {
                    return Err(Error::InvalidGrid("spacing does not reproduce the point count".into()));
                }
                Ok(g)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_include_both_ends() {
        let g = UniformGrid::new(-3.0, 3.0, 0.05).unwrap();
        assert_eq!(g.len(), 121);
        assert!((g.point(120) - 3.0).abs() < 1e-12);
        assert_eq!(g.nearest(0.0), 60);
    }

    #[test]
    fn zero_step_is_rejected() {
        let err = UniformGrid::new(0.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("invalid grid"));
        assert!(UniformGrid::new(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn round_trips_through_points() {
        let g = UniformGrid::new(-2.0, 2.0, 0.1).unwrap();
        let back = UniformGrid::from_points(&g.points()).unwrap();
        assert_eq!(back.len(), g.len());
        assert!((back.step - g.step).abs() < 1e-12);
    }
}
