use crate::ext::ExtReal;
use crate::interval::Interval;
use crate::special::{normal_interval_prob, normal_log_interval_prob};

/// One weighted normal component `w * N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A point mass `w * delta_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub at: f64,
}

/// The exact law of `Z_n` for a fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Normals(Vec<NormalComponent>),
    Atoms(Vec<Atom>),
}

impl Law {
    /// Probability of the interval, honouring endpoint flags for atoms.
    pub fn prob(&self, iv: &Interval) -> f64 {
        match self {
            Law::Normals(cs) => {
                cs.iter().fold(0.0, |acc, c| acc + c.weight * normal_interval_prob(c.mean, c.sd, iv.lo, iv.hi))
            }
            Law::Atoms(atoms) => atoms.iter().filter(|a| iv.contains(a.at)).map(|a| a.weight).sum(),
        }
    }

    /// `ln P(Z in union)` for a family of pairwise disjoint intervals.
    pub fn log_prob(&self, region: &[Interval]) -> ExtReal {
        self.log_tilted_mass(0.0, region)
    }

    /// `ln of the integral over the region of exp(s z) P(dz)` for a slope `s`
    /// (for the cumulant functions `s = n * theta`). The normal case uses the
    /// exponential tilt identity, so no quadrature is involved.
    pub fn log_tilted_mass(&self, s: f64, region: &[Interval]) -> ExtReal {
        match self {
            Law::Normals(cs) => ExtReal::log_sum_exp(cs.iter().flat_map(|c| {
                let var = c.sd * c.sd;
                let exponent = s * c.mean + 0.5 * s * s * var;
                let tilted_mean = c.mean + s * var;
                region.iter().map(move |iv| {
                    ExtReal::from(c.weight.ln() + exponent) + normal_log_interval_prob(tilted_mean, c.sd, iv.lo, iv.hi)
                })
            })),
            Law::Atoms(atoms) => ExtReal::log_sum_exp(
                atoms
                    .iter()
                    .filter(|a| region.iter().any(|iv| iv.contains(a.at)))
                    .map(|a| ExtReal::from(a.weight.ln() + s * a.at)),
            ),
        }
    }

    pub fn support_bounds(&self) -> (f64, f64) {
        match self {
            Law::Normals(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Law::Atoms(atoms) => {
                atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a.at), hi.max(a.at)))
            }
        }
    }
}
