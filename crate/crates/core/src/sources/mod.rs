//! Catalog of general sources `{Z_n}`.
//!
//! Every bundled source has a closed-form law for each `n`, which drives the
//! exact interval probabilities and cumulant generating functions used by
//! the estimators. Samplers exist for Monte-Carlo cross-checks, and the
//! analytic rate functions serve as test oracles.

mod law;
mod sampler;

use serde::{Deserialize, Serialize};

pub use law::{Atom, Law, NormalComponent};
pub use sampler::{mix64, task_seed};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ext::ExtReal;
use crate::interval::Interval;

/// Parameters of an i.i.d. normal sequence `X_i ~ N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mu: f64,
    pub sigma: f64,
}

impl Gaussian {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let g = Gaussian { mu, sigma };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidSource(format!(
                "gaussian component needs finite mu and sigma > 0, got mu = {}, sigma = {}",
                self.mu, self.sigma
            )));
        }
        Ok(())
    }

    /// Cramér rate `(R - mu)^2 / (2 sigma^2)` of the arithmetic mean.
    pub fn rate(&self, r: f64) -> f64 {
        let d = r - self.mu;
        d * d / (2.0 * self.sigma * self.sigma)
    }

    /// Cumulant generating function `mu theta + sigma^2 theta^2 / 2`.
    pub fn cgf(&self, theta: f64) -> f64 {
        self.mu * theta + 0.5 * self.sigma * self.sigma * theta * theta
    }

    fn mean_law(&self, weight: f64, n: u64) -> NormalComponent {
        NormalComponent { weight, mean: self.mu, sd: self.sigma / (n as f64).sqrt() }
    }
}

/// Declarative description of a general source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `Z_n` is the mean of `n` i.i.d. normals.
    GaussianIid(Gaussian),
    /// With probability `weights[k]` the whole sequence follows `components[k]`.
    Mixed { components: [Gaussian; 2], weights: [f64; 2] },
    /// Odd `n` follow `odd`, even `n` follow `even`.
    Interleaved { odd: Gaussian, even: Gaussian },
    /// `P(Z_n = n) = P(Z_n = -n) = 1/2`.
    DivergentPm,
}

/// What a source can provide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCapabilities {
    pub has_exact_law: bool,
    pub has_exact_cgf: bool,
    pub has_sampler: bool,
    pub has_analytic_rate: bool,
}

impl SourceSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Ok(SourceSpec::GaussianIid(Gaussian::new(mu, sigma)?))
    }

    pub fn mixed(first: Gaussian, second: Gaussian, weights: [f64; 2]) -> Result<Self> {
        let s = SourceSpec::Mixed { components: [first, second], weights };
        s.validate()?;
        Ok(s)
    }

    pub fn interleaved(odd: Gaussian, even: Gaussian) -> Result<Self> {
        let s = SourceSpec::Interleaved { odd, even };
        s.validate()?;
        Ok(s)
    }

    pub fn divergent() -> Self {
        SourceSpec::DivergentPm
    }

    /// The four bundled sources with the parameters used throughout the docs:
    /// `N(0,1)`, the equal mixture of `N(-1,1)` and `N(1,1)`, the same pair
    /// interleaved by parity, and the divergent two-atom source.
    pub fn bundled() -> Vec<SourceSpec> {
        let a = Gaussian { mu: -1.0, sigma: 1.0 };
        let b = Gaussian { mu: 1.0, sigma: 1.0 };
        vec![
            SourceSpec::GaussianIid(Gaussian { mu: 0.0, sigma: 1.0 }),
            SourceSpec::Mixed { components: [a, b], weights: [0.5, 0.5] },
            SourceSpec::Interleaved { odd: a, even: b },
            SourceSpec::DivergentPm,
        ]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: SourceSpec = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("source specs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::GaussianIid(g) => g.validate(),
            SourceSpec::Mixed { components, weights } => {
                components.iter().try_for_each(Gaussian::validate)?;
                let [a1, a2] = *weights;
                if !(a1 > 0.0 && a2 > 0.0) || ((a1 + a2) - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSource(format!(
                        "mixture weights must be positive and sum to 1, got [{a1}, {a2}]"
                    )));
                }
                Ok(())
            }
            SourceSpec::Interleaved { odd, even } => {
                odd.validate()?;
                even.validate()
            }
            SourceSpec::DivergentPm => Ok(()),
        }
    }

    /// Short identifier, also used for output directory names.
    pub fn slug(&self) -> &'static str {
        match self {
            SourceSpec::GaussianIid(_) => "gaussian_iid",
            SourceSpec::Mixed { .. } => "mixed",
            SourceSpec::Interleaved { .. } => "interleaved",
            SourceSpec::DivergentPm => "divergent_pm",
        }
    }

    pub fn capabilities(&self) -> SourceCapabilities {
        SourceCapabilities { has_exact_law: true, has_exact_cgf: true, has_sampler: true, has_analytic_rate: true }
    }

    pub fn is_gaussian_family(&self) -> bool {
        !matches!(self, SourceSpec::DivergentPm)
    }

    /// Exact law of `Z_n`.
    pub fn law(&self, n: u64) -> Result<Law> {
        check_n(n)?;
        Ok(match self {
            SourceSpec::GaussianIid(g) => Law::Normals(vec![g.mean_law(1.0, n)]),
            SourceSpec::Mixed { components, weights } => {
                Law::Normals(vec![components[0].mean_law(weights[0], n), components[1].mean_law(weights[1], n)])
            }
            SourceSpec::Interleaved { odd, even } => {
                let g = if n % 2 == 1 { odd } else { even };
                Law::Normals(vec![g.mean_law(1.0, n)])
            }
            SourceSpec::DivergentPm => {
                let x = n as f64;
                Law::Atoms(vec![Atom { weight: 0.5, at: -x }, Atom { weight: 0.5, at: x }])
            }
        })
    }

    /// `P(lo < Z_n < hi)`.
    pub fn exact_interval_prob(&self, n: u64, lo: f64, hi: f64) -> Result<f64> {
        let iv = open_interval(lo, hi)?;
        Ok(self.law(n)?.prob(&iv))
    }

    /// `ln P(lo < Z_n < hi)`, accurate far below the f64 underflow threshold.
    pub fn log_interval_prob(&self, n: u64, lo: f64, hi: f64) -> Result<ExtReal> {
        let iv = open_interval(lo, hi)?;
        Ok(self.law(n)?.log_prob(&[iv]))
    }

    /// `phi_n(theta) = (1/n) ln E exp(n theta Z_n)`.
    pub fn exact_cgf(&self, n: u64, theta: f64) -> Result<ExtReal> {
        let law = self.law(n)?;
        if !theta.is_finite() {
            return Err(Error::arg(format!("theta must be finite, got {theta}")));
        }
        if theta == 0.0 {
            // total mass is one
            return Ok(ExtReal::ZERO);
        }
        let nf = n as f64;
        Ok(law.log_tilted_mass(nf * theta, &[Interval::real_line()]).scale(1.0 / nf))
    }

    /// `count` independent draws of `Z_n`, a pure function of the arguments.
    pub fn sample(&self, n: u64, count: usize, seed: u64) -> Result<Vec<f64>> {
        self.sample_with(n, count, seed, Execution::default())
    }

    pub fn sample_with(&self, n: u64, count: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::arg("sample count must be positive"));
        }
        let law = self.law(n)?;
        Ok(sampler::draw(&law, count, seed, exec))
    }

    /// Closed-form lower and upper rate functions, for use as oracles.
    pub fn analytic_rate(&self) -> (RateOracle, RateOracle) {
        match self {
            SourceSpec::GaussianIid(g) => (RateOracle::MinOf(vec![*g]), RateOracle::MinOf(vec![*g])),
            SourceSpec::Mixed { components, .. } => {
                (RateOracle::MinOf(components.to_vec()), RateOracle::MinOf(components.to_vec()))
            }
            SourceSpec::Interleaved { odd, even } => {
                (RateOracle::MinOf(vec![*odd, *even]), RateOracle::MaxOf(vec![*odd, *even]))
            }
            SourceSpec::DivergentPm => (RateOracle::Infinite, RateOracle::Infinite),
        }
    }
}

/// Analytic rate function built from Gaussian Cramér rates.
#[derive(Debug, Clone, PartialEq)]
pub enum RateOracle {
    MinOf(Vec<Gaussian>),
    MaxOf(Vec<Gaussian>),
    Infinite,
}

impl RateOracle {
    pub fn eval(&self, r: f64) -> ExtReal {
        match self {
            RateOracle::MinOf(gs) => ExtReal::from(gs.iter().map(|g| g.rate(r)).fold(f64::INFINITY, f64::min)),
            RateOracle::MaxOf(gs) => ExtReal::from(gs.iter().map(|g| g.rate(r)).fold(f64::NEG_INFINITY, f64::max)),
            RateOracle::Infinite => ExtReal::PosInf,
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::arg("n must be a positive integer"))
    } else {
        Ok(())
    }
}

fn open_interval(lo: f64, hi: f64) -> Result<Interval> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Interval::open(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> SourceSpec {
        SourceSpec::mixed(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 1.0).unwrap(), [0.5, 0.5]).unwrap()
    }

    fn interleaved() -> SourceSpec {
        SourceSpec::interleaved(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn interval_probability_examples() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        let p = g.exact_interval_prob(100, 0.1, 0.2).unwrap();
        assert!((p - 0.135_905_121_983_278).abs() < 1e-12);
        assert_eq!(SourceSpec::divergent().exact_interval_prob(5, -1.0, 1.0).unwrap(), 0.0);
        assert!((mixed().exact_interval_prob(1, -50.0, 50.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.exact_interval_prob(4, 0.0, 1e6).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_probability_errors() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        assert!(matches!(g.exact_interval_prob(3, 1.0, 1.0), Err(Error::InvalidInterval { .. })));
        assert!(matches!(g.exact_interval_prob(0, 0.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mixture_probability_is_the_weighted_sum() {
        let s =
            SourceSpec::mixed(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 2.0).unwrap(), [0.3, 0.7]).unwrap();
        let p1 = SourceSpec::gaussian(-1.0, 1.0).unwrap().exact_interval_prob(9, -0.4, 0.9).unwrap();
        let p2 = SourceSpec::gaussian(1.0, 2.0).unwrap().exact_interval_prob(9, -0.4, 0.9).unwrap();
        assert_eq!(s.exact_interval_prob(9, -0.4, 0.9).unwrap(), 0.3 * p1 + 0.7 * p2);
    }

    #[test]
    fn cgf_examples() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        assert!((g.exact_cgf(7, 1.0).unwrap().to_f64() - 0.5).abs() < 1e-14);
        assert_eq!(SourceSpec::gaussian(2.0, 3.0).unwrap().exact_cgf(11, 0.0).unwrap(), ExtReal::ZERO);
        let large = mixed().exact_cgf(10_000, 1.0).unwrap().to_f64();
        assert!((large - 1.5).abs() < 1e-4, "{large}");
        let il = interleaved();
        assert!((il.exact_cgf(11, 1.0).unwrap().to_f64() + 0.5).abs() < 1e-14);
        assert!((il.exact_cgf(12, 1.0).unwrap().to_f64() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn divergent_cgf_is_overflow_safe() {
        let v = SourceSpec::divergent().exact_cgf(10_000, 2.0).unwrap().to_f64();
        // (1/n) ln(cosh(theta n^2)) = theta n - ln 2 / n + O(exp(-2 theta n^2))
        assert!((v - (2.0 * 1e4 - 2f64.ln() / 1e4)).abs() < 1e-9);
        assert!(SourceSpec::divergent().exact_cgf(3, -1.0).unwrap().is_finite());
    }

    #[test]
    fn samples_are_deterministic_and_supported() {
        let d = SourceSpec::divergent().sample(3, 100, 1).unwrap();
        assert!(d.iter().all(|&x| x == 3.0 || x == -3.0));
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.sample(10, 1000, 9).unwrap(), g.sample(10, 1000, 9).unwrap());
        assert_ne!(g.sample(10, 1000, 9).unwrap(), g.sample(10, 1000, 10).unwrap());
        let seq = g.sample_with(10, 20_000, 5, Execution::Sequential).unwrap();
        let par = g.sample_with(10, 20_000, 5, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(g.sample(10, 0, 1).is_err());
    }

    #[test]
    fn sample_mean_obeys_clt_bound() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        let n = 10_000u64;
        let count = 100_000usize;
        let xs = g.sample(n, count, 42).unwrap();
        let mean = xs.iter().sum::<f64>() / count as f64;
        let bound = 4.0 * (1.0 / (n as f64).sqrt()) / (count as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean} vs bound {bound}");
    }

    #[test]
    fn analytic_rate_examples() {
        let (lo, hi) = SourceSpec::gaussian(0.0, 1.0).unwrap().analytic_rate();
        assert_eq!(lo.eval(0.5), ExtReal::Finite(0.125));
        assert_eq!(hi.eval(0.5), ExtReal::Finite(0.125));
        let (lo, hi) = mixed().analytic_rate();
        assert_eq!((lo.eval(0.0), hi.eval(0.0)), (ExtReal::Finite(0.5), ExtReal::Finite(0.5)));
        let (lo, hi) = interleaved().analytic_rate();
        assert_eq!((lo.eval(0.0), hi.eval(0.0)), (ExtReal::Finite(0.5), ExtReal::Finite(0.5)));
        assert_eq!((lo.eval(1.0), hi.eval(1.0)), (ExtReal::Finite(0.0), ExtReal::Finite(2.0)));
        let (lo, hi) = SourceSpec::divergent().analytic_rate();
        assert!(lo.eval(-7.0).is_pos_inf() && hi.eval(3.0).is_pos_inf());
    }

    #[test]
    fn json_schema() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.to_json(), r#"{"kind":"gaussian_iid","mu":0.0,"sigma":1.0}"#);
        assert_eq!(SourceSpec::divergent().to_json(), r#"{"kind":"divergent_pm"}"#);
        let m = SourceSpec::from_json(
            r#"{"kind":"mixed","components":[{"mu":-1,"sigma":1},{"mu":1,"sigma":1}],"weights":[0.5,0.5]}"#,
        )
        .unwrap();
        assert_eq!(m, mixed());
        let i = SourceSpec::from_json(r#"{"kind":"interleaved","odd":{"mu":-1,"sigma":1},"even":{"mu":1,"sigma":1}}"#)
            .unwrap();
        assert_eq!(i, interleaved());
        for s in SourceSpec::bundled() {
            assert_eq!(SourceSpec::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(SourceSpec::gaussian(0.0, 0.0).is_err());
        assert!(SourceSpec::from_json(r#"{"kind":"gaussian_iid","mu":0,"sigma":-1}"#).is_err());
        let g = Gaussian::new(0.0, 1.0).unwrap();
        assert!(SourceSpec::mixed(g, g, [0.5, 0.6]).is_err());
        assert!(SourceSpec::mixed(g, g, [0.0, 1.0]).is_err());
    }
}
