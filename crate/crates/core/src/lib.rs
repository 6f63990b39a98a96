//! Numerical toolkit for information-spectrum large-deviation rate functions.
//!
//! The crate estimates the lower/upper rate functions of a general real-valued
//! source {Z_n} from shrinking-interval probabilities, computes full, truncated
//! and tail cumulant generating functions, and relates the two through
//! Fenchel-Legendre conjugation and closed convex hulls. The [`verify`] module
//! evaluates both sides of the large-deviation inequalities at finite scale and
//! reports the margins.
//!
//! Grid-point loops run on rayon when the `parallel` feature is enabled (the
//! default). Every result is independent of the thread count.

pub mod conjugate;
pub mod cumulant;
mod error;
pub mod exec;
pub mod ext;
pub mod grid;
pub mod interval;
pub mod sources;
pub mod special;
pub mod spectrum;
mod table;
pub mod verify;

pub use conjugate::{biconjugate, is_closed_convex, legendre_conjugate, SampledFunction};
pub use cumulant::{cgf_curves, rate_from_cgf, tail_cgf, truncated_cgf, CgfCurves, TruncationWindow};

pub use error::{Error, Result};
pub use exec::Execution;
pub use ext::ExtReal;
pub use grid::UniformGrid;
pub use interval::Interval;
pub use sources::{Gaussian, SourceCapabilities, SourceSpec};
pub use spectrum::{estimate_hi, estimate_rate_curve, NSchedule, RateCurve, ShrinkSchedule};
pub use verify::{GammaSet, Tolerance, Verdict, VerificationReport, Verifier};
