//! Finite-scale estimators of the lower and upper information-spectrum rate
//! functions, and the tightness and convergence diagnostics that decide which
//! sandwich bounds apply.

mod diagnostics;
mod estimate;
mod schedule;

pub use diagnostics::{
    c_tightness_diagnostic, c_tightness_with, classify_tightness, e_tightness_diagnostic, e_tightness_with_floor,
    sigma_convergence_diagnostic, CTightnessReport, ETightnessReport, SigmaReport, SigmaVerdict, SigmaViolation,
    Subsequence, TightnessVerdict, DEFAULT_FLOOR, STALL_TOL,
};
pub use estimate::{
    estimate_hi, estimate_hi_width, estimate_rate_curve, estimate_rate_curve_with, Backend, HiEstimate,
    PointDiagnostics, RateCurve, CENSOR_COUNT, CSV_HEADER, MIN_MC_COUNT,
};
pub use schedule::{Extrapolation, NSchedule, ShrinkSchedule, Surrogates, DEFAULT_WINDOW};
