//! Normal distribution functions accurate deep into the tails.
//!
//! `erfc` comes from `libm` (a port of the FreeBSD/musl routine, error below
//! one ulp over its whole range). Beyond `x = 20`, where `erfc` heads to
//! underflow, the log tail is evaluated from the Laplace continued fraction of
//! the scaled function `exp(x^2) erfc(x)`, so log-probabilities stay finite and
//! accurate for events of probability `exp(-1e8)` and below.

use crate::ext::ExtReal;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const CF_SWITCH: f64 = 20.0;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln erfc(x)`.
pub fn log_erfc(x: f64) -> f64 {
    if x < CF_SWITCH {
        erfc(x).ln()
    } else {
        -x * x - LN_SQRT_PI - erfc_continued_fraction(x).ln()
    }
}

/// Denominator `f` of `erfc(x) = exp(-x^2) / (sqrt(pi) f)`, from
/// `f = x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))` by modified Lentz.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// Standard normal upper tail `Q(z) = P(N > z)`.
pub fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    upper_tail(-z)
}

/// `ln Q(z)`, finite for every finite `z`.
pub fn log_upper_tail(z: f64) -> ExtReal {
    if z == f64::INFINITY {
        ExtReal::NegInf
    } else if z == f64::NEG_INFINITY {
        ExtReal::ZERO
    } else if z < 0.0 {
        ExtReal::from((-upper_tail(-z)).ln_1p())
    } else {
        ExtReal::from(-std::f64::consts::LN_2 + log_erfc(z / SQRT_2))
    }
}

fn standardize(mean: f64, sd: f64, lo: f64, hi: f64) -> (f64, f64) {
    ((lo - mean) / sd, (hi - mean) / sd)
}

/// `P(lo < N(mean, sd^2) < hi)`; bounds may be infinite.
pub fn normal_interval_prob(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (za, zb) = standardize(mean, sd, lo, hi);
    if za >= 0.0 {
        (upper_tail(za) - upper_tail(zb)).max(0.0)
    } else if zb <= 0.0 {
        (upper_tail(-zb) - upper_tail(-za)).max(0.0)
    } else {
        (1.0 - upper_tail(zb) - upper_tail(-za)).max(0.0)
    }
}

/// `ln P(lo < N(mean, sd^2) < hi)` computed in log space throughout.
pub fn normal_log_interval_prob(mean: f64, sd: f64, lo: f64, hi: f64) -> ExtReal {
    if hi <= lo {
        return ExtReal::NegInf;
    }
    let (za, zb) = standardize(mean, sd, lo, hi);
    if za >= 0.0 {
        log_tail_difference(za, zb)
    } else if zb <= 0.0 {
        log_tail_difference(-zb, -za)
    } else {
        ExtReal::ln((1.0 - upper_tail(zb) - upper_tail(-za)).max(0.0))
    }
}

/// `ln(Q(a) - Q(b))` for `0 <= a < b`.
fn log_tail_difference(a: f64, b: f64) -> ExtReal {
    let la = log_upper_tail(a);
    let lb = log_upper_tail(b);
    match (la, lb) {
        (ExtReal::Finite(x), ExtReal::NegInf) => ExtReal::Finite(x),
        (ExtReal::Finite(x), ExtReal::Finite(y)) => {
            let d = y - x;
            if d >= 0.0 {
                ExtReal::NegInf
            } else {
                ExtReal::from(x + (-d.exp()).ln_1p())
            }
        }
        _ => ExtReal::NegInf,
    }
}
