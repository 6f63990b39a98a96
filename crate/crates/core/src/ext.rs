//! Extended real numbers with convex-analysis arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value on the extended real line `[-inf, +inf]`.
///
/// Addition uses the inf-addition convention: `x + (+inf) = +inf` for every
/// `x`, including `x = -inf`. Infinities are explicit variants and never
/// travel as large floats. `Finite` never holds NaN or an infinite float when
/// built through [`ExtReal::from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        self == ExtReal::PosInf
    }

    pub fn is_neg_inf(self) -> bool {
        self == ExtReal::NegInf
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy view as `f64`, with infinities mapped to the float infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Natural log of a nonnegative probability-like quantity; `ln(0) = -inf`.
    pub fn ln(p: f64) -> ExtReal {
        debug_assert!(p >= 0.0, "ln of negative value {p}");
        if p <= 0.0 {
            ExtReal::NegInf
        } else {
            ExtReal::from(p.ln())
        }
    }

    /// Multiplication by a finite real, with `0 * (+-inf) = 0`.
    pub fn scale(self, c: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::from(v * c),
            _ if c == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf if c > 0.0 => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::NegInf if c > 0.0 => ExtReal::NegInf,
            ExtReal::NegInf => ExtReal::PosInf,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `|a - b|`, taking equal infinities to be at distance zero.
    pub fn distance(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from((a - b).abs()),
            (a, b) if a == b => ExtReal::ZERO,
            _ => ExtReal::PosInf,
        }
    }

    /// Signed slack of the relation `self <= other`: nonnegative iff it holds.
    /// Equal infinities have slack zero.
    pub fn slack_le(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from(b - a),
            (a, b) if a == b => ExtReal::ZERO,
            (_, ExtReal::PosInf) | (ExtReal::NegInf, _) => ExtReal::PosInf,
            _ => ExtReal::NegInf,
        }
    }

    /// `log(sum(exp(x)))` with the max-shift guard. Empty input gives `-inf`.
    pub fn log_sum_exp<I: IntoIterator<Item = ExtReal>>(terms: I) -> ExtReal {
        let terms: Vec<ExtReal> = terms.into_iter().collect();
        let top = terms.iter().copied().fold(ExtReal::NegInf, ExtReal::max);
        match top {
            ExtReal::Finite(m) => {
                let sum: f64 = terms.iter().filter_map(|t| t.finite()).map(|v| (v - m).exp()).sum();
                ExtReal::from(m + sum.ln())
            }
            other => other,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v.is_nan() {
            panic!("NaN cannot be represented as an extended real");
        } else if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(x: &ExtReal) -> u8 {
            match x {
                ExtReal::NegInf => 0,
                ExtReal::Finite(_) => 1,
                ExtReal::PosInf => 2,
            }
        }
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from(a + b),
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::from(rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;

    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseExtRealError(pub String);

impl fmt::Display for ParseExtRealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse {:?} as an extended real", self.0)
    }
}

impl std::error::Error for ParseExtRealError {}

impl FromStr for ExtReal {
    type Err = ParseExtRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtReal::PosInf),
            "-inf" => Ok(ExtReal::NegInf),
            t => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(ExtReal::Finite(v)),
                _ => Err(ParseExtRealError(s.to_string())),
            },
        }
    }
}

/// Finite values serialize as JSON numbers, infinities as `"inf"` / `"-inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::PosInf => serializer.serialize_str("inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                if v.is_nan() {
                    Err(E::custom("NaN is not an extended real"))
                } else {
                    Ok(ExtReal::from(v))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExtVisitor)
    }
}

/// Serde adapter writing every value as a string (`"-0.5"`, `"inf"`).
pub mod as_string {
    use super::ExtReal;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &ExtReal, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn convex_analysis_addition() {
        let x = ExtReal::Finite(3.0);
        assert_eq!(x + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::NegInf + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(x + ExtReal::NegInf, ExtReal::NegInf);
        assert_eq!(-ExtReal::PosInf, ExtReal::NegInf);
        assert_eq!(ExtReal::PosInf.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::PosInf.scale(-2.0), ExtReal::NegInf);
    }

    #[test]
    fn ln_of_zero_is_explicit_neg_inf() {
        assert_eq!(ExtReal::ln(0.0), ExtReal::NegInf);
        assert_eq!(ExtReal::ln(1.0), ExtReal::ZERO);
    }

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        let mut v = vec![ExtReal::PosInf, ExtReal::Finite(-1e300), ExtReal::NegInf, ExtReal::Finite(2.0)];
        v.sort();
        assert_eq!(v, vec![ExtReal::NegInf, ExtReal::Finite(-1e300), ExtReal::Finite(2.0), ExtReal::PosInf]);
    }

    #[test]
    fn log_sum_exp_does_not_overflow() {
        let v = ExtReal::log_sum_exp([ExtReal::Finite(1e4), ExtReal::Finite(1e4)]);
        assert!((v.to_f64() - (1e4 + 2f64.ln())).abs() < 1e-9);
        assert_eq!(ExtReal::log_sum_exp([]), ExtReal::NegInf);
        assert_eq!(ExtReal::log_sum_exp([ExtReal::NegInf, ExtReal::Finite(0.0)]), ExtReal::ZERO);
        assert_eq!(ExtReal::log_sum_exp([ExtReal::PosInf, ExtReal::Finite(0.0)]), ExtReal::PosInf);
    }

    #[test]
    fn slack_handles_infinities() {
        assert_eq!(ExtReal::NegInf.slack_le(ExtReal::NegInf), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO.slack_le(ExtReal::NegInf), ExtReal::NegInf);
        assert_eq!(ExtReal::NegInf.slack_le(ExtReal::ZERO), ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(1.0).slack_le(ExtReal::Finite(0.5)), ExtReal::Finite(-0.5));
    }

    #[test]
    fn json_uses_inf_strings() {
        let v = vec![ExtReal::Finite(0.25), ExtReal::PosInf, ExtReal::NegInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.25,"inf","-inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #[test]
        fn display_parse_is_lossless(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let e = ExtReal::from(x);
            let back: ExtReal = e.to_string().parse().unwrap();
            prop_assert_eq!(back.to_f64().to_bits(), x.to_bits());
        }
    }
}
