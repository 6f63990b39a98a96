use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// Strictly increasing block lengths `n` plus the tail-window width used for
/// the liminf/limsup surrogates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NSchedule {
    #[serde(rename = "n_schedule")]
    pub values: Vec<u64>,
    #[serde(default = "default_window")]
    pub window: usize,
}

pub const DEFAULT_WINDOW: usize = 5;

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl NSchedule {
    pub fn new(values: Vec<u64>, window: usize) -> Result<Self> {
        let s = NSchedule { values, window };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSchedule("n schedule is empty".into()));
        }
        if self.values[0] == 0 {
            return Err(Error::InvalidSchedule("n values must be positive".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule("n schedule must be strictly increasing".into()));
        }
        if self.window == 0 || self.window > self.values.len() {
            return Err(Error::InvalidSchedule(format!(
                "window {} must lie in 1..={}",
                self.window,
                self.values.len()
            )));
        }
        Ok(())
    }

    /// Roughly geometric schedule from `n0` to `n_max` (inclusive, `len`
    /// entries) whose consecutive entries alternate in parity, so every tail
    /// window of two or more entries sees both even and odd `n`.
    pub fn geometric(n0: u64, n_max: u64, len: usize, window: usize) -> Result<Self> {
        if len < 2 || n0 < 2 || n_max <= n0 {
            return Err(Error::InvalidSchedule("geometric schedule needs 2 <= n0 < n_max and len >= 2".into()));
        }
        let ratio = (n_max as f64 / n0 as f64).powf(1.0 / (len - 1) as f64);
        let mut values: Vec<u64> = (0..len).map(|k| (n0 as f64 * ratio.powi(k as i32)).round() as u64).collect();
        values[len - 1] = n_max;
        for k in (0..len - 1).rev() {
            if values[k] >= values[k + 1] {
                values[k] = values[k + 1] - 1;
            }
            if values[k] % 2 == values[k + 1] % 2 {
                values[k] -= 1;
            }
        }
        NSchedule::new(values, window)
    }

    pub fn n_max(&self) -> u64 {
        *self.values.last().expect("validated schedules are nonempty")
    }

    /// The last `window` entries.
    pub fn tail(&self) -> &[u64] {
        &self.values[self.values.len() - self.window..]
    }

    /// The tail window shifted one entry earlier, when the schedule is long
    /// enough to have one.
    pub fn previous_tail(&self) -> Option<&[u64]> {
        let len = self.values.len();
        (len > self.window).then(|| &self.values[len - self.window - 1..len - 1])
    }

    /// Every entry multiplied by `factor`, then nudged so that (for even
    /// factors) parities still alternate.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        NSchedule::new(self.values.iter().enumerate().map(|(k, &n)| n * factor + (k as u64 % 2)).collect(), self.window)
    }
}

/// Tail-window minimum and maximum of a sequence indexed by the schedule,
/// with their movement when the window is shifted one entry earlier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surrogates {
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub spread_lower: f64,
    pub spread_upper: f64,
}

impl NSchedule {
    /// Entries needed by [`NSchedule::surrogates`].
    pub fn needed(&self) -> &[u64] {
        let extra = usize::from(self.previous_tail().is_some());
        &self.values[self.values.len() - self.window - extra..]
    }

    pub fn surrogates(&self, f: impl Fn(u64) -> Result<ExtReal>) -> Result<Surrogates> {
        let needed = self.needed();
        let values = needed.iter().map(|&n| f(n)).collect::<Result<Vec<_>>>()?;
        Ok(Surrogates::of(&values, self.window))
    }
}

impl Surrogates {
    /// `values` holds the tail window, optionally preceded by one extra entry.
    pub fn of(values: &[ExtReal], window: usize) -> Self {
        let len = values.len();
        let (lower, upper) = min_max(&values[len - window..]);
        if len > window {
            let (pl, pu) = min_max(&values[len - window - 1..len - 1]);
            Surrogates {
                lower,
                upper,
                spread_lower: lower.distance(pl).to_f64(),
                spread_upper: upper.distance(pu).to_f64(),
            }
        } else {
            Surrogates { lower, upper, spread_lower: 0.0, spread_upper: 0.0 }
        }
    }

    pub fn spread(&self) -> f64 {
        self.spread_lower.max(self.spread_upper)
    }
}

fn min_max(values: &[ExtReal]) -> (ExtReal, ExtReal) {
    values.iter().fold((ExtReal::PosInf, ExtReal::NegInf), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// How the `i -> infinity` limit is read off the finite `i` sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// The value at `i_max`.
    None,
    /// One Richardson step on the last two widths, cancelling the bias that
    /// is linear in the half-width.
    #[default]
    Richardson,
}

/// Shrinking-interval protocol: half-widths `ratio^-i` for
/// `i = i_min..=i_max`, evaluated along an [`NSchedule`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkSchedule {
    pub i_min: u32,
    pub i_max: u32,
    #[serde(flatten)]
    pub n: NSchedule,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub extrapolation: Extrapolation,
}

fn default_ratio() -> f64 {
    2.0
}

impl ShrinkSchedule {
    pub fn new(i_min: u32, i_max: u32, n: NSchedule) -> Result<Self> {
        let s = ShrinkSchedule { i_min, i_max, n, ratio: 2.0, extrapolation: Extrapolation::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn with_ratio(mut self, ratio: f64) -> Result<Self> {
        self.ratio = ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn with_extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = e;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.n.validate()?;
        if self.i_min < 1 || self.i_max < self.i_min {
            return Err(Error::InvalidSchedule(format!(
                "need 1 <= i_min <= i_max, got {}..{}",
                self.i_min, self.i_max
            )));
        }
        if !(self.ratio.is_finite() && self.ratio > 1.0) {
            return Err(Error::InvalidSchedule(format!("width ratio must exceed 1, got {}", self.ratio)));
        }
        let needed = 100.0 * self.ratio.powi(self.i_max as i32);
        if (self.n.n_max() as f64) < needed {
            return Err(Error::InvalidSchedule(format!(
                "n_max = {} is below 100 * ratio^i_max = {needed}",
                self.n.n_max()
            )));
        }
        Ok(())
    }

    pub fn half_width(&self, i: u32) -> f64 {
        self.ratio.powi(-(i as i32))
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> {
        self.i_min..=self.i_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule_alternates_parity() {
        let s = NSchedule::geometric(1000, 10_000, 12, 5).unwrap();
        assert_eq!(s.n_max(), 10_000);
        assert_eq!(s.values.len(), 12);
        assert!(s.values.windows(2).all(|w| w[0] < w[1] && w[0] % 2 != w[1] % 2));
        assert_eq!(s.tail().len(), 5);
        assert_eq!(s.previous_tail().unwrap()[4], s.values[10]);
    }

    #[test]
    fn coupling_rule_is_enforced() {
        let n = NSchedule::geometric(100, 3000, 6, 3).unwrap();
        assert!(ShrinkSchedule::new(1, 5, n.clone()).is_err());
        assert!(ShrinkSchedule::new(1, 4, n).is_ok());
    }

    #[test]
    fn invalid_schedules() {
        assert!(NSchedule::new(vec![], 1).is_err());
        assert!(NSchedule::new(vec![3, 3], 1).is_err());
        assert!(NSchedule::new(vec![1, 2], 3).is_err());
        let n = NSchedule::geometric(1000, 10_000, 8, 5).unwrap();
        assert!(ShrinkSchedule::new(0, 3, n.clone()).is_err());
        assert!(ShrinkSchedule::new(1, 3, n).unwrap().with_ratio(1.0).is_err());
    }

    #[test]
    fn scaled_schedule_stays_alternating() {
        let s = NSchedule::geometric(1000, 10_000, 8, 5).unwrap().scaled(2).unwrap();
        assert!(s.values.windows(2).all(|w| w[0] % 2 != w[1] % 2));
        assert!(s.n_max() >= 20_000);
    }

    #[test]
    fn json_layout_is_flat() {
        let s = ShrinkSchedule::new(1, 3, NSchedule::new(vec![800, 900, 1001], 2).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["n_schedule"][2], 1001);
        assert_eq!(v["extrapolation"], "richardson");
        let back: ShrinkSchedule = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
