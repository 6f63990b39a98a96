use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real interval with independent open/closed endpoint flags. Endpoints may
/// be infinite (an infinite endpoint is always treated as open).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        let iv = Interval { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() };
        if iv.is_empty() {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(iv)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x, true, true)
    }

    pub fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn interior(&self) -> Option<Interval> {
        (self.lo < self.hi).then_some(Interval { lo_closed: false, hi_closed: false, ..*self })
    }

    pub fn closure(&self) -> Interval {
        Interval { lo_closed: self.lo.is_finite(), hi_closed: self.hi.is_finite(), ..*self }
    }
}
