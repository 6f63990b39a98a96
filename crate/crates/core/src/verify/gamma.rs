use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conjugate::SampledFunction;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::interval::Interval;

/// A finite union of real intervals, kept sorted and pairwise disjoint with
/// touching pieces merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaSet {
    intervals: Vec<Interval>,
}

/// Which variant of the set an infimum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Interior,
    Closure,
}

impl GammaSet {
    pub fn new(intervals: Vec<Interval>) -> Self {
        GammaSet { intervals: normalize(intervals) }
    }

    pub fn empty() -> Self {
        GammaSet::default()
    }

    pub fn interval(iv: Interval) -> Self {
        GammaSet::new(vec![iv])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn interior(&self) -> GammaSet {
        GammaSet::new(self.intervals.iter().filter_map(Interval::interior).collect())
    }

    pub fn closure(&self) -> GammaSet {
        GammaSet::new(self.intervals.iter().map(Interval::closure).collect())
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(|iv| iv.lo.is_finite() && iv.hi.is_finite())
    }

    pub fn is_closed(&self) -> bool {
        self.intervals.iter().all(|iv| iv.lo_closed && iv.hi_closed)
    }

    pub fn is_compact(&self) -> bool {
        self.is_bounded() && self.is_closed()
    }

    /// Smallest closed interval containing the set.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.lo, self.intervals.last()?.hi))
    }

    /// `count` random sets: one to three intervals with endpoints on
    /// `[lo, hi]` (two decimals) and random endpoint flags. Every fifth set
    /// consists of isolated points only, so its interior is empty.
    pub fn generate(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<GammaSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| (rng.random_range(lo..=hi) * 100.0).round() / 100.0;
        (0..count)
            .map(|k| {
                let pieces = rng.random_range(1..=3usize);
                if k % 5 == 4 {
                    let points = (0..pieces).map(|_| Interval::point(draw(&mut rng)).expect("finite point"));
                    return GammaSet::new(points.collect());
                }
                let mut ends: Vec<f64> = (0..2 * pieces).map(|_| draw(&mut rng)).collect();
                ends.sort_by(f64::total_cmp);
                let intervals = ends
                    .chunks(2)
                    .filter_map(|p| Interval::new(p[0], p[1], rng.random_bool(0.5), rng.random_bool(0.5)).ok())
                    .collect();
                GammaSet::new(intervals)
            })
            .collect()
    }
}

fn normalize(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|iv| !iv.is_empty());
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        if let Some(last) = out.last_mut() {
            let overlaps = iv.lo < last.hi || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
            if overlaps {
                if iv.lo == last.lo {
                    last.lo_closed |= iv.lo_closed;
                }
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                    last.hi_closed = iv.hi_closed;
                } else if iv.hi == last.hi {
                    last.hi_closed |= iv.hi_closed;
                }
                continue;
            }
        }
        out.push(iv);
    }
    out
}

/// A candidate minimiser: abscissa, value, and the grid samples it was read from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct InfPoint {
    pub x: f64,
    pub value: ExtReal,
    pub lo_index: usize,
    pub hi_index: usize,
}

/// Infimum of a sampled function over the interior or closure of `gamma`.
///
/// Interior mode only uses grid points strictly inside the set; closure mode
/// also interpolates at the closed endpoints. An empty intersection gives
/// `+inf`.
pub fn inf_over_set(f: &SampledFunction, gamma: &GammaSet, mode: Mode) -> ExtReal {
    inf_point(f, gamma, mode).map_or(ExtReal::PosInf, |p| p.value)
}

pub(crate) fn inf_point(f: &SampledFunction, gamma: &GammaSet, mode: Mode) -> Option<InfPoint> {
    let set = match mode {
        Mode::Interior => gamma.interior(),
        Mode::Closure => gamma.closure(),
    };
    let mut best: Option<InfPoint> = None;
    let mut offer = |p: InfPoint| {
        if best.is_none_or(|b| p.value < b.value) {
            best = Some(p);
        }
    };
    for (j, (x, v)) in f.points().enumerate() {
        if set.contains(x) {
            offer(InfPoint { x, value: v, lo_index: j, hi_index: j });
        }
    }
    if mode == Mode::Closure {
        let g = &f.grid;
        let last = g.point(f.len() - 1);
        for iv in set.intervals() {
            for x in [iv.lo, iv.hi] {
                if x.is_finite() && x >= g.lo && x <= last {
                    let t = ((x - g.lo) / g.step).floor() as usize;
                    let lo_index = t.min(f.len() - 1);
                    let hi_index = (t + 1).min(f.len() - 1);
                    offer(InfPoint { x, value: f.interpolate(x), lo_index, hi_index });
                }
            }
        }
    }
    best
}

fn fmt_end(x: f64) -> String {
    ExtReal::from(x).to_string()
}

impl fmt::Display for GammaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("empty");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(" U ")?;
            }
            if iv.is_degenerate() {
                write!(f, "{{{}}}", fmt_end(iv.lo))?;
            } else {
                let open = if iv.lo_closed { '[' } else { '(' };
                let close = if iv.hi_closed { ']' } else { ')' };
                write!(f, "{open}{}, {}{close}", fmt_end(iv.lo), fmt_end(iv.hi))?;
            }
        }
        Ok(())
    }
}

impl FromStr for GammaSet {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `(0.5, 1.5) U [2, 3]`
    /// or `{1}`; `∪` is accepted as the union sign.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "empty" {
            return Ok(GammaSet::empty());
        }
        let num = |t: &str| -> Result<f64> {
            Ok(t.trim().parse::<ExtReal>().map_err(|e| Error::Parse(e.to_string()))?.to_f64())
        };
        let pieces = s
            .split(['U', '∪'])
            .map(|piece| {
                let p = piece.trim();
                let bad = || Error::Parse(format!("cannot parse interval {p:?}"));
                let first = p.chars().next().ok_or_else(bad)?;
                let last = p.chars().last().ok_or_else(bad)?;
                let body = &p[first.len_utf8()..p.len() - last.len_utf8()];
                match (first, last) {
                    ('{', '}') => Interval::point(num(body)?),
                    ('[' | '(', ']' | ')') => {
                        let (a, b) = body.split_once(',').ok_or_else(bad)?;
                        Interval::new(num(a)?, num(b)?, first == '[', last == ']')
                    }
                    _ => Err(bad()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GammaSet::new(pieces))
    }
}

impl Serialize for GammaSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GammaSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
