use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::grid::UniformGrid;
use crate::table;

/// Extended-real function of one real variable sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<ExtReal>,
}

impl SampledFunction {
    pub fn new(grid: UniformGrid, values: Vec<ExtReal>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::arg(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> ExtReal) -> Result<Self> {
        grid.validate()?;
        let values = grid.points().into_iter().map(f).collect();
        SampledFunction::new(grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, ExtReal)> + '_ {
        self.values.iter().enumerate().map(|(j, &v)| (self.grid.point(j), v))
    }

    pub fn finite_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points().filter_map(|(x, v)| v.finite().map(|v| (x, v)))
    }

    /// Same samples with `+inf` wherever `keep` rejects the abscissa.
    pub fn restricted(&self, keep: impl Fn(f64) -> bool) -> SampledFunction {
        let values = self.points().map(|(x, v)| if keep(x) { v } else { ExtReal::PosInf }).collect();
        SampledFunction { grid: self.grid, values }
    }

    /// Linear interpolation between the neighbouring samples; infinite if
    /// either neighbour is, and `+inf` outside the grid.
    pub fn interpolate(&self, x: f64) -> ExtReal {
        let g = &self.grid;
        let last = g.point(self.len() - 1);
        if x < g.lo - 1e-12 * g.step || x > last + 1e-12 * g.step {
            return ExtReal::PosInf;
        }
        let t = ((x - g.lo) / g.step).clamp(0.0, (self.len() - 1) as f64);
        let j = t.floor() as usize;
        let frac = t - j as f64;
        if j + 1 >= self.len() || frac < 1e-12 {
            return self.values[j.min(self.len() - 1)];
        }
        if frac > 1.0 - 1e-12 {
            return self.values[j + 1];
        }
        match (self.values[j], self.values[j + 1]) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + frac * (b - a)),
            (a, b) => a.max(b),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        table::write_rows(out, &["x", "value"], self.points().map(|(x, v)| vec![x.to_string(), v.to_string()]))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = table::read_rows(input, &["x", "value"])?;
        let mut xs = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for rec in &rows {
            xs.push(table::real(rec, 0)?);
            values.push(table::ext(rec, 1)?);
        }
        SampledFunction::new(UniformGrid::from_points(&xs)?, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sampled functions always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SampledFunction = serde_json::from_str(text)?;
        SampledFunction::new(f.grid, f.values)
    }
}
