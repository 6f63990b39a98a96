use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use israte::cumulant::TruncationWindow;
use israte::spectrum::{Backend, NSchedule, ShrinkSchedule};
use israte::verify::{GammaSet, Tolerance, DEFAULT_K_SCHEDULE};
use israte::{SourceSpec, UniformGrid};
use serde::{Deserialize, Serialize};

/// Sets checked by the verifiers: generated from a seed or listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Generate {
        seed: u64,
        count: usize,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
    },
    Explicit(Vec<GammaSet>),
}

fn default_lo() -> f64 {
    -3.0
}

fn default_hi() -> f64 {
    3.0
}

impl GammaSpec {
    pub fn sets(&self) -> Vec<GammaSet> {
        match self {
            GammaSpec::Generate { seed, count, lo, hi } => GammaSet::generate(*seed, *count, *lo, *hi),
            GammaSpec::Explicit(sets) => sets.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Locality {
    pub r0: f64,
    pub half_width: f64,
}

/// Missing fields take their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<SourceSpec>>,
    #[serde(rename = "R_grid", alias = "r_grid")]
    pub r_grid: UniformGrid,
    pub theta_grid: UniformGrid,
    pub schedule: ShrinkSchedule,
    pub backend: Backend,
    pub windows: Vec<TruncationWindow>,
    pub gamma_sets: GammaSpec,
    pub k_schedule: Vec<f64>,
    pub tolerances: Tolerance,
    pub locality: Option<Locality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_k_schedule() -> Vec<f64> {
    DEFAULT_K_SCHEDULE.to_vec()
}

impl Default for ExperimentConfig {
    /// The bundled source matrix at desk scale.
    fn default() -> Self {
        let n = NSchedule::geometric(1000, 10_000, 12, 5).expect("static schedule");
        ExperimentConfig {
            source: None,
            sources: None,
            r_grid: UniformGrid { lo: -3.0, hi: 3.0, step: 0.05 },
            theta_grid: UniformGrid { lo: -5.0, hi: 5.0, step: 0.01 },
            schedule: ShrinkSchedule::new(1, 5, n).expect("static schedule"),
            backend: Backend::Exact,
            windows: vec![TruncationWindow::Interval { m1: -3.0, m2: 3.0 }, TruncationWindow::Symmetric { k: 8.0 }],
            gamma_sets: GammaSpec::Generate { seed: 2024, count: 20, lo: -3.0, hi: 3.0 },
            k_schedule: default_k_schedule(),
            tolerances: Tolerance::default(),
            locality: Some(Locality { r0: 0.8, half_width: 0.25 }),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Every configured source; `source` comes first when both keys are set,
    /// and the bundled matrix stands in when neither is.
    pub fn sources(&self) -> Vec<SourceSpec> {
        if self.source.is_none() && self.sources.is_none() {
            return SourceSpec::bundled();
        }
        self.source.iter().chain(self.sources.iter().flatten()).cloned().collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.r_grid.validate()?;
        self.theta_grid.validate()?;
        self.schedule.validate()?;
        if self.sources().is_empty() {
            anyhow::bail!("config names no source");
        }
        for s in self.sources() {
            s.validate()?;
        }
        for w in &self.windows {
            w.validate()?;
        }
        if self.k_schedule.is_empty() || self.k_schedule.windows(2).any(|w| w[0] >= w[1]) {
            anyhow::bail!("k_schedule must be nonempty and strictly increasing");
        }
        if let Some(l) = self.locality {
            if !(l.half_width > 0.0 && l.r0.is_finite()) {
                anyhow::bail!("locality needs a finite r0 and a positive half_width");
            }
        }
        Ok(())
    }

    /// Replaces the set generator and Monte Carlo seeds. Explicit sets are
    /// left untouched.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let GammaSpec::Generate { seed: s, .. } = &mut self.gamma_sets {
            *s = seed;
        }
        if let Backend::MonteCarlo { seed: s, .. } = &mut self.backend {
            *s = seed;
        }
        self
    }
}
