//! Run configuration shared by every CLI command.
//!
//! A config is read from TOML or JSON. The `metadata.json` written next to
//! every output is the fully resolved config, so it can be fed back in to
//! repeat the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::probe::ProbeSampler;
use crate::model::{catalog, ModelSpec, ParametricModel, ScalarLaw};
use crate::noise::rng::GENERATOR_ID;
use crate::picard::{PicardOptions, PicardScheme, StartFlow, DEFAULT_MAX_ITER, DEFAULT_SAMPLES, DEFAULT_TOL, MIN_SAMPLES};

/// A catalog id or a model written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Catalog(String),
    Inline(Box<ParametricModel>),
}

impl Default for ModelSource {
    fn default() -> Self {
        ModelSource::Catalog(catalog::LIN_LIP.to_string())
    }
}

/// Which rate experiment `rates` runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RateExperiment {
    /// Empirical-measure `W_2` rate against a large reference sample.
    Fournier,
    /// `E sup|G^N|^2` against `N`.
    #[default]
    Gn,
    /// Exponential moments against the Gronwall bound.
    Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Command that produced a metadata file; ignored on input.
    pub command: Option<String>,
    pub model: ModelSource,
    pub horizon: f64,
    pub dt: f64,
    /// Particle count for single-`N` commands.
    pub n: usize,
    /// Particle counts for sweeps.
    pub ns: Vec<usize>,
    /// Picard sample count `M`.
    pub samples: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: PicardScheme,
    pub start: StartFlow,
    pub replicas: usize,
    pub seed: u64,
    pub n_mark_samples: usize,
    pub independent_initial: bool,
    pub experiment: RateExperiment,
    /// Law sampled by the `fournier` experiment.
    pub law: ScalarLaw,
    pub probe: ProbeSampler,
    pub probe_points: usize,
    pub out: PathBuf,
    pub generator: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            model: ModelSource::default(),
            horizon: 1.0,
            dt: 1e-3,
            n: 100,
            ns: vec![10, 40, 160, 640],
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            scheme: PicardScheme::FrozenFlow,
            start: StartFlow::InitialLaw,
            replicas: 50,
            seed: 0,
            n_mark_samples: crate::engine::DEFAULT_MARK_SAMPLES,
            independent_initial: false,
            experiment: RateExperiment::Gn,
            law: ScalarLaw::Normal { mean: 0.0, sd: 1.0 },
            probe: ProbeSampler::default(),
            probe_points: 2000,
            out: PathBuf::from("out"),
            generator: GENERATOR_ID.to_string(),
        }
    }
}

impl RunConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return bad("dt must be positive and at most the horizon");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.n == 0 || self.replicas == 0 || self.max_iter == 0 || self.n_mark_samples == 0 || self.probe_points == 0 {
            return bad("counts must be at least 1");
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return bad("ns must be a nonempty list of positive counts");
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config(format!("samples must be at least {MIN_SAMPLES}")));
        }
        if self.generator != GENERATOR_ID {
            return Err(Error::Config(format!(
                "generator `{}` is not available; this build provides `{GENERATOR_ID}`",
                self.generator
            )));
        }
        self.law.validate()
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        match &self.model {
            ModelSource::Catalog(id) => catalog::by_id(id),
            ModelSource::Inline(m) => m.to_spec("inline"),
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.horizon, self.dt)
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            samples: self.samples,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            n_mark_samples: self.n_mark_samples,
            scheme: self.scheme,
            start: self.start,
            window: None,
        }
    }
}
