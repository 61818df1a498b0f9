//! Run configuration: a JSON document, optionally overridden by flags.

use std::path::{Path, PathBuf};

use bufcontour::model::{BivariateNormal, EnvironmentalModel, JointMetoceanModel};
use bufcontour::risk::{return_period_to_pe, ReturnPeriodSpec};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// A preset name or inline parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Preset(String),
    Metocean(JointMetoceanModel),
    Normal { normal: BivariateNormal },
}

/// A resolved, validated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelChoice {
    Metocean(JointMetoceanModel),
    Normal(BivariateNormal),
}

pub const PRESETS: [&str; 3] = ["swell", "windsea", "normal"];

impl ModelSpec {
    pub fn resolve(&self) -> Result<ModelChoice> {
        let choice = match self {
            ModelSpec::Preset(name) => match name.to_ascii_lowercase().as_str() {
                "swell" => ModelChoice::Metocean(JointMetoceanModel::swell()),
                "windsea" | "wind-sea" => ModelChoice::Metocean(JointMetoceanModel::windsea()),
                "normal" => ModelChoice::Normal(BivariateNormal::standard()),
                _ => return Err(CliError::Usage(format!("model: unknown preset {name:?}, expected one of {PRESETS:?}"))),
            },
            ModelSpec::Metocean(m) => ModelChoice::Metocean(*m),
            ModelSpec::Normal { normal } => ModelChoice::Normal(*normal),
        };
        choice.validate().map_err(|e| CliError::Usage(format!("model: {e}")))?;
        Ok(choice)
    }
}

impl ModelChoice {
    /// Column names of a sample row.
    pub fn columns(&self) -> [&'static str; 2] {
        match self {
            ModelChoice::Metocean(_) => ["t", "h"],
            ModelChoice::Normal(_) => ["x", "y"],
        }
    }
}

impl EnvironmentalModel for ModelChoice {
    fn id(&self) -> String {
        match self {
            ModelChoice::Metocean(m) => m.id(),
            ModelChoice::Normal(m) => m.id(),
        }
    }

    fn validate(&self) -> bufcontour::Result<()> {
        match self {
            ModelChoice::Metocean(m) => m.validate(),
            ModelChoice::Normal(m) => m.validate(),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> bufcontour::Result<[f64; 2]> {
        match self {
            ModelChoice::Metocean(m) => m.draw(rng),
            ModelChoice::Normal(m) => m.draw(rng),
        }
    }
}

fn default_model() -> ModelSpec {
    ModelSpec::Preset("swell".into())
}
fn default_samples() -> usize {
    1_000_000
}
fn default_directions() -> usize {
    bufcontour::contour::DEFAULT_DIRECTIONS
}
fn default_seed() -> u64 {
    1
}
fn default_scale_a() -> f64 {
    1.0
}
fn default_min_tail() -> usize {
    bufcontour::contour::DEFAULT_MIN_TAIL
}
fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    #[serde(default)]
    pub pe: Option<f64>,
    #[serde(default)]
    pub return_period: Option<ReturnPeriodSpec>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub buffered: bool,
    #[serde(default = "default_scale_a")]
    pub scale_a: f64,
    #[serde(default = "default_min_tail")]
    pub min_tail: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub svg: bool,
    /// Fresh draws used by `verify`; defaults to `samples`.
    #[serde(default)]
    pub verify_samples: Option<usize>,
    /// Defaults to `seed + 1`.
    #[serde(default)]
    pub verify_seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Flag values that replace file values when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub pe: Option<f64>,
    pub return_period_years: Option<f64>,
    pub states_per_hour: Option<f64>,
    pub samples: Option<usize>,
    pub directions: Option<usize>,
    pub seed: Option<u64>,
    pub buffered: bool,
    pub scale_a: Option<f64>,
    pub min_tail: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
    pub verify_samples: Option<usize>,
    pub verify_seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Applies flags on top of `self`. A flag for one probability source
    /// discards the other from the file.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        if o.pe.is_some() && o.return_period_years.is_some() {
            return Err(CliError::Usage("give either --pe or --return-period-years, not both".into()));
        }
        if let Some(name) = &o.model {
            self.model = ModelSpec::Preset(name.clone());
        }
        if let Some(pe) = o.pe {
            self.pe = Some(pe);
            self.return_period = None;
        }
        if let Some(years) = o.return_period_years {
            let mut spec = self.return_period.unwrap_or(ReturnPeriodSpec::years(years));
            spec.return_period_years = years;
            self.return_period = Some(spec);
            self.pe = None;
        }
        if let Some(rate) = o.states_per_hour {
            match &mut self.return_period {
                Some(spec) => spec.states_per_hour = rate,
                None => return Err(CliError::Usage("--states-per-hour needs a return period".into())),
            }
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = o.$field.clone() { self.$field = v; })* };
        }
        set!(samples, directions, seed, scale_a, min_tail, out_dir);
        if o.verify_samples.is_some() {
            self.verify_samples = o.verify_samples;
        }
        if o.verify_seed.is_some() {
            self.verify_seed = o.verify_seed;
        }
        self.buffered |= o.buffered;
        self.svg |= o.svg;
        Ok(self)
    }

    /// Exceedence probability, direct or from the return period.
    pub fn resolve_pe(&self) -> Result<f64> {
        match (self.pe, &self.return_period) {
            (Some(_), Some(_)) => Err(CliError::Usage("pe and return_period are mutually exclusive".into())),
            (None, None) => Err(CliError::Usage("one of pe or return_period is required".into())),
            (Some(pe), None) if pe > 0.0 && pe < 1.0 => Ok(pe),
            (Some(pe), None) => Err(CliError::Usage(format!("pe: must lie in (0, 1), got {pe}"))),
            (None, Some(spec)) => return_period_to_pe(spec).map_err(|e| CliError::Usage(format!("return_period: {e}"))),
        }
    }

    pub fn verify_seed(&self) -> u64 {
        self.verify_seed.unwrap_or(self.seed.wrapping_add(1))
    }

    pub fn verify_samples(&self) -> usize {
        self.verify_samples.unwrap_or(self.samples)
    }

    /// Checks every field and returns the resolved model and `P_e`.
    pub fn validate(&self) -> Result<(ModelChoice, f64)> {
        let model = self.model.resolve()?;
        let pe = self.resolve_pe()?;
        if self.samples == 0 {
            return Err(CliError::Usage("samples: must be positive".into()));
        }
        if self.directions < 3 {
            return Err(CliError::Usage(format!("directions: need at least 3, got {}", self.directions)));
        }
        if self.seed == 0 {
            return Err(CliError::Usage("seed: must be positive".into()));
        }
        if !(self.scale_a > 0.0 && self.scale_a.is_finite()) {
            return Err(CliError::Usage(format!("scale_a: must be positive, got {}", self.scale_a)));
        }
        if self.min_tail == 0 {
            return Err(CliError::Usage("min_tail: must be positive".into()));
        }
        if self.verify_samples == Some(0) {
            return Err(CliError::Usage("verify_samples: must be positive".into()));
        }
        Ok((model, pe))
    }
}
