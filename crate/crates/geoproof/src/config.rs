//! Flat key-value configuration (`GEO_CONFIG`).
//!
//! The file is TOML, read as a flat map of dotted keys, so both
//! `passcheck.max_same_kind = 4` and a `[passcheck]` table work.
//! Unknown keys are errors. Command-line flags override the file.

use std::path::Path;

use geoproof_core::deduct::DEFAULT_BUDGET;
use geoproof_core::diagram::DiagramConfig;
use geoproof_core::engine::DEFAULT_MAX_TURNS;
use geoproof_core::memory::PassCheckLimits;
use geoproof_core::synth::Priors;
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("config key '{key}': {reason}")]
    Invalid { key: String, reason: String },
}

/// Curriculum simulation defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumDefaults {
    pub alpha: f64,
    pub kappa0: f64,
    pub kappa_min: f64,
    pub batch_size: usize,
    pub skill0: f64,
    pub rate: f64,
}

impl Default for CurriculumDefaults {
    fn default() -> Self {
        CurriculumDefaults { alpha: 1.0, kappa0: 6.0, kappa_min: 3.0, batch_size: 32, skill0: 6.0, rate: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub diagram: DiagramConfig,
    pub budget: usize,
    pub max_turns: u32,
    pub passcheck: PassCheckLimits,
    pub synth_tolerance: f64,
    pub synth_max_sample: usize,
    pub synth_max_retries: usize,
    pub synth_batch: usize,
    pub priors: Priors,
    pub curriculum: CurriculumDefaults,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            diagram: DiagramConfig::default(),
            budget: DEFAULT_BUDGET,
            max_turns: DEFAULT_MAX_TURNS,
            passcheck: PassCheckLimits::default(),
            synth_tolerance: 2.0,
            synth_max_sample: 200_000,
            synth_max_retries: 50,
            synth_batch: 16,
            priors: Priors::default(),
            curriculum: CurriculumDefaults::default(),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn invalid(key: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.to_string() }
}

fn float(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        _ => return Err(invalid(key, "expected a number")),
    };
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = float(key, v)?;
    if x <= 0.0 {
        return Err(invalid(key, "must be positive"));
    }
    Ok(x)
}

fn nonneg(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = float(key, v)?;
    if x < 0.0 {
        return Err(invalid(key, "must not be negative"));
    }
    Ok(x)
}

fn count(key: &str, v: &Value) -> Result<usize, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 1 => Ok(*i as usize),
        Value::Integer(_) => Err(invalid(key, "must be at least 1")),
        _ => Err(invalid(key, "expected an integer")),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let table: toml::Table = text.parse()?;
        let mut entries = Vec::new();
        flatten("", &table, &mut entries);
        let mut c = Config::default();
        for (key, v) in &entries {
            let k = key.as_str();
            match k {
                "diagram.tol_construct" => c.diagram.tol_construct = positive(k, v)?,
                "diagram.tol_check" => c.diagram.tol_check = positive(k, v)?,
                "diagram.coincidence" => c.diagram.coincidence = positive(k, v)?,
                "diagram.near_pair" => c.diagram.near_pair = nonneg(k, v)?,
                "diagram.near_collinear" => c.diagram.near_collinear = nonneg(k, v)?,
                "diagram.exact_collinear" => c.diagram.exact_collinear = nonneg(k, v)?,
                "diagram.max_restarts" => c.diagram.max_restarts = count(k, v)? as u32,
                "diagram.max_iters" => c.diagram.max_iters = count(k, v)?,
                "deduct.budget" => c.budget = count(k, v)?,
                "session.max_turns" => c.max_turns = count(k, v)? as u32,
                "passcheck.max_think_chars" => c.passcheck.max_think_chars = count(k, v)?,
                "passcheck.max_same_kind" => c.passcheck.max_same_kind = count(k, v)?,
                "synth.tolerance" => c.synth_tolerance = positive(k, v)?,
                "synth.max_sample" => c.synth_max_sample = count(k, v)?,
                "synth.max_retries" => c.synth_max_retries = count(k, v)?,
                "synth.batch" => c.synth_batch = count(k, v)?,
                "synth.raw_base" => c.priors.raw_base = nonneg(k, v)?,
                "synth.raw_per_kappa" => c.priors.raw_per_kappa = nonneg(k, v)?,
                "synth.raw_max" => c.priors.raw_max = count(k, v)?,
                "synth.aux_base" => c.priors.aux_base = nonneg(k, v)?,
                "synth.aux_per_kappa" => c.priors.aux_per_kappa = nonneg(k, v)?,
                "synth.aux_max" => c.priors.aux_max = count(k, v)?,
                "synth.constrain" => {
                    let x = nonneg(k, v)?;
                    if x > 1.0 {
                        return Err(invalid(k, "must lie in [0, 1]"));
                    }
                    c.priors.constrain = x;
                }
                "curriculum.alpha" => c.curriculum.alpha = nonneg(k, v)?,
                "curriculum.kappa0" => c.curriculum.kappa0 = positive(k, v)?,
                "curriculum.kappa_min" => c.curriculum.kappa_min = positive(k, v)?,
                "curriculum.batch_size" => c.curriculum.batch_size = count(k, v)?,
                "curriculum.skill0" => c.curriculum.skill0 = float(k, v)?,
                "curriculum.rate" => c.curriculum.rate = nonneg(k, v)?,
                _ => match k.strip_prefix("synth.weight.") {
                    Some(name) => set_weight(&mut c.priors, name, nonneg(k, v)?),
                    None => return Err(ConfigError::UnknownKey(key.clone())),
                },
            }
        }
        let synth = c.synth_config(c.curriculum.kappa0);
        synth.validate().map_err(|e| invalid("synth", &e.to_string()))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Config::parse(&text)
    }

    /// The file named by `GEO_CONFIG`, or the defaults.
    pub fn from_env() -> Result<Config, ConfigError> {
        match std::env::var_os("GEO_CONFIG") {
            Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
            _ => Ok(Config::default()),
        }
    }

    pub fn session_config(&self) -> geoproof_core::engine::SessionConfig {
        geoproof_core::engine::SessionConfig {
            max_turns: self.max_turns,
            budget: self.budget,
            diagram: self.diagram.clone(),
            ..Default::default()
        }
    }

    pub fn synth_config(&self, kappa: f64) -> geoproof_core::synth::SynthConfig {
        geoproof_core::synth::SynthConfig {
            kappa,
            tolerance: self.synth_tolerance,
            max_sample: self.synth_max_sample,
            max_retries: self.synth_max_retries,
            batch: self.synth_batch,
            budget: self.budget,
            priors: self.priors.clone(),
        }
    }
}

fn set_weight(p: &mut Priors, name: &str, w: f64) {
    match p.constructors.iter_mut().find(|(n, _)| n == name) {
        Some(e) => e.1 = w,
        None => p.constructors.push((name.to_string(), w)),
    }
}
