use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinsim_core::deterministic::Orientation;
use spinsim_core::model::ModelConfig;
use spinsim_core::simulate::InitSpec;
use spinsim_core::Model;

/// An invalid configuration or usage; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Settings that may come from a run file; command-line flags override them.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(skip_serializing)]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_midpoint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

/// A parsed `--model` file.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub model: ModelConfig,
    pub run: RunFile,
}

impl LoadedConfig {
    pub fn build_model(&self) -> anyhow::Result<Model> {
        let base = self.path.parent().unwrap_or(Path::new("."));
        Ok(self.model.build::<f64>(base)?)
    }
}

/// Reads either a bare model description (an object with a `type` field) or a
/// run file whose `model` field holds one.
pub fn load_config(path: &Path) -> anyhow::Result<LoadedConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| config_err(format!("{} is not valid JSON: {e}", path.display())))?;
    let bad = |e: serde_json::Error| config_err(format!("{}: {e}", path.display()));
    let is_bare = value.get("type").is_some();
    let (model, run) = if is_bare {
        (serde_json::from_value(value).map_err(bad)?, RunFile::default())
    } else {
        let mut run: RunFile = serde_json::from_value(value).map_err(bad)?;
        let model = require(run.model.take(), "model")?;
        (model, run)
    };
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        model,
        run,
    })
}

/// Parses `--init`: either inline JSON (`{"kind":"fraction","p":0.1}`) or the
/// short forms `bernoulli:P` and `fraction:P`.
pub fn parse_init(s: &str) -> anyhow::Result<InitSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| config_err(format!("init: {e}")));
    }
    let (kind, p) = s
        .split_once(':')
        .ok_or_else(|| config_err(format!("init {s:?}: expected bernoulli:P, fraction:P or JSON")))?;
    let p: f64 = p
        .parse()
        .map_err(|_| config_err(format!("init {s:?}: {p:?} is not a number")))?;
    match kind {
        "bernoulli" => Ok(InitSpec::Bernoulli { p }),
        "fraction" => Ok(InitSpec::Fraction { p }),
        other => Err(config_err(format!("init kind {other:?} is not bernoulli or fraction"))),
    }
}

/// Takes the flag value if given, else the run-file value.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

pub fn require<T>(value: Option<T>, name: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| config_err(format!("missing field \"{name}\"")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Snapshots {
    None,
    Pbm,
}

pub fn parse_snapshots(s: &str) -> anyhow::Result<Snapshots> {
    match s {
        "none" => Ok(Snapshots::None),
        "pbm" => Ok(Snapshots::Pbm),
        other => Err(config_err(format!("snapshots {other:?}: expected none or pbm"))),
    }
}
