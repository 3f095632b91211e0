//! Run configuration: JSON schema, flag overrides, validation and the
//! canonical hash that names output directories.

use gpwave::experiments::{DataFamily, DecayMode, Engine, FamilyKind};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {err}")]
    Io { path: String, err: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Decay,
    CompareWave,
    CompareLeps,
    Soliton,
    LpCheck,
    Sweep,
}

impl std::str::FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "decay" => Ok(Command::Decay),
            "compare-wave" => Ok(Command::CompareWave),
            "compare-leps" => Ok(Command::CompareLeps),
            "soliton" => Ok(Command::Soliton),
            "lp-check" => Ok(Command::LpCheck),
            "sweep" => Ok(Command::Sweep),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

fn default_dim() -> usize {
    1
}
fn default_n() -> usize {
    1024
}
fn default_eps() -> Vec<f64> {
    vec![0.3]
}
fn default_tmax() -> f64 {
    1.0
}
fn default_s() -> f64 {
    4.0
}
fn default_engine() -> Engine {
    Engine::Gp
}
fn default_out() -> String {
    "gpwave-out".into()
}
fn default_family() -> DataFamily {
    DataFamily { kind: FamilyKind::Gaussian, amplitude: 0.5, width: 2.0, seed: 0, norm_s: 4.0 }
}
fn default_growth_cap() -> f64 {
    4.0
}

/// Validated run configuration. Unknown keys are rejected at parse time;
/// every field beyond `command` has a documented default.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Explicit box length; when absent the sizing rule picks one.
    #[serde(default)]
    pub box_length: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub t_min: Option<f64>,
    #[serde(default = "default_tmax")]
    pub t_max: f64,
    /// Explicit time step; when absent the CFL-type default applies.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default = "default_family")]
    pub family: DataFamily,
    /// Spectral annulus for the decay command.
    #[serde(default)]
    pub annulus: Option<(f64, f64)>,
    /// Group selector for the decay command.
    #[serde(default)]
    pub mode: Option<DecayMode>,
    /// Norm-growth stopping constant for the sweep command.
    #[serde(default = "default_growth_cap")]
    pub growth_cap: f64,
    #[serde(default = "default_out")]
    pub out_dir: String,
}

/// Manifest written next to every report; itself a valid input for
/// `--config`, so a run can be reproduced from its output directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestFile {
    pub config: RunConfig,
    pub config_hash: String,
    pub code_version: String,
}

/// Optional command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub dim: Option<usize>,
    pub n: Option<usize>,
    pub box_length: Option<f64>,
    pub eps: Vec<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub s: Option<f64>,
    pub seed: Option<u64>,
    pub engine: Option<Engine>,
    pub out_dir: Option<String>,
}

pub fn parse_config(
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<RunConfig, ConfigError> {
    let mut cfg: RunConfig = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                path: p.display().to_string(),
                err: e.to_string(),
            })?;
            // accept either a bare config or a manifest wrapper
            match serde_json::from_str::<ManifestFile>(&text) {
                Ok(m) => m.config,
                Err(_) => serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| ConfigError::Parse(e.to_string()))?,
            }
        }
        None => {
            let command = overrides.command.ok_or(ConfigError::Missing("command"))?;
            serde_json::from_value(serde_json::json!({ "command": command }))
                .expect("defaults fill a minimal config")
        }
    };
    if let Some(c) = overrides.command {
        cfg.command = c;
    }
    if let Some(v) = overrides.dim {
        cfg.dim = v;
    }
    if let Some(v) = overrides.n {
        cfg.n = v;
    }
    if let Some(v) = overrides.box_length {
        cfg.box_length = Some(v);
    }
    if !overrides.eps.is_empty() {
        cfg.eps = overrides.eps.clone();
    }
    if let Some(v) = overrides.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = overrides.dt {
        cfg.dt = Some(v);
    }
    if let Some(v) = overrides.s {
        cfg.s = v;
    }
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = overrides.engine {
        cfg.engine = v;
    }
    if let Some(v) = &overrides.out_dir {
        cfg.out_dir = v.clone();
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if !(1..=3).contains(&cfg.dim) {
        return Err(ConfigError::Invalid { field: "dim", reason: format!("{} not in 1..=3", cfg.dim) });
    }
    if cfg.n < 8 || !cfg.n.is_power_of_two() {
        return Err(ConfigError::Invalid {
            field: "n",
            reason: format!("{} is not a power of two >= 8", cfg.n),
        });
    }
    if cfg.eps.is_empty() || cfg.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(ConfigError::Invalid {
            field: "eps",
            reason: "needs at least one positive value".into(),
        });
    }
    if !(cfg.t_max > 0.0) {
        return Err(ConfigError::Invalid { field: "t_max", reason: "must be positive".into() });
    }
    if let Some(dt) = cfg.dt {
        if !(dt > 0.0 && dt <= cfg.t_max) {
            return Err(ConfigError::Invalid {
                field: "dt",
                reason: "must satisfy 0 < dt <= t_max".into(),
            });
        }
    }
    match cfg.command {
        Command::Decay => {
            if cfg.annulus.is_none() {
                return Err(ConfigError::Missing("annulus"));
            }
            if cfg.mode.is_none() {
                return Err(ConfigError::Missing("mode"));
            }
            if cfg.box_length.is_none() {
                return Err(ConfigError::Missing("box_length"));
            }
            if cfg.eps.len() != 1 {
                return Err(ConfigError::Invalid {
                    field: "eps",
                    reason: "decay takes exactly one eps".into(),
                });
            }
        }
        Command::CompareLeps => {
            if cfg.dim > 2 {
                return Err(ConfigError::Invalid {
                    field: "dim",
                    reason: "compare-leps runs in dimension 1 or 2".into(),
                });
            }
        }
        Command::LpCheck => {
            if cfg.box_length.is_none() {
                return Err(ConfigError::Missing("box_length"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Canonical serialization of the validated config (stable field order).
pub fn canonical_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// FNV-1a 64 over the canonical serialization; names the output directory.
pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = canonical_json(cfg);
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn command_slug(c: Command) -> &'static str {
    match c {
        Command::Simulate => "simulate",
        Command::Decay => "decay",
        Command::CompareWave => "compare-wave",
        Command::CompareLeps => "compare-leps",
        Command::Soliton => "soliton",
        Command::LpCheck => "lp-check",
        Command::Sweep => "sweep",
    }
}
