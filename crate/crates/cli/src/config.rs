//! Run configuration: a flat `key = value` file with one section per
//! concern, overridable flag by flag.
//!
//! ```text
//! [system]
//! T = 4
//! N = 8
//! M = 4
//! eta1 = 1.3
//! eta2 = 1.1
//! mu1 = 1.3
//! mu2 = 1.5
//! ptmax_dbw = 100
//! prmax_dbw = 100
//!
//! [target]
//! s_db = 5
//! psi_th = 1e-3
//!
//! [solver]
//! epsilon = 1e-4
//! max_iterations = 10000
//! gap = exact            # or bound
//! oracle_step_dbw = 1e-4
//!
//! [run]
//! output = json          # or csv
//! seed = 1
//! trials = 1000000
//! solvers = proposed,oracle,baseline
//! ```
//!
//! Decibel quantities are converted to linear exactly once, when parsed.

use std::path::Path;
use std::str::FromStr;

use ofdmim_relay::optimizer::JensenGap;
use ofdmim_relay::{from_db, ReliabilityTarget, SolverConfig, SystemParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{location}: field `{field}`: {msg}")]
    Field { location: String, field: String, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Proposed,
    Oracle,
    Baseline,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Proposed => "proposed",
            SolverKind::Oracle => "oracle",
            SolverKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Powers stored in watts.
    pub system: SystemParams,
    /// `s` stored linear.
    pub target: ReliabilityTarget,
    pub solver: SolverConfig,
    pub oracle_step_dbw: f64,
    /// `None`: the command's natural format.
    pub output: Option<OutputFormat>,
    pub seed: u64,
    pub trials: u64,
    pub solvers: Vec<SolverKind>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemParams::reference(4),
            target: ReliabilityTarget {
                s: from_db(5.0),
                psi_th: 1e-3,
            },
            solver: SolverConfig::default(),
            oracle_step_dbw: 1e-4,
            output: None,
            seed: 1,
            trials: 1_000_000,
            solvers: vec![SolverKind::Proposed],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: ofdmim_relay::Error| ConfigError::Invalid(e.to_string());
        self.system.validate().map_err(inv)?;
        self.target.validate().map_err(inv)?;
        self.solver.validate().map_err(inv)?;
        ofdmim_relay::SapCodec::for_params(&self.system).map_err(inv)?;
        if !(self.oracle_step_dbw > 0.0 && self.oracle_step_dbw.is_finite()) {
            return Err(ConfigError::Invalid("oracle_step_dbw must be finite and > 0".into()));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be >= 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(ConfigError::Invalid("at least one solver required".into()));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Applies every `key = value` of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: String| ConfigError::Syntax {
                path: origin.to_string(),
                line: line_no,
                msg,
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(format!("unterminated section header `{line}`")))?
                    .trim();
                if !["system", "target", "solver", "run"].contains(&name) {
                    return Err(syntax(format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
            let sec = section
                .as_deref()
                .ok_or_else(|| syntax("key outside of any section".to_string()))?;
            let location = format!("{origin}:{line_no}");
            self.set(sec, key.trim(), value.trim(), &location)?;
        }
        Ok(())
    }

    /// Sets one field; `location` labels diagnostics.
    pub fn set(&mut self, section: &str, key: &str, value: &str, location: &str) -> Result<(), ConfigError> {
        let field_err = |msg: String| ConfigError::Field {
            location: location.to_string(),
            field: format!("{section}.{key}"),
            msg,
        };
        fn parse<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("cannot parse `{v}`: {e}"))
        }
        let r: Result<(), String> = (|| {
            match (section, key) {
                ("system", "T") => self.system.t = parse(value)?,
                ("system", "N") => self.system.n = parse(value)?,
                ("system", "M") => self.system.m = parse(value)?,
                ("system", "eta1") => self.system.eta1 = parse(value)?,
                ("system", "eta2") => self.system.eta2 = parse(value)?,
                ("system", "mu1") => self.system.mu1 = parse(value)?,
                ("system", "mu2") => self.system.mu2 = parse(value)?,
                ("system", "ptmax_dbw") => self.system.pt_max = from_db(parse::<f64>(value)?),
                ("system", "prmax_dbw") => self.system.pr_max = from_db(parse::<f64>(value)?),
                ("target", "s_db") => self.target.s = from_db(parse::<f64>(value)?),
                ("target", "psi_th") => self.target.psi_th = parse(value)?,
                ("solver", "epsilon") => self.solver.epsilon = parse(value)?,
                ("solver", "max_iterations") => self.solver.max_iterations = parse(value)?,
                ("solver", "gap") => {
                    self.solver.gap = match value {
                        "exact" => JensenGap::Exact,
                        "bound" => JensenGap::Bound,
                        other => return Err(format!("expected `exact` or `bound`, got `{other}`")),
                    }
                }
                ("solver", "oracle_step_dbw") => self.oracle_step_dbw = parse(value)?,
                ("run", "output") => {
                    self.output = Some(match value {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        other => return Err(format!("expected `csv` or `json`, got `{other}`")),
                    })
                }
                ("run", "seed") => self.seed = parse(value)?,
                ("run", "trials") => self.trials = parse::<f64>(value).and_then(count_from_float)?,
                ("run", "solvers") => self.solvers = parse_solvers(value)?,
                _ => return Err("unknown key".to_string()),
            }
            Ok(())
        })();
        r.map_err(field_err)
    }
}

/// Accepts `1000000` as well as `1e6`.
fn count_from_float(v: f64) -> Result<u64, String> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("{v} is not a non-negative integer"))
    }
}

pub fn parse_solvers(value: &str) -> Result<Vec<SolverKind>, String> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let kind = match part {
            "proposed" => SolverKind::Proposed,
            "oracle" => SolverKind::Oracle,
            "baseline" => SolverKind::Baseline,
            other => return Err(format!("unknown solver `{other}`")),
        };
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}
