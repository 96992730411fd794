//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ofdmim_relay::optimizer::{JensenGap, OracleMode};
use ofdmim_relay::from_db;

use crate::config::{ConfigError, OutputFormat, RunConfig, SolverKind};

#[derive(Debug, Parser)]
#[command(name = "ofdmim-relay", version, about = "Outage-constrained power allocation for AF relayed OFDM-IM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration with the selected solvers.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve over a grid of outage ceilings or SNR thresholds.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = SweepAxis::PsiTh)]
        axis: SweepAxis,
        /// Defaults: 25 for `psi-th`, 21 for `s-db`.
        #[arg(long)]
        points: Option<usize>,
        /// First grid value (default 1e-4 or 0 dB).
        #[arg(long)]
        from: Option<f64>,
        /// Last grid value (default 1e-1 or 10 dB).
        #[arg(long)]
        to: Option<f64>,
    },
    /// Check the analytic model against Monte Carlo at a fixed allocation.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        pt_dbw: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        pr_dbw: f64,
        #[arg(long, hide = true, default_value_t = 1.0)]
        fault_phi_scale: f64,
    },
    /// Exhaustive grid search for the minimum total power.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = OracleModeArg::Refined)]
        mode: OracleModeArg,
        /// Grid step in dB (default: `solver.oracle_step_dbw`).
        #[arg(long)]
        step_dbw: Option<f64>,
    },
    /// Iterations and grid evaluations versus tolerance.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Strictly descending tolerances; those at or above
        /// `--naive-min-step` also drive the naive grid, read as a dB step.
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [1.0, 0.5, 0.25, 1e-1, 1e-2, 1e-3, 1e-4])]
        epsilons: Vec<f64>,
        /// Smallest tolerance also run through the naive grid, as a dB step.
        #[arg(long, default_value_t = 0.25)]
        naive_min_step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    PsiTh,
    SDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleModeArg {
    Naive,
    Refined,
}

impl From<OracleModeArg> for OracleMode {
    fn from(m: OracleModeArg) -> Self {
        match m {
            OracleModeArg::Naive => OracleMode::Naive,
            OracleModeArg::Refined => OracleMode::Refined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapArg {
    Exact,
    Bound,
}

/// Overrides applied on top of `--config` (or the default profile).
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<u32>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub eta2: Option<f64>,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ptmax_dbw: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub prmax_dbw: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_db: Option<f64>,
    #[arg(long)]
    pub psi_th: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub gap: Option<GapArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub solvers: Option<Vec<SolverKind>>,
}

impl CommonArgs {
    /// Default profile, then the config file, then flags; validated.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(t) = self.t {
            c.system.t = t;
            if self.n.is_none() && self.config.is_none() {
                c.system.n = 2 * t;
            }
        }
        macro_rules! set {
            ($src:ident => $dst:expr) => {
                if let Some(v) = self.$src {
                    $dst = v;
                }
            };
        }
        set!(n => c.system.n);
        set!(m => c.system.m);
        set!(eta1 => c.system.eta1);
        set!(eta2 => c.system.eta2);
        set!(mu1 => c.system.mu1);
        set!(mu2 => c.system.mu2);
        set!(psi_th => c.target.psi_th);
        set!(epsilon => c.solver.epsilon);
        set!(max_iterations => c.solver.max_iterations);
        set!(trials => c.trials);
        set!(seed => c.seed);
        if let Some(v) = self.ptmax_dbw {
            c.system.pt_max = from_db(v);
        }
        if let Some(v) = self.prmax_dbw {
            c.system.pr_max = from_db(v);
        }
        if let Some(v) = self.s_db {
            c.target.s = from_db(v);
        }
        if let Some(g) = self.gap {
            c.solver.gap = match g {
                GapArg::Exact => JensenGap::Exact,
                GapArg::Bound => JensenGap::Bound,
            };
        }
        if self.output.is_some() {
            c.output = self.output;
        }
        if let Some(s) = &self.solvers {
            let mut list = Vec::new();
            for k in s {
                if !list.contains(k) {
                    list.push(*k);
                }
            }
            c.solvers = list;
        }
        c.validate()?;
        Ok(c)
    }
}
