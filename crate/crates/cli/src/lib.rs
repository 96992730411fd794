//! Command-line front end for the `ofdmim-relay` library.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use args::{Cli, Command};
use commands::{CliError, Report};

/// Resolves the configuration and dispatches one subcommand.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Optimize { common } => commands::optimize(&common.resolve()?),
        Command::Sweep {
            common,
            axis,
            points,
            from,
            to,
        } => commands::sweep(&common.resolve()?, *axis, *points, *from, *to),
        Command::Validate {
            common,
            pt_dbw,
            pr_dbw,
            fault_phi_scale,
        } => commands::validate(&common.resolve()?, *pt_dbw, *pr_dbw, *fault_phi_scale),
        Command::Oracle { common, mode, step_dbw } => commands::oracle(&common.resolve()?, (*mode).into(), *step_dbw),
        Command::Bench {
            common,
            epsilons,
            naive_min_step,
        } => commands::bench(&common.resolve()?, epsilons, *naive_min_step),
    }
}
