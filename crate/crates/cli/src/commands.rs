//! Subcommand implementations. Each returns the text for stdout, optional
//! text for stderr and the exit status.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ofdmim_relay::montecarlo::{estimate_mean_snr, estimate_outage, SapMode};
use ofdmim_relay::optimizer::{
    benchmark_complexity, fit_linear, oracle_grid_search, solve_baseline, solve_proposed, BenchRow, LinearFit,
    OracleMode,
};
use ofdmim_relay::outage::{
    block_from_subcarrier, expected_snr, jensen_gap_bound, outage_block, phi_subcarrier, surrogate_snr,
};
use ofdmim_relay::{from_db, to_db, AllocationResult, Error, OutageEstimate, PowerAllocation, SystemParams};

use crate::args::SweepAxis;
use crate::config::{ConfigError, OutputFormat, RunConfig, SolverKind};
use crate::output::{dbw, json, num, opt_num, Csv};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Ok,
    Infeasible,
    NotConverged,
    ConfigError,
    ValidationFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Infeasible => 2,
            Status::NotConverged => 3,
            Status::ConfigError => 4,
            Status::ValidationFailed => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub stdout: String,
    pub stderr: String,
    pub status: Status,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Model(Error::Infeasible) => Status::Infeasible,
            _ => Status::ConfigError,
        }
    }
}

/// One solver's answer. `result` is `None` when the solver reported the
/// problem infeasible outright.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub pt_dbw: Option<f64>,
    pub pr_dbw: Option<f64>,
    pub total_dbw: Option<f64>,
    pub result: Option<AllocationResult>,
    pub error: Option<String>,
}

impl SolverReport {
    fn from_result(solver: SolverKind, r: std::result::Result<AllocationResult, Error>) -> Result<Self, CliError> {
        match r {
            Ok(res) => Ok(SolverReport {
                solver,
                pt_dbw: dbw(res.alloc.pt),
                pr_dbw: dbw(res.alloc.pr),
                total_dbw: dbw(res.total_power_w),
                result: Some(res),
                error: None,
            }),
            Err(Error::Infeasible) => Ok(SolverReport {
                solver,
                pt_dbw: None,
                pr_dbw: None,
                total_dbw: None,
                result: None,
                error: Some(Error::Infeasible.to_string()),
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn status(&self) -> Status {
        match &self.result {
            None => Status::Infeasible,
            Some(r) if !r.feasible => Status::Infeasible,
            Some(r) if !r.converged => Status::NotConverged,
            Some(_) => Status::Ok,
        }
    }
}

fn worst(statuses: impl IntoIterator<Item = Status>) -> Status {
    let rank = |s: Status| match s {
        Status::Ok => 0,
        Status::NotConverged => 1,
        Status::Infeasible => 2,
        Status::ValidationFailed => 3,
        Status::ConfigError => 4,
    };
    statuses.into_iter().max_by_key(|&s| rank(s)).unwrap_or(Status::Ok)
}

fn run_solver(cfg: &RunConfig, kind: SolverKind) -> Result<SolverReport, CliError> {
    let r = match kind {
        SolverKind::Proposed => solve_proposed(&cfg.system, &cfg.target, &cfg.solver),
        SolverKind::Oracle => oracle_grid_search(&cfg.system, &cfg.target, cfg.oracle_step_dbw, OracleMode::Refined),
        SolverKind::Baseline => solve_baseline(&cfg.system, &cfg.target),
    };
    SolverReport::from_result(kind, r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub config: RunConfig,
    pub results: Vec<SolverReport>,
}

const SOLVER_HEADER: [&str; 10] = [
    "solver",
    "pt_dbw",
    "pr_dbw",
    "total_dbw",
    "pt_w",
    "pr_w",
    "achieved_outage",
    "iterations",
    "feasible",
    "converged",
];

fn solver_csv(reports: &[SolverReport]) -> String {
    let mut csv = Csv::new(&SOLVER_HEADER);
    for r in reports {
        let res = r.result.as_ref();
        csv.row(&[
            r.solver.name().to_string(),
            opt_num(r.pt_dbw),
            opt_num(r.pr_dbw),
            opt_num(r.total_dbw),
            opt_num(res.map(|x| x.alloc.pt)),
            opt_num(res.map(|x| x.alloc.pr)),
            opt_num(res.map(|x| x.achieved_outage)),
            res.map_or(0, |x| x.iterations).to_string(),
            res.is_some_and(|x| x.feasible).to_string(),
            res.is_some_and(|x| x.converged).to_string(),
        ]);
    }
    csv.finish()
}

pub fn optimize(cfg: &RunConfig) -> Result<Report, CliError> {
    let results = cfg
        .solvers
        .iter()
        .map(|&k| run_solver(cfg, k))
        .collect::<Result<Vec<_>, _>>()?;
    let status = worst(results.iter().map(SolverReport::status));
    let stdout = match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Csv => solver_csv(&results),
        OutputFormat::Json => json(&OptimizeReport {
            config: cfg.clone(),
            results,
        }),
    };
    Ok(Report {
        stdout,
        stderr: String::new(),
        status,
    })
}

pub fn oracle(cfg: &RunConfig, mode: OracleMode, step_dbw: Option<f64>) -> Result<Report, CliError> {
    let step = step_dbw.unwrap_or(cfg.oracle_step_dbw);
    let r = oracle_grid_search(&cfg.system, &cfg.target, step, mode);
    let report = SolverReport::from_result(SolverKind::Oracle, r)?;
    let status = report.status();
    let results = vec![report];
    let stdout = match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Csv => solver_csv(&results),
        OutputFormat::Json => json(&OptimizeReport {
            config: cfg.clone(),
            results,
        }),
    };
    Ok(Report {
        stdout,
        stderr: String::new(),
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `psi_th` or `s_db`.
    pub axis: String,
    pub value: f64,
    pub solver: SolverKind,
    pub pt_dbw: Option<f64>,
    pub pr_dbw: Option<f64>,
    pub total_dbw: Option<f64>,
    pub achieved_outage: Option<f64>,
    pub iterations: usize,
    pub feasible: bool,
    pub converged: bool,
}

pub fn sweep_grid(axis: SweepAxis, points: Option<usize>, from: Option<f64>, to: Option<f64>) -> Result<Vec<f64>, CliError> {
    let (n, lo, hi) = match axis {
        SweepAxis::PsiTh => (points.unwrap_or(25), from.unwrap_or(1e-4), to.unwrap_or(1e-1)),
        SweepAxis::SDb => (points.unwrap_or(21), from.unwrap_or(0.0), to.unwrap_or(10.0)),
    };
    if n == 0 {
        return Err(CliError::Usage("--points must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Usage("sweep bounds must be finite".into()));
    }
    if axis == SweepAxis::PsiTh && !(lo > 0.0 && hi > 0.0) {
        return Err(CliError::Usage("psi-th sweep bounds must be > 0".into()));
    }
    let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    Ok((0..n)
        .map(|i| match axis {
            SweepAxis::PsiTh => 10f64.powf(lo.log10() + frac(i) * (hi.log10() - lo.log10())),
            SweepAxis::SDb => lo + frac(i) * (hi - lo),
        })
        .collect())
}

pub fn sweep(
    cfg: &RunConfig,
    axis: SweepAxis,
    points: Option<usize>,
    from: Option<f64>,
    to: Option<f64>,
) -> Result<Report, CliError> {
    let grid = sweep_grid(axis, points, from, to)?;
    let axis_name = match axis {
        SweepAxis::PsiTh => "psi_th",
        SweepAxis::SDb => "s_db",
    };
    let per_point: Vec<Vec<SweepRow>> = grid
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            match axis {
                SweepAxis::PsiTh => c.target.psi_th = v,
                SweepAxis::SDb => c.target.s = from_db(v),
            }
            c.validate()?;
            c.solvers
                .iter()
                .map(|&k| {
                    let rep = run_solver(&c, k)?;
                    let res = rep.result.as_ref();
                    Ok(SweepRow {
                        axis: axis_name.to_string(),
                        value: v,
                        solver: k,
                        pt_dbw: rep.pt_dbw,
                        pr_dbw: rep.pr_dbw,
                        total_dbw: rep.total_dbw,
                        achieved_outage: res.map(|r| r.achieved_outage),
                        iterations: res.map_or(0, |r| r.iterations),
                        feasible: res.is_some_and(|r| r.feasible),
                        converged: res.is_some_and(|r| r.converged),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<SweepRow> = per_point.into_iter().flatten().collect();
    let status = worst(rows.iter().map(|r| {
        if !r.feasible {
            Status::Infeasible
        } else if !r.converged {
            Status::NotConverged
        } else {
            Status::Ok
        }
    }));
    let stdout = match cfg.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => {
            let mut csv = Csv::new(&[
                axis_name,
                "solver",
                "pt_dbw",
                "pr_dbw",
                "total_dbw",
                "achieved_outage",
                "iterations",
                "feasible",
                "converged",
            ]);
            for r in &rows {
                csv.row(&[
                    num(r.value),
                    r.solver.name().to_string(),
                    opt_num(r.pt_dbw),
                    opt_num(r.pr_dbw),
                    opt_num(r.total_dbw),
                    opt_num(r.achieved_outage),
                    r.iterations.to_string(),
                    r.feasible.to_string(),
                    r.converged.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Report {
        stdout,
        stderr: String::new(),
        status,
    })
}

/// One entry of the validation battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity.
    pub value: f64,
    /// What it is compared against.
    pub reference: f64,
    /// Test statistic (a z-score or a signed slack).
    pub statistic: f64,
    /// Pass when `statistic <= limit`.
    pub limit: f64,
}

impl Check {
    fn new(name: &str, value: f64, reference: f64, statistic: f64, limit: f64) -> Self {
        Check {
            name: name.to_string(),
            passed: statistic <= limit,
            value,
            reference,
            statistic,
            limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pt_dbw: f64,
    pub pr_dbw: f64,
    pub s_db: f64,
    pub trials: u64,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn z_score(est: &OutageEstimate, reference: f64) -> f64 {
    let se = (reference * (1.0 - reference) / est.trials as f64).sqrt();
    let diff = (est.p_hat - reference).abs();
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs the Monte Carlo and analytic invariants at `(pt_dbw, pr_dbw)`.
/// `phi_scale` multiplies the analytic subcarrier outage before comparison.
pub fn validation_battery(cfg: &RunConfig, pt_dbw: f64, pr_dbw: f64, phi_scale: f64) -> Result<ValidationReport, CliError> {
    if !(phi_scale.is_finite() && phi_scale > 0.0) {
        return Err(CliError::Usage("fault scale must be finite and > 0".into()));
    }
    let p = &cfg.system;
    let alloc = PowerAllocation::manual(from_db(pt_dbw), from_db(pr_dbw));
    alloc.validate(p)?;
    let s = cfg.target.s;
    let (trials, seed) = (cfg.trials, cfg.seed);

    let phi = (phi_subcarrier(p, &alloc, s)? * phi_scale).min(1.0);
    let po = block_from_subcarrier(phi, p.t);
    let mut checks = Vec::new();

    for (name, mode) in [("mc_outage_fixed_sap", SapMode::FixedSap), ("mc_outage_random_sap", SapMode::RandomSap)] {
        let est = estimate_outage(p, &alloc, s, trials, seed, mode)?;
        checks.push(Check::new(name, est.p_hat, po, z_score(&est, po), 3.0));
    }

    let mean = expected_snr(p, &alloc)?;
    let (mc_mean, se) = estimate_mean_snr(p, &alloc, trials, seed)?;
    let z = if se > 0.0 { (mc_mean - mean).abs() / se } else { 0.0 };
    checks.push(Check::new("mc_mean_snr", mc_mean, mean, z, 4.0));

    let gap = surrogate_snr(p, &alloc) - mean;
    let bound = jensen_gap_bound(p, &alloc);
    checks.push(Check::new("jensen_gap_bound", gap.abs(), bound, gap.abs() - bound, 0.0));

    let po_exact = outage_block(p, &alloc, s)?;
    let markov = s * (1.0 - po_exact).powf(1.0 / p.t as f64);
    checks.push(Check::new("markov_bound", mean, markov, markov - mean, 0.0));

    let ests: Vec<OutageEstimate> = [2usize, 4, 8]
        .iter()
        .map(|&k| k * p.t)
        .filter(|&n| n <= ofdmim_relay::SapCodec::MAX_N)
        .map(|n| {
            let q = SystemParams { n, ..*p };
            estimate_outage(&q, &alloc, s, trials, seed, SapMode::FixedSap)
        })
        .collect::<Result<_, _>>()?;
    let disjoint = ests
        .iter()
        .enumerate()
        .flat_map(|(i, a)| ests[i + 1..].iter().map(move |b| !a.overlaps(b)))
        .filter(|&d| d)
        .count();
    let spread = ests.iter().map(|e| e.p_hat).fold(f64::NEG_INFINITY, f64::max)
        - ests.iter().map(|e| e.p_hat).fold(f64::INFINITY, f64::min);
    checks.push(Check::new("sap_n_independence", spread, 0.0, disjoint as f64, 0.0));

    Ok(ValidationReport {
        pt_dbw,
        pr_dbw,
        s_db: to_db(s),
        trials,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn validate(cfg: &RunConfig, pt_dbw: f64, pr_dbw: f64, phi_scale: f64) -> Result<Report, CliError> {
    let rep = validation_battery(cfg, pt_dbw, pr_dbw, phi_scale)?;
    let status = if rep.passed { Status::Ok } else { Status::ValidationFailed };
    let stdout = match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json(&rep),
        OutputFormat::Csv => {
            let mut csv = Csv::new(&["check", "passed", "value", "reference", "statistic", "limit"]);
            for c in &rep.checks {
                csv.row(&[
                    c.name.clone(),
                    c.passed.to_string(),
                    num(c.value),
                    num(c.reference),
                    num(c.statistic),
                    num(c.limit),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Report {
        stdout,
        stderr: String::new(),
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Proposed iterations against `log10(1/ε)`.
    pub iterations_fit: Option<LinearFit>,
    /// `log10` of naive grid evaluations against `log10(1/ε)`; the slope is
    /// the growth exponent.
    pub naive_exponent_fit: Option<LinearFit>,
}

pub fn bench_report(cfg: &RunConfig, epsilons: &[f64], naive_min_step: f64) -> Result<BenchReport, CliError> {
    if epsilons.is_empty() {
        return Err(CliError::Usage("--epsilons needs at least one value".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) || epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(CliError::Usage("--epsilons must be positive and strictly descending".into()));
    }
    let rows = benchmark_complexity(&cfg.system, &cfg.target, epsilons, naive_min_step)?;
    let xs: Vec<f64> = rows.iter().map(|r| -r.epsilon.log10()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.iterations_proposed as f64).collect();
    let iterations_fit = if rows.len() >= 2 { fit_linear(&xs, &ys) } else { None };
    let (nx, ny): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.evaluations_naive_oracle.map(|e| (-r.epsilon.log10(), (e as f64).log10())))
        .unzip();
    let naive_exponent_fit = if nx.len() >= 2 { fit_linear(&nx, &ny) } else { None };
    Ok(BenchReport {
        rows,
        iterations_fit,
        naive_exponent_fit,
    })
}

pub fn bench(cfg: &RunConfig, epsilons: &[f64], naive_min_step: f64) -> Result<Report, CliError> {
    let rep = bench_report(cfg, epsilons, naive_min_step)?;
    let (stdout, stderr) = match cfg.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => (json(&rep), String::new()),
        OutputFormat::Csv => {
            let mut csv = Csv::new(&[
                "epsilon",
                "iterations_proposed",
                "evaluations_naive_oracle",
                "evaluations_baseline",
                "seconds_proposed",
                "seconds_naive_oracle",
            ]);
            for r in &rep.rows {
                csv.row(&[
                    num(r.epsilon),
                    r.iterations_proposed.to_string(),
                    r.evaluations_naive_oracle.map_or_else(|| "nan".to_string(), |e| e.to_string()),
                    r.evaluations_baseline.to_string(),
                    num(r.seconds_proposed),
                    opt_num(r.seconds_naive_oracle),
                ]);
            }
            let mut notes = String::new();
            let mut note = |label: &str, f: &Option<LinearFit>| match f {
                Some(f) => notes.push_str(&format!(
                    "{label}: slope {} intercept {} r^2 {}\n",
                    num(f.slope),
                    num(f.intercept),
                    num(f.r_squared)
                )),
                None => notes.push_str(&format!("{label}: not enough points for a fit\n")),
            };
            note("iterations vs log10(1/eps)", &rep.iterations_fit);
            note("log10 naive evaluations vs log10(1/eps)", &rep.naive_exponent_fit);
            (csv.finish(), notes)
        }
    };
    Ok(Report {
        stdout,
        stderr,
        status: Status::Ok,
    })
}
