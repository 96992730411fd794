use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{oracle_grid_search, solve_baseline, solve_proposed, OracleMode, SolverConfig};
use crate::error::{Error, Result};
use crate::outage::ReliabilityTarget;
use crate::scalar::Scalar;
use crate::sysmodel::SystemParams;

/// One tolerance level of [`benchmark_complexity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub epsilon: f64,
    pub iterations_proposed: usize,
    /// `None` when `epsilon` is below the naive-oracle cut-off.
    pub evaluations_naive_oracle: Option<u64>,
    pub evaluations_baseline: u64,
    pub seconds_proposed: f64,
    pub seconds_naive_oracle: Option<f64>,
}

/// Runs the proposed solver at each `epsilon` (watts) and the naive oracle at
/// each `epsilon >= naive_min_step_dbw` (used as the grid step in dBW).
pub fn benchmark_complexity<F: Scalar>(
    params: &SystemParams<F>,
    target: &ReliabilityTarget<F>,
    epsilons: &[F],
    naive_min_step_dbw: F,
) -> Result<Vec<BenchRow>> {
    if epsilons.is_empty() {
        return Err(Error::param("epsilons", "empty list"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) || epsilons.iter().any(|&e| !(e > F::zero())) {
        return Err(Error::param("epsilons", "must be positive and strictly descending"));
    }
    let baseline = solve_baseline(params, target)?;
    epsilons
        .iter()
        .map(|&eps| {
            let cfg = SolverConfig {
                epsilon: eps,
                ..SolverConfig::default()
            };
            let clock = Instant::now();
            let proposed = solve_proposed(params, target, &cfg)?;
            let seconds_proposed = clock.elapsed().as_secs_f64();
            let (naive, seconds_naive) = if eps >= naive_min_step_dbw {
                let clock = Instant::now();
                let r = oracle_grid_search(params, target, eps, OracleMode::Naive)?;
                (Some(r.evaluations), Some(clock.elapsed().as_secs_f64()))
            } else {
                (None, None)
            };
            Ok(BenchRow {
                epsilon: eps.to_f64_lossy(),
                iterations_proposed: proposed.iterations,
                evaluations_naive_oracle: naive,
                evaluations_baseline: baseline.evaluations,
                seconds_proposed,
                seconds_naive_oracle: seconds_naive,
            })
        })
        .collect()
}

/// Least-squares line `y = intercept + slope·x` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// `None` for fewer than two points or constant `x`. Constant `y` fits exactly (`R² = 1`).
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        intercept,
        slope,
        r_squared,
    })
}
