//! Power allocation: the fixed-point KKT solver, a brute-force grid oracle,
//! an equal-power baseline and a complexity benchmark.
//!
//! The outage ceiling is mapped to an average-SNR target `γ_th` and the
//! problem is relaxed to
//!
//! ```text
//! minimise Pt + Pr   s.t.  γ̃(Pt, Pr) >= γ_th + δ,  0 <= Pt <= Pt_max,  0 <= Pr <= Pr_max
//! ```
//!
//! where `γ̃` is the SNR at mean channel gains and `δ` compensates the gap
//! between `γ̃` and the true mean SNR. The stationarity conditions have the
//! closed form implemented by [`kkt_closed_form`]; [`solve_proposed`]
//! iterates it to a fixed point in `δ`.

mod baseline;
mod bench;
mod oracle;

pub use baseline::{solve_baseline, BASELINE_REL_TOL};
pub use bench::{benchmark_complexity, fit_linear, BenchRow, LinearFit};
pub use oracle::{grid_cardinality, oracle_grid_search, oracle_grid_search_in, GridBox, OracleMode, DEFAULT_FLOOR_DBW};

use serde::{Deserialize, Serialize};

use crate::allocation::{PowerAllocation, Provenance};
use crate::error::{Error, Result};
use crate::outage::{gamma_threshold, jensen_gap_bound, jensen_gap_exact, outage_block, surrogate_snr, ReliabilityTarget};
use crate::scalar::Scalar;
use crate::sysmodel::SystemParams;

/// How the iteration estimates the gap `δ` between `γ̃` and `E{γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JensenGap {
    /// `δ = γ̃ − E{γ}` from the closed-form mean SNR.
    #[default]
    Exact,
    /// `δ` = the analytic upper bound of [`jensen_gap_bound`]. The bound is
    /// close to `γ̃` itself, so the iteration settles far above the optimum
    /// and converges slowly; kept for comparison.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<F> {
    /// Convergence tolerance on both powers, in watts.
    pub epsilon: F,
    pub max_iterations: usize,
    pub gap: JensenGap,
}

impl<F: Scalar> Default for SolverConfig<F> {
    fn default() -> Self {
        SolverConfig {
            epsilon: F::lit(1e-4),
            max_iterations: 10_000,
            gap: JensenGap::Exact,
        }
    }
}

impl<F: Scalar> SolverConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > F::zero() && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be finite and > 0, got {}", self.epsilon)));
        }
        if self.max_iterations < 1 {
            return Err(Error::param("max_iterations", "must be >= 1"));
        }
        Ok(())
    }
}

/// A power allocation with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult<F> {
    pub alloc: PowerAllocation<F>,
    /// Loop passes (proposed), refinement stages (oracle) or bisection steps (baseline).
    pub iterations: usize,
    /// Outage-formula evaluations spent.
    pub evaluations: u64,
    /// Final relaxed target `γ̃_th = γ_th + δ` (proposed only).
    pub gamma_tilde_th: Option<F>,
    /// Final gap correction `δ` (proposed only).
    pub delta: Option<F>,
    /// Lagrange multiplier of the SNR constraint (proposed only).
    pub rho: Option<F>,
    /// Exact block outage probability at the returned powers.
    pub achieved_outage: F,
    /// Proposed: the relaxed constraint holds inside the box. Oracle and
    /// baseline: the exact outage constraint holds.
    pub feasible: bool,
    pub converged: bool,
    pub total_power_w: F,
}

impl<F: Scalar> AllocationResult<F> {
    pub(crate) fn new(alloc: PowerAllocation<F>, params: &SystemParams<F>, target: &ReliabilityTarget<F>) -> Self {
        AllocationResult {
            alloc,
            iterations: 0,
            evaluations: 0,
            gamma_tilde_th: None,
            delta: None,
            rho: None,
            achieved_outage: achieved_outage(params, &alloc, target.s),
            feasible: false,
            converged: true,
            total_power_w: alloc.total(),
        }
    }
}

fn achieved_outage<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>, s: F) -> F {
    outage_block(params, alloc, s).unwrap_or_else(|_| F::one())
}

/// `[x]` clipped to `[lower, upper]`; `x >= upper` maps to `upper`.
pub fn clamp<F: Scalar>(x: F, lower: F, upper: F) -> Result<F> {
    if !(upper > lower) {
        return Err(Error::param("clamp", format!("upper {upper} must exceed lower {lower}")));
    }
    Ok(if x >= upper {
        upper
    } else if x >= lower {
        x
    } else {
        lower
    })
}

/// Stationary point of the relaxed Lagrangian for target `γ̃_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktPoint<F> {
    pub pt: F,
    pub pr: F,
    pub rho: F,
}

/// Unclamped KKT solution:
///
/// ```text
/// ρ  = (T/μ1)·(η1 + sqrt(μ1·η2/(μ2·γ̃_th)))
/// Pt = ρ·T²·μ1·η2 / (μ2·(ρ·μ1 − T·η1)²)
/// Pr = T²·η2 / (μ2·(ρ·μ1 − T·η1))
/// ```
///
/// `ρ·μ1 − T·η1 = T·sqrt(μ1·η2/(μ2·γ̃_th)) > 0`, so both powers are positive
/// and `γ̃(Pt, Pr) = γ̃_th`.
pub fn kkt_unclamped<F: Scalar>(params: &SystemParams<F>, gamma_tilde_th: F) -> Result<KktPoint<F>> {
    if !(gamma_tilde_th > F::zero() && gamma_tilde_th.is_finite()) {
        return Err(Error::domain(
            "kkt_closed_form",
            gamma_tilde_th.to_f64_lossy(),
            "finite and > 0",
        ));
    }
    let t = params.t_f();
    let root = (params.mu1 * params.eta2 / (params.mu2 * gamma_tilde_th)).sqrt();
    let rho = t / params.mu1 * (params.eta1 + root);
    // ρ·μ1 − T·η1, formed without cancellation
    let margin = t * root;
    let pt = rho * t * t * params.mu1 * params.eta2 / (params.mu2 * margin * margin);
    let pr = t * t * params.eta2 / (params.mu2 * margin);
    Ok(KktPoint { pt, pr, rho })
}

/// [`kkt_unclamped`] with each power clipped to its box.
pub fn kkt_closed_form<F: Scalar>(params: &SystemParams<F>, gamma_tilde_th: F) -> Result<KktPoint<F>> {
    let k = kkt_unclamped(params, gamma_tilde_th)?;
    Ok(KktPoint {
        pt: clamp(k.pt, F::zero(), params.pt_max)?,
        pr: clamp(k.pr, F::zero(), params.pr_max)?,
        rho: k.rho,
    })
}

/// `∂γ̃/∂Pt + ∂γ̃/∂Pr`.
fn surrogate_slope<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> F {
    let t = params.t_f();
    let den = t * alloc.pr * params.mu2 * params.eta1 + t * t * params.eta2;
    let d_pt = params.mu1 * params.mu2 * alloc.pr / den;
    let d_pr = alloc.pt * params.mu1 * params.mu2 * t * t * params.eta2 / (den * den);
    d_pt + d_pr
}

/// Fixed-point iteration on the relaxed problem.
///
/// Starts from `Pt = Pr = 0`; each pass sets `γ̃_th = γ_th + δ(Pt, Pr)` and
/// moves to the clamped KKT point, stopping once both powers move by less
/// than `cfg.epsilon`. Running out of iterations is reported through
/// `converged`; a KKT point cut by the power box through `feasible`.
pub fn solve_proposed<F: Scalar>(
    params: &SystemParams<F>,
    target: &ReliabilityTarget<F>,
    cfg: &SolverConfig<F>,
) -> Result<AllocationResult<F>> {
    params.validate()?;
    target.validate()?;
    cfg.validate()?;

    let gamma_th = gamma_threshold(params, target);
    let gap = |pt: F, pr: F| {
        let a = PowerAllocation::manual(pt, pr);
        match cfg.gap {
            JensenGap::Exact => jensen_gap_exact(params, &a),
            JensenGap::Bound => jensen_gap_bound(params, &a),
        }
    };

    let (mut pt, mut pr) = (F::zero(), F::zero());
    let mut converged = false;
    let mut iterations = 0;
    let mut last = (gamma_th, F::zero(), F::zero());
    for it in 1..=cfg.max_iterations {
        iterations = it;
        let delta = gap(pt, pr);
        let gamma_tilde_th = gamma_th + delta;
        let k = kkt_closed_form(params, gamma_tilde_th)?;
        last = (gamma_tilde_th, delta, k.rho);
        if (pt - k.pt).abs() < cfg.epsilon && (pr - k.pr).abs() < cfg.epsilon {
            converged = true;
            break;
        }
        pt = k.pt;
        pr = k.pr;
    }

    let (gamma_tilde_th, delta, rho) = last;
    let alloc = PowerAllocation::new(pt, pr, Provenance::Proposed);
    let slack = F::lit(2.0) * cfg.epsilon * surrogate_slope(params, &alloc)
        + F::lit(64.0) * F::epsilon() * gamma_tilde_th;
    let mut result = AllocationResult::new(alloc, params, target);
    result.iterations = iterations;
    result.evaluations = iterations as u64;
    result.gamma_tilde_th = Some(gamma_tilde_th);
    result.delta = Some(delta);
    result.rho = Some(rho);
    result.converged = converged;
    result.feasible = surrogate_snr(params, &alloc) >= gamma_tilde_th - slack;
    Ok(result)
}
