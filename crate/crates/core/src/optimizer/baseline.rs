use super::AllocationResult;
use crate::allocation::{PowerAllocation, Provenance};
use crate::error::Result;
use crate::outage::{outage_block, ReliabilityTarget};
use crate::scalar::Scalar;
use crate::sysmodel::SystemParams;

/// Relative width at which the power bisection stops.
pub const BASELINE_REL_TOL: f64 = 1e-12;

/// Equal-power allocation: `Pt = Pr = P` with the smallest `P` meeting the
/// exact outage ceiling, found by bisection on `ln P`.
///
/// If even `P = min(Pt_max, Pr_max)` violates the ceiling, that corner is
/// returned with `feasible = false`.
pub fn solve_baseline<F: Scalar>(params: &SystemParams<F>, target: &ReliabilityTarget<F>) -> Result<AllocationResult<F>> {
    params.validate()?;
    target.validate()?;
    let outage = |p: F| outage_block(params, &PowerAllocation::manual(p, p), target.s).unwrap_or_else(|_| F::one());
    let cap = params.pt_max.min(params.pr_max);
    let mut evaluations = 1u64;

    let finish = |p: F, feasible: bool, iterations: usize, evaluations: u64| {
        let alloc = PowerAllocation::new(p, p, Provenance::Baseline);
        let mut r = AllocationResult::new(alloc, params, target);
        r.iterations = iterations;
        r.evaluations = evaluations;
        r.feasible = feasible;
        r
    };

    if outage(cap) > target.psi_th {
        return Ok(finish(cap, false, 0, evaluations));
    }

    // bracket: hi feasible, lo infeasible
    let mut hi = cap;
    let mut lo = cap;
    loop {
        lo = lo * F::lit(1e-3);
        evaluations += 1;
        if lo < F::min_positive_value() {
            return Ok(finish(F::min_positive_value(), true, 0, evaluations));
        }
        if outage(lo) > target.psi_th {
            break;
        }
        hi = lo;
    }
    let mut iterations = 0;
    while hi / lo - F::one() > F::lit(BASELINE_REL_TOL) && iterations < 200 {
        let mid = (lo * hi).sqrt();
        evaluations += 1;
        iterations += 1;
        if outage(mid) <= target.psi_th {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(finish(hi, true, iterations, evaluations))
}
