//! Brute-force minimisation of `Pt + Pr` on a dBW grid under the exact
//! outage constraint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AllocationResult;
use crate::allocation::{PowerAllocation, Provenance};
use crate::error::{Error, Result};
use crate::outage::{outage_block, ReliabilityTarget};
use crate::scalar::{from_db, to_db, Scalar};
use crate::sysmodel::SystemParams;

/// Lower edge of the default search box, in dBW.
pub const DEFAULT_FLOOR_DBW: f64 = -50.0;

/// Refinement stages of [`OracleMode::Refined`]; each is 10x finer than the last.
const REFINE_STAGES: u32 = 3;
const REFINE_FACTOR: f64 = 10.0;
/// Half-width of a refinement window, in steps of the previous stage.
const REFINE_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Evaluate every point of the uniform grid.
    Naive,
    /// Coarse-to-fine: three nested grids, the last at the requested step.
    /// Each column's smallest feasible relay power is found by bisection on
    /// the grid, which is exact because the outage falls monotonically in `Pr`.
    Refined,
}

/// Rectangular search region in dBW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox<F> {
    pub pt_lo_dbw: F,
    pub pt_hi_dbw: F,
    pub pr_lo_dbw: F,
    pub pr_hi_dbw: F,
}

impl<F: Scalar> GridBox<F> {
    /// `[DEFAULT_FLOOR_DBW, P_max]` on both axes.
    pub fn for_params(params: &SystemParams<F>) -> Self {
        GridBox {
            pt_lo_dbw: F::lit(DEFAULT_FLOOR_DBW),
            pt_hi_dbw: to_db(params.pt_max),
            pr_lo_dbw: F::lit(DEFAULT_FLOOR_DBW),
            pr_hi_dbw: to_db(params.pr_max),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |lo: F, hi: F| lo.is_finite() && hi.is_finite() && hi >= lo;
        if !ok(self.pt_lo_dbw, self.pt_hi_dbw) || !ok(self.pr_lo_dbw, self.pr_hi_dbw) {
            return Err(Error::param("grid box", format!("{self:?} is empty or not finite")));
        }
        Ok(())
    }
}

/// Uniform axis `lo + i·step`, `i = 0..=last`.
#[derive(Debug, Clone, Copy)]
struct Axis<F> {
    lo: F,
    step: F,
    last: u64,
}

impl<F: Scalar> Axis<F> {
    fn new(lo: F, hi: F, step: F) -> Self {
        let span = ((hi - lo) / step * (F::one() + F::lit(1e-12))).floor();
        Axis {
            lo,
            step,
            last: span.to_u64().unwrap_or(0),
        }
    }

    fn at(&self, i: u64) -> F {
        self.lo + F::from_u64(i).expect("grid index") * self.step
    }

    fn len(&self) -> u64 {
        self.last + 1
    }

    /// Index range whose points lie within `[center − half, center + half]`.
    fn window(&self, center: F, half: F) -> (u64, u64) {
        let lo = ((center - half - self.lo) / self.step).ceil().max(F::zero());
        let hi = ((center + half - self.lo) / self.step).floor();
        let lo = lo.to_u64().unwrap_or(0).min(self.last);
        let hi = hi.to_u64().unwrap_or(0).min(self.last);
        (lo, hi.max(lo))
    }
}

/// Number of points of the uniform grid over `bx` at `step_dbw`.
pub fn grid_cardinality<F: Scalar>(bx: &GridBox<F>, step_dbw: F) -> u64 {
    let t = Axis::new(bx.pt_lo_dbw, bx.pt_hi_dbw, step_dbw);
    let r = Axis::new(bx.pr_lo_dbw, bx.pr_hi_dbw, step_dbw);
    t.len() * r.len()
}

#[derive(Debug, Clone, Copy)]
struct Candidate<F> {
    total: F,
    pt: F,
    pr: F,
    pt_dbw: F,
}

/// Smaller total wins; ties go to smaller `Pt`, then smaller `Pr`.
fn pick<F: Scalar>(a: Option<Candidate<F>>, b: Option<Candidate<F>>) -> Option<Candidate<F>> {
    match (a, b) {
        (Some(x), Some(y)) => {
            let key = |c: &Candidate<F>| (c.total, c.pt, c.pr);
            let (kx, ky) = (key(&x), key(&y));
            if kx.partial_cmp(&ky) == Some(std::cmp::Ordering::Greater) {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, None) => x,
        (None, y) => y,
    }
}

struct Problem<'a, F> {
    params: &'a SystemParams<F>,
    target: &'a ReliabilityTarget<F>,
}

impl<F: Scalar> Problem<'_, F> {
    fn feasible(&self, pt: F, pr: F) -> bool {
        outage_block(self.params, &PowerAllocation::manual(pt, pr), self.target.s)
            .map(|po| po <= self.target.psi_th)
            .unwrap_or(false)
    }

    fn candidate(pt_dbw: F, pr_dbw: F) -> Candidate<F> {
        let (pt, pr) = (from_db(pt_dbw), from_db(pr_dbw));
        Candidate {
            total: pt + pr,
            pt,
            pr,
            pt_dbw,
        }
    }

    /// Every point of the grid; returns the best point and the evaluation count.
    fn scan(&self, t_axis: &Axis<F>, r_axis: &Axis<F>) -> (Option<Candidate<F>>, u64) {
        (0..t_axis.len())
            .into_par_iter()
            .map(|i| {
                let pt_dbw = t_axis.at(i);
                let pt = from_db(pt_dbw);
                let mut best = None;
                for j in 0..r_axis.len() {
                    if self.feasible(pt, from_db(r_axis.at(j))) {
                        best = pick(best, Some(Self::candidate(pt_dbw, r_axis.at(j))));
                    }
                }
                (best, r_axis.len())
            })
            .reduce(|| (None, 0), |a, b| (pick(a.0, b.0), a.1 + b.1))
    }

    /// Columns `cols` of the grid, each reduced to its lowest feasible `Pr`.
    fn column_search(&self, t_axis: &Axis<F>, cols: (u64, u64), r_axis: &Axis<F>) -> (Option<Candidate<F>>, u64) {
        (cols.0..=cols.1)
            .into_par_iter()
            .map(|i| {
                let pt_dbw = t_axis.at(i);
                let pt = from_db(pt_dbw);
                let mut evals = 1;
                if !self.feasible(pt, from_db(r_axis.at(r_axis.last))) {
                    return (None, evals);
                }
                // invariant: hi feasible, lo infeasible unless lo == 0
                let (mut lo, mut hi) = (0u64, r_axis.last);
                evals += 1;
                if self.feasible(pt, from_db(r_axis.at(0))) {
                    hi = 0;
                }
                while hi > lo + 1 {
                    let mid = lo + (hi - lo) / 2;
                    evals += 1;
                    if self.feasible(pt, from_db(r_axis.at(mid))) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                (Some(Self::candidate(pt_dbw, r_axis.at(hi))), evals)
            })
            .reduce(|| (None, 0), |a, b| (pick(a.0, b.0), a.1 + b.1))
    }
}

/// [`oracle_grid_search_in`] over [`GridBox::for_params`].
pub fn oracle_grid_search<F: Scalar>(
    params: &SystemParams<F>,
    target: &ReliabilityTarget<F>,
    step_dbw: F,
    mode: OracleMode,
) -> Result<AllocationResult<F>> {
    oracle_grid_search_in(params, target, &GridBox::for_params(params), step_dbw, mode)
}

/// Minimises `Pt + Pr` over the dBW grid of `bx` at `step_dbw`, subject to
/// the exact block outage `P_o(s) <= Ψ_th`.
///
/// Fails with [`Error::Infeasible`] when the upper corner of the box already
/// violates the constraint (the outage is decreasing in both powers).
pub fn oracle_grid_search_in<F: Scalar>(
    params: &SystemParams<F>,
    target: &ReliabilityTarget<F>,
    bx: &GridBox<F>,
    step_dbw: F,
    mode: OracleMode,
) -> Result<AllocationResult<F>> {
    params.validate()?;
    target.validate()?;
    bx.validate()?;
    if !(step_dbw > F::zero() && step_dbw.is_finite()) {
        return Err(Error::param("step_dbw", format!("must be finite and > 0, got {step_dbw}")));
    }
    let problem = Problem { params, target };
    if !problem.feasible(from_db(bx.pt_hi_dbw), from_db(bx.pr_hi_dbw)) {
        return Err(Error::Infeasible);
    }

    let (best, evaluations, stages) = match mode {
        OracleMode::Naive => {
            let t_axis = Axis::new(bx.pt_lo_dbw, bx.pt_hi_dbw, step_dbw);
            let r_axis = Axis::new(bx.pr_lo_dbw, bx.pr_hi_dbw, step_dbw);
            let (best, evals) = problem.scan(&t_axis, &r_axis);
            (best, evals + 1, 1)
        }
        OracleMode::Refined => {
            let factor = F::lit(REFINE_FACTOR);
            let mut step = step_dbw * factor.powi(REFINE_STAGES as i32 - 1);
            let mut evals = 1u64;
            let mut best: Option<Candidate<F>> = None;
            for stage in 0..REFINE_STAGES {
                let t_axis = Axis::new(bx.pt_lo_dbw, bx.pt_hi_dbw, step);
                let r_axis = Axis::new(bx.pr_lo_dbw, bx.pr_hi_dbw, step);
                let cols = match best {
                    Some(c) if stage > 0 => t_axis.window(c.pt_dbw, F::lit(REFINE_HALF_WIDTH) * step * factor),
                    _ => (0, t_axis.last),
                };
                let (found, n) = problem.column_search(&t_axis, cols, &r_axis);
                evals += n;
                best = pick(best, found);
                step = step / factor;
            }
            (best, evals, REFINE_STAGES as usize)
        }
    };

    let best = best.ok_or(Error::Infeasible)?;
    let alloc = PowerAllocation::new(best.pt, best.pr, Provenance::Oracle);
    let mut result = AllocationResult::new(alloc, params, target);
    result.iterations = stages;
    result.evaluations = evaluations;
    result.feasible = true;
    Ok(result)
}
