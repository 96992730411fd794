use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sysmodel::SystemParams;

/// Which procedure produced a power pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Proposed,
    Oracle,
    Baseline,
    /// Supplied directly, e.g. an evaluation point for validation runs.
    Manual,
}

/// Source and relay transmit powers, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation<F> {
    pub pt: F,
    pub pr: F,
    pub provenance: Provenance,
}

impl<F: Scalar> PowerAllocation<F> {
    pub fn new(pt: F, pr: F, provenance: Provenance) -> Self {
        PowerAllocation { pt, pr, provenance }
    }

    pub fn manual(pt: F, pr: F) -> Self {
        Self::new(pt, pr, Provenance::Manual)
    }

    pub fn total(&self) -> F {
        self.pt + self.pr
    }

    /// Checks `0 <= pt <= pt_max` and `0 <= pr <= pr_max`.
    pub fn validate(&self, params: &SystemParams<F>) -> Result<()> {
        if !(self.pt >= F::zero() && self.pt <= params.pt_max) {
            return Err(Error::param("pt", format!("{} outside [0, {}]", self.pt, params.pt_max)));
        }
        if !(self.pr >= F::zero() && self.pr <= params.pr_max) {
            return Err(Error::param("pr", format!("{} outside [0, {}]", self.pr, params.pr_max)));
        }
        Ok(())
    }

    pub(crate) fn require_positive(&self, function: &'static str) -> Result<()> {
        if !(self.pt > F::zero() && self.pt.is_finite()) {
            return Err(Error::domain(function, self.pt.to_f64_lossy(), "pt finite and > 0"));
        }
        if !(self.pr > F::zero() && self.pr.is_finite()) {
            return Err(Error::domain(function, self.pr.to_f64_lossy(), "pr finite and > 0"));
        }
        Ok(())
    }
}
