//! Closed-form outage and average-SNR analytics for the fixed-gain AF link.
//!
//! With `x = 2T·sqrt(s·η2/(μ1·μ2·Pt·Pr))` the subcarrier outage probability is
//! `Φ(s) = 1 − exp(−s·T·η1/(μ1·Pt))·x·K1(x)` and the block outage is
//! `P_o(s) = 1 − (1 − Φ(s))^T`, independent of `N` and of the activation
//! pattern.

use serde::{Deserialize, Serialize};

use crate::allocation::PowerAllocation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specfun::{e2_rational_gap, expx_e2, one_minus_x_times_k1};
use crate::sysmodel::{snr_end_to_end, SystemParams};

/// Outage SNR threshold `s` (linear) and outage-probability ceiling `Ψ_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityTarget<F> {
    pub s: F,
    pub psi_th: F,
}

impl<F: Scalar> ReliabilityTarget<F> {
    pub fn new(s: F, psi_th: F) -> Result<Self> {
        let t = ReliabilityTarget { s, psi_th };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > F::zero() && self.s.is_finite()) {
            return Err(Error::param("s", format!("must be finite and > 0, got {}", self.s)));
        }
        if !(self.psi_th > F::zero() && self.psi_th < F::one()) {
            return Err(Error::param("psi_th", format!("must lie in (0, 1), got {}", self.psi_th)));
        }
        Ok(())
    }
}

/// The pair `a = 2T·sqrt(η2/(Pt·Pr·μ1·μ2))`, `b = T·η1/(Pt·μ1)` that
/// parameterises both the outage and the mean-SNR expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixAParams<F> {
    pub a: F,
    pub b: F,
}

impl<F: Scalar> AppendixAParams<F> {
    pub fn new(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> Result<Self> {
        alloc.require_positive("AppendixAParams")?;
        let t = params.t_f();
        Ok(AppendixAParams {
            a: F::lit(2.0) * t * (params.eta2 / (alloc.pt * alloc.pr * params.mu1 * params.mu2)).sqrt(),
            b: t * params.eta1 / (alloc.pt * params.mu1),
        })
    }
}

fn check_threshold<F: Scalar>(function: &'static str, s: F) -> Result<()> {
    if s >= F::zero() && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, s.to_f64_lossy(), "finite and >= 0"))
    }
}

/// `ln(1 − Φ(s))`, i.e. `−b·s + ln(x·K1(x))` with `x = a·sqrt(s)`.
fn log_subcarrier_survival<F: Scalar>(ab: &AppendixAParams<F>, s: F) -> F {
    let x = ab.a * s.sqrt();
    -ab.b * s + (-one_minus_x_times_k1(x)).ln_1p()
}

/// Subcarrier-wise outage probability `Φ(s) = P{γ < s}`.
pub fn phi_subcarrier<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>, s: F) -> Result<F> {
    check_threshold("phi_subcarrier", s)?;
    let ab = AppendixAParams::new(params, alloc)?;
    let phi = -log_subcarrier_survival(&ab, s).exp_m1();
    Ok(phi.max(F::zero()).min(F::one()))
}

/// Block outage probability `P_o(s) = 1 − (1 − Φ(s))^T`.
pub fn outage_block<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>, s: F) -> Result<F> {
    check_threshold("outage_block", s)?;
    let ab = AppendixAParams::new(params, alloc)?;
    let po = -(params.t_f() * log_subcarrier_survival(&ab, s)).exp_m1();
    Ok(po.max(F::zero()).min(F::one()))
}

/// Block outage from a subcarrier outage value: `1 − (1 − Φ)^T`.
pub fn block_from_subcarrier<F: Scalar>(phi: F, t: usize) -> F {
    -(F::from_count(t) * (-phi).ln_1p()).exp_m1()
}

/// Mean end-to-end SNR per active subcarrier,
///
/// `E{γ} = μ1·Pt/(T·η1) · (1 − c·e^c·E1(c))`, `c = T·η2/(η1·μ2·Pr)`,
///
/// i.e. `μ1·Pt/(T·η1) + μ1·η2·Pt/(μ2·η1²·Pr) · e^c·Ei(−c)`.
pub fn expected_snr<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> Result<F> {
    alloc.require_positive("expected_snr")?;
    let t = params.t_f();
    let scale = params.mu1 * alloc.pt / (t * params.eta1);
    let c = t * params.eta2 / (params.eta1 * params.mu2 * alloc.pr);
    Ok(scale * expx_e2(c))
}

/// Mean-gain indicator `γ̃ = Pt·Pr·μ1·μ2 / (T·Pr·μ2·η1 + T²·η2)`: the SNR
/// expression evaluated at the average channel gains.
pub fn surrogate_snr<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> F {
    snr_end_to_end(params, alloc, params.mu1, params.mu2)
}

/// Average-SNR target equivalent to the outage constraint,
/// `γ_th = s·T / ln(1/(1 − Ψ_th))`.
pub fn gamma_threshold<F: Scalar>(params: &SystemParams<F>, target: &ReliabilityTarget<F>) -> F {
    target.s * params.t_f() / -(-target.psi_th).ln_1p()
}

/// Upper bound on the Jensen gap `|E{γ} − γ̃|`:
///
/// `Pt·Pr²·T·η1·μ1·μ2² / (T·Pr·η1·μ2 + T²·η2)²`.
pub fn jensen_gap_bound<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> F {
    let t = params.t_f();
    let (pt, pr) = (alloc.pt, alloc.pr);
    let den = t * pr * params.eta1 * params.mu2 + t * t * params.eta2;
    pt * pr * pr * t * params.eta1 * params.mu1 * params.mu2 * params.mu2 / (den * den)
}

/// Exact Jensen gap `γ̃ − E{γ}` (non-negative; the SNR is concave in `G2`).
/// Zero when either power is zero.
pub fn jensen_gap_exact<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>) -> F {
    if !(alloc.pt > F::zero() && alloc.pr > F::zero()) {
        return F::zero();
    }
    let t = params.t_f();
    let scale = params.mu1 * alloc.pt / (t * params.eta1);
    let c = t * params.eta2 / (params.eta1 * params.mu2 * alloc.pr);
    (scale * e2_rational_gap(c)).max(F::zero())
}

/// Small-`a·sqrt(s)` approximation of the block outage, `1 − e^{−b·s·T}`.
pub fn outage_asymptotic<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>, s: F) -> Result<F> {
    check_threshold("outage_asymptotic", s)?;
    let ab = AppendixAParams::new(params, alloc)?;
    Ok(-(-ab.b * s * params.t_f()).exp_m1())
}
