//! Special functions behind the closed-form outage and mean-SNR expressions.
//!
//! * `K1` (modified Bessel function of the second kind, order one): power
//!   series up to [`K1_SERIES_MAX`], Steed's continued fraction up to
//!   [`K1_ASYMPTOTIC_MIN`], Hankel asymptotic expansion beyond.
//! * `e^c·E1(c)` (scaled exponential integral): power series up to
//!   [`E1_SERIES_MAX`], continued fraction (modified Lentz) beyond.
//!
//! Each regime is accurate to about `1e-14` relative in `f64`; crossovers were
//! picked where the series starts losing digits to cancellation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Upper end of the small-argument series regime for `K1`.
pub const K1_SERIES_MAX: f64 = 2.0;
/// Lower end of the asymptotic regime for `K1`.
pub const K1_ASYMPTOTIC_MIN: f64 = 25.0;
/// Upper end of the power-series regime for `E1`.
pub const E1_SERIES_MAX: f64 = 1.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
const MAX_TERMS: usize = 500;

/// Relative accuracy contract of a special-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnAccuracy {
    max_rel_error: f64,
}

impl FnAccuracy {
    /// Accuracy shipped for `f64` evaluation on the tested domains.
    pub const DOUBLE: FnAccuracy = FnAccuracy {
        max_rel_error: 1e-10,
    };

    pub fn new(max_rel_error: f64) -> Result<Self> {
        if !(max_rel_error > 0.0 && max_rel_error <= 1e-8) {
            return Err(Error::param("max_rel_error", "must lie in (0, 1e-8]"));
        }
        Ok(FnAccuracy { max_rel_error })
    }

    pub fn max_rel_error(&self) -> f64 {
        self.max_rel_error
    }

    /// Whether `got` agrees with `reference` to the contracted relative error.
    pub fn accepts(&self, got: f64, reference: f64) -> bool {
        if reference == 0.0 {
            return got == 0.0;
        }
        ((got - reference) / reference).abs() <= self.max_rel_error
    }
}

fn check_positive<F: Scalar>(function: &'static str, x: F) -> Result<()> {
    if x.is_finite() && x > F::zero() {
        Ok(())
    } else {
        Err(Error::domain(function, x.to_f64_lossy(), "finite and > 0"))
    }
}

/// Modified Bessel function of the second kind of order one, `K1(x)`.
///
/// Underflows to zero once `e^{-x}` leaves the representable range.
pub fn bessel_k1<F: Scalar>(x: F) -> Result<F> {
    check_positive("bessel_k1", x)?;
    if x <= F::lit(K1_SERIES_MAX) {
        Ok((F::one() - one_minus_x_k1_series(x)) / x)
    } else {
        Ok(scaled_k1(x) * (-x).exp())
    }
}

/// `x·K1(x)`, finite down to `x = 0` where it equals one.
///
/// Decreases monotonically from 1 towards 0 on `[0, ∞)`.
pub fn x_times_k1<F: Scalar>(x: F) -> Result<F> {
    if !(x.is_finite() && x >= F::zero()) {
        return Err(Error::domain(
            "x_times_k1",
            x.to_f64_lossy(),
            "finite and >= 0",
        ));
    }
    if x == F::zero() {
        return Ok(F::one());
    }
    if x <= F::lit(K1_SERIES_MAX) {
        Ok(F::one() - one_minus_x_k1_series(x))
    } else {
        Ok(x * scaled_k1(x) * (-x).exp())
    }
}

/// `1 − x·K1(x)` without the cancellation of forming the product first.
///
/// Used by the outage formulas, whose small-outage regime sits at small `x`.
pub(crate) fn one_minus_x_times_k1<F: Scalar>(x: F) -> F {
    debug_assert!(x >= F::zero());
    if x == F::zero() {
        F::zero()
    } else if x <= F::lit(K1_SERIES_MAX) {
        one_minus_x_k1_series(x)
    } else {
        F::one() - x * scaled_k1(x) * (-x).exp()
    }
}

/// Series part of `K1` for `0 < x <= 2`:
///
/// `x·K1(x) = 1 − y·(S2 − 2 ln(x/2)·S1)`, `y = x²/4`, with
/// `S1 = Σ y^k/(k!(k+1)!)` and `S2 = Σ (ψ(k+1)+ψ(k+2))·y^k/(k!(k+1)!)`.
/// Returns the bracketed complement `1 − x·K1(x)`.
fn one_minus_x_k1_series<F: Scalar>(x: F) -> F {
    let y = x * x / F::lit(4.0);
    let two_gamma = F::lit(2.0 * EULER_GAMMA);
    let mut term = F::one();
    // harmonic numbers H_k and H_{k+1}
    let mut h_k = F::zero();
    let mut h_k1 = F::one();
    let mut s1 = term;
    let mut s2 = (h_k + h_k1 - two_gamma) * term;
    for k in 0..MAX_TERMS {
        let kf = F::from_count(k);
        term = term * y / ((kf + F::one()) * (kf + F::lit(2.0)));
        h_k = h_k1;
        h_k1 = h_k1 + F::one() / (kf + F::lit(2.0));
        s1 = s1 + term;
        let d2 = (h_k + h_k1 - two_gamma) * term;
        s2 = s2 + d2;
        if d2.abs() <= F::epsilon() * s2.abs() && term <= F::epsilon() * s1 {
            break;
        }
    }
    y * (s2 - F::lit(2.0) * (x / F::lit(2.0)).ln() * s1)
}

/// `e^x·K1(x)` for `x > 2`.
fn scaled_k1<F: Scalar>(x: F) -> F {
    if x >= F::lit(K1_ASYMPTOTIC_MIN) {
        scaled_k1_asymptotic(x)
    } else {
        scaled_k1_steed(x)
    }
}

/// Steed's continued fraction for `K0` and `K1` (Thompson–Barnett form, order zero).
fn scaled_k1_steed<F: Scalar>(x: F) -> F {
    let two = F::lit(2.0);
    let a1 = F::lit(0.25);
    let mut b = two * (F::one() + x);
    let mut d = F::one() / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = F::zero();
    let mut q2 = F::one();
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = F::one() + q * delh;
    for i in 2..MAX_TERMS {
        let fi = F::from_count(i);
        a = a - two * (fi - F::one());
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = F::one() / (b + a * d);
        delh = (b * d - F::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < F::epsilon() {
            break;
        }
    }
    h = a1 * h;
    let scaled_k0 = (F::PI() / (two * x)).sqrt() / s;
    scaled_k0 * (x + F::lit(0.5) - h) / x
}

/// Hankel expansion `e^x·K1(x) ~ sqrt(π/2x)·Σ a_k/x^k`,
/// `a_k = a_{k-1}·(4 − (2k−1)²)/(8k)`.
fn scaled_k1_asymptotic<F: Scalar>(x: F) -> F {
    let mut term = F::one();
    let mut sum = F::one();
    for k in 1..60 {
        let kf = F::from_count(k);
        let odd = F::lit(2.0) * kf - F::one();
        let next = term * (F::lit(4.0) - odd * odd) / (F::lit(8.0) * kf * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= F::epsilon() * sum.abs() {
            break;
        }
    }
    (F::FRAC_PI_2() / x).sqrt() * sum
}

/// Scaled exponential integral `e^c·E1(c) = −e^c·Ei(−c)`.
///
/// Strictly decreasing; bracketed by `½·ln(1 + 2/c) < e^c·E1(c) < ln(1 + 1/c)`.
pub fn expx_e1<F: Scalar>(c: F) -> Result<F> {
    check_positive("expx_e1", c)?;
    if c <= F::lit(E1_SERIES_MAX) {
        Ok(c.exp() * e1_series(c))
    } else {
        Ok(expx_en_continued_fraction(1, c))
    }
}

/// `e^c·E2(c) = 1 − c·e^c·E1(c)`, computed without the cancellation of the
/// right-hand side at large `c`.
pub(crate) fn expx_e2<F: Scalar>(c: F) -> F {
    debug_assert!(c > F::zero());
    if c <= F::lit(E1_SERIES_MAX) {
        F::one() - c * c.exp() * e1_series(c)
    } else {
        expx_en_continued_fraction(2, c)
    }
}

/// `E1(c) = −γ − ln c − Σ_{k≥1} (−c)^k / (k·k!)`.
fn e1_series<F: Scalar>(c: F) -> F {
    let mut sum = F::zero();
    // (−c)^k / k!
    let mut fact = F::one();
    for k in 1..MAX_TERMS {
        let kf = F::from_count(k);
        fact = -fact * c / kf;
        let del = fact / kf;
        sum = sum + del;
        if del.abs() < sum.abs() * F::epsilon() {
            break;
        }
    }
    -F::lit(EULER_GAMMA) - c.ln() - sum
}

/// `e^c·En(c) = 1/(c+n− n/(c+n+2− 2(n+1)/(c+n+4− …)))`, evaluated by modified Lentz.
fn expx_en_continued_fraction<F: Scalar>(order: usize, c: F) -> F {
    en_fraction_tail(order, c, 0)
}

/// Modified Lentz evaluation of the `e^c·E_n(c)` continued fraction with its
/// first `skip` levels removed:
/// `1/(c+n+2k + a_{k+1}/(c+n+2k+2 + ...))`, `a_i = −i·(n−1+i)`, `k = skip`.
fn en_fraction_tail<F: Scalar>(order: usize, c: F, skip: usize) -> F {
    let tiny = F::min_positive_value() / F::epsilon();
    let two = F::lit(2.0);
    let nf = F::from_count(order);
    let mut b = c + nf + two * F::from_count(skip);
    let mut cc = F::one() / tiny;
    let mut d = F::one() / b;
    let mut h = d;
    for i in skip + 1..skip + MAX_TERMS {
        let fi = F::from_count(i);
        let an = -fi * (nf - F::one() + fi);
        b = b + two;
        d = F::one() / (an * d + b);
        cc = b + an / cc;
        let del = cc * d;
        h = h * del;
        if (del - F::one()).abs() < F::epsilon() {
            break;
        }
    }
    h
}

/// `1/(1+c) − e^c·E2(c)`, which is `O(1/c²)` for large `c`. With
/// `e^c·E2(c) = 1/(c+2−q)` and `q = 2·tail`, the difference is
/// `(1−q) / ((1+c)(c+2−q))`.
pub(crate) fn e2_rational_gap<F: Scalar>(c: F) -> F {
    debug_assert!(c > F::zero());
    if c <= F::lit(E1_SERIES_MAX) {
        return F::one() / (F::one() + c) - expx_e2(c);
    }
    let q = F::lit(2.0) * en_fraction_tail(2, c, 1);
    (F::one() - q) / ((F::one() + c) * (c + F::lit(2.0) - q))
}
