//! Closed-form perturbation bounds and the exact finite-state verifier.
//!
//! Every formula refuses to evaluate outside its hypotheses and returns
//! [`Inapplicable`] instead; no value is ever clamped into range.

mod report;
mod verify;

pub use report::{PerturbationReport, ReportRow, Theorem};
pub use verify::{verify_on_finite, FiniteInstance, KappaMode, VerifyOptions};

use std::f64::consts::E;

use crate::error::{invalid, Inapplicable, Result};

/// Rounding slack allowed when checking `p0(V) >= 1`.
const MOMENT_TOL: f64 = 1e-9;

/// `x^n` by repeated squaring.
pub fn pow_n(x: f64, mut n: u64) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Constants shared by the Wasserstein and V-norm bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub c: f64,
    pub rho: f64,
    pub delta: f64,
    pub l: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub n: u64,
    /// Initial distance between the two chains.
    pub w0: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        check_delta(self.delta)?;
        for (name, v) in [("C", self.c), ("L", self.l), ("gamma", self.gamma), ("w0", self.w0)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        if !(self.kappa >= 1.0) {
            return Err(invalid(format!("kappa = {} must be at least 1", self.kappa)));
        }
        Ok(())
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("rho = {rho} must lie in [0, 1)")));
    }
    Ok(())
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} = {v} must be finite and nonnegative")));
    }
    Ok(())
}

/// `p0(V)` is at least 1 since `V >= 1`; a summation that lands just
/// below is rounded up.
pub(crate) fn check_moment(p0_v: f64) -> Result<f64> {
    if !(p0_v >= 1.0 - MOMENT_TOL) {
        return Err(invalid(format!("p0(V) = {p0_v} must be at least 1")));
    }
    Ok(p0_v.max(1.0))
}

/// `max{p0(V), L / (1 - delta)}`.
pub fn kappa(p0_v: f64, l: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonneg("L", l)?;
    Ok(check_moment(p0_v)?.max(l / (1.0 - delta)))
}

/// `C (rho^n w0 + (1 - rho^n) gamma kappa / (1 - rho))`.
pub fn thm31_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let rn = pow_n(inp.rho, inp.n);
    Ok(inp.c * (rn * inp.w0 + (1.0 - rn) * inp.gamma * inp.kappa / (1.0 - inp.rho)))
}

/// Limit `n -> infinity` of [`thm31_bound`].
pub fn thm31_limit(c: f64, rho: f64, gamma: f64, kappa: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(c * gamma * kappa / (1.0 - rho))
}

/// Distance between the stationary laws:
/// `gamma C / (1 - rho) * L / (1 - delta)`.
pub fn stationary_wasserstein_bound(c: f64, rho: f64, gamma: f64, l: f64, delta: f64) -> Result<f64> {
    check_rho(rho)?;
    check_delta(delta)?;
    check_nonneg("C", c)?;
    check_nonneg("gamma", gamma)?;
    check_nonneg("L", l)?;
    Ok(gamma * c / (1.0 - rho) * l / (1.0 - delta))
}

/// V-norm bound when the drift condition is only known for the ideal
/// kernel; the perturbed kernel inherits it with rate `delta + gamma`.
#[allow(clippy::too_many_arguments)]
pub fn geom2_bound(c: f64, rho: f64, n: u64, w0: f64, gamma: f64, delta: f64, l: f64, p0_v: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonneg("gamma", gamma)?;
    if gamma + delta >= 1.0 {
        return Err(Inapplicable::new("geom2", format!("gamma + delta = {} must be below 1", gamma + delta)).into());
    }
    let kappa = geom2_kappa(p0_v, l, delta, gamma)?;
    thm31_bound(&BoundInputs {
        c,
        rho,
        delta,
        l,
        gamma,
        kappa,
        n,
        w0,
    })
}

pub(crate) fn geom2_kappa(p0_v: f64, l: f64, delta: f64, gamma: f64) -> Result<f64> {
    check_nonneg("L", l)?;
    Ok(check_moment(p0_v)?.max(l / (1.0 - delta - gamma)))
}

fn check_gamma_tv(bound: &'static str, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < (-1.0f64).exp()) {
        return Err(Inapplicable::new(bound, format!("gamma = {gamma} must lie in (0, 1/e)")).into());
    }
    Ok(())
}

/// `(2C(L+1))^(1/ln(1/gamma)) * e * gamma * ln(1/gamma)`, the common
/// factor of the total-variation bounds.
fn geom3_factor(c: f64, l: f64, gamma: f64) -> f64 {
    let lg = (1.0 / gamma).ln();
    (2.0 * c * (l + 1.0)).powf(1.0 / lg) * E * gamma * lg
}

/// Total-variation bound from a V-norm contraction and a total-variation
/// kernel difference.
#[allow(clippy::too_many_arguments)]
pub fn geom3_bound(
    c: f64,
    rho: f64,
    n: u64,
    w0_vnorm: f64,
    gamma_tv: f64,
    delta: f64,
    l: f64,
    kappa: f64,
) -> Result<f64> {
    check_gamma_tv("geom3", gamma_tv)?;
    check_rho(rho)?;
    check_delta(delta)?;
    check_nonneg("C", c)?;
    check_nonneg("L", l)?;
    check_nonneg("w0", w0_vnorm)?;
    if !(kappa >= 1.0) {
        return Err(invalid(format!("kappa = {kappa} must be at least 1")));
    }
    Ok(c * pow_n(rho, n) * w0_vnorm + kappa / (1.0 - rho) * geom3_factor(c, l, gamma_tv))
}

/// Total-variation distance of the stationary laws under the hypotheses
/// of [`geom3_bound`].
pub fn geom3_stationary_bound(c: f64, rho: f64, gamma_tv: f64, delta: f64, l: f64) -> Result<f64> {
    check_gamma_tv("geom3 stationary", gamma_tv)?;
    check_rho(rho)?;
    check_delta(delta)?;
    check_nonneg("C", c)?;
    check_nonneg("L", l)?;
    Ok(l / ((1.0 - delta) * (1.0 - rho)) * geom3_factor(c, l, gamma_tv))
}

/// Rate bound when `gamma <= K ln(N) / N`; `base` is `2C(L+1)`.
pub fn geom4_bound(c: f64, rho: f64, kappa: f64, base: f64, k: f64, n: f64) -> Result<f64> {
    check_rho(rho)?;
    check_nonneg("C", c)?;
    if !(k >= 1.0) {
        return Err(invalid(format!("K = {k} must be at least 1")));
    }
    if !(base > 0.0) {
        return Err(invalid(format!("base = {base} must be positive")));
    }
    let threshold = 6.0 * k.powf(1.5);
    if !(n > threshold) {
        return Err(Inapplicable::new("geom4", format!("N = {n} must exceed 6 K^(3/2) = {threshold}")).into());
    }
    let ln_n = n.ln();
    Ok(3.0 * kappa * base.powf(2.0 / ln_n) / (1.0 - rho) * k * ln_n * ln_n / n)
}
