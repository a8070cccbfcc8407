//! Exact and approximate Metropolis-Hastings: steppers, the acceptance
//! perturbation constants and the resulting bounds.
//!
//! Continuous problems live on the real line with compactly supported
//! proposals; [`finite`] has the exact counterparts on finite spaces.

pub mod finite;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{check_delta, check_moment, check_rho, pow_n, PerturbationReport, Theorem};
use crate::error::{invalid, Error, Inapplicable, Result};
use crate::otcore::empirical_w1_1d;
use crate::quadrature::integrate;
use crate::rng::{stream_rng, StreamRng};
use crate::stats::{batch_se, batches};

/// Largest value accepted from a proposal integral before it is treated
/// as divergent.
const OVERFLOW_GUARD: f64 = 1e300;
const REPORT_BATCHES: usize = 20;

/// A Metropolis-Hastings problem on the real line.
pub trait MhProblem: Send + Sync {
    /// `log r(x, y)`; `-inf` when `y` is outside the target's support.
    fn log_ratio(&self, x: f64, y: f64) -> f64;
    fn propose(&self, x: f64, rng: &mut StreamRng) -> f64;
    /// Density of `Q(x, .)` at `y`.
    fn proposal_density(&self, x: f64, y: f64) -> f64;
    /// Compact interval carrying `Q(x, .)`.
    fn proposal_support(&self, x: f64) -> (f64, f64);
    /// Points where `y -> alpha(x, y)` is not smooth.
    fn kinks(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `min{1, r(x, y)}`.
    fn acceptance(&self, x: f64, y: f64) -> f64 {
        let lr = self.log_ratio(x, y);
        if lr >= 0.0 {
            1.0
        } else {
            lr.exp()
        }
    }
}

/// Target density `exp(-x)` on `[0, inf)` with the uniform random-walk
/// proposal on `[x - width, x + width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialTarget {
    pub width: f64,
}

impl ExponentialTarget {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid(format!("proposal width {width} must be positive")));
        }
        Ok(Self { width })
    }
}

impl MhProblem for ExponentialTarget {
    fn log_ratio(&self, x: f64, y: f64) -> f64 {
        if y < 0.0 {
            f64::NEG_INFINITY
        } else {
            x - y
        }
    }

    fn propose(&self, x: f64, rng: &mut StreamRng) -> f64 {
        x + self.width * (2.0 * rng.random::<f64>() - 1.0)
    }

    fn proposal_density(&self, x: f64, y: f64) -> f64 {
        if (y - x).abs() <= self.width {
            0.5 / self.width
        } else {
            0.0
        }
    }

    fn proposal_support(&self, x: f64) -> (f64, f64) {
        (x - self.width, x + self.width)
    }

    fn kinks(&self, x: f64) -> Vec<f64> {
        vec![0.0, x]
    }
}

pub type RatioSampler = Arc<dyn Fn(f64, f64, f64, &mut StreamRng) -> f64 + Send + Sync>;
pub type SetPredicate = Arc<dyn Fn(f64) -> bool + Send + Sync>;

/// How the approximate chain replaces the acceptance probability.
#[derive(Clone, Default)]
pub enum Perturbation {
    #[default]
    None,
    /// `alpha_t = clip(alpha + U, 0, 1)` with `U ~ Unif[-s, s]` drawn per step.
    UniformNoise { s: f64 },
    /// Accept iff `u < R` with `R ~ sampler(x, y, u)`; `bound` is a known
    /// uniform bound on `|alpha - alpha_t|`, if any.
    RandomizedRatio { sampler: RatioSampler, bound: Option<f64> },
    /// `alpha_t = min{1, alpha + 1{x in set}}`: every proposal from the set
    /// is accepted.
    IndicatorSet { set: SetPredicate },
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::None => write!(f, "None"),
            Perturbation::UniformNoise { s } => write!(f, "UniformNoise({s})"),
            Perturbation::RandomizedRatio { bound, .. } => write!(f, "RandomizedRatio(bound = {bound:?})"),
            Perturbation::IndicatorSet { .. } => write!(f, "IndicatorSet"),
        }
    }
}

impl Perturbation {
    pub fn uniform_noise(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid(format!("noise level s = {s} must lie in [0, 1]")));
        }
        Ok(Perturbation::UniformNoise { s })
    }

    /// A uniform bound `s >= |alpha - alpha_t|`, when one is known.
    pub fn uniform_bound(&self) -> Option<f64> {
        match self {
            Perturbation::None => Some(0.0),
            Perturbation::UniformNoise { s } => Some(*s),
            Perturbation::RandomizedRatio { bound, .. } => *bound,
            Perturbation::IndicatorSet { .. } => Some(1.0),
        }
    }
}

/// `E clip(a + U, 0, 1)` for `U ~ Unif[-s, s]`.
pub fn smoothed_acceptance(a: f64, s: f64) -> f64 {
    if s == 0.0 {
        return a.clamp(0.0, 1.0);
    }
    // Antiderivative of t -> clip(t, 0, 1).
    let g = |t: f64| {
        if t <= 0.0 {
            0.0
        } else if t <= 1.0 {
            0.5 * t * t
        } else {
            0.5 + (t - 1.0)
        }
    };
    ((g(a + s) - g(a - s)) / (2.0 * s)).clamp(0.0, 1.0)
}

/// Acceptance probability of the approximate chain, averaged over its
/// internal randomness; `None` when it has no closed form.
pub fn effective_acceptance(problem: &dyn MhProblem, pert: &Perturbation, x: f64, y: f64) -> Option<f64> {
    let a = problem.acceptance(x, y);
    match pert {
        Perturbation::None => Some(a),
        Perturbation::UniformNoise { s } => Some(smoothed_acceptance(a, *s)),
        Perturbation::RandomizedRatio { .. } => None,
        Perturbation::IndicatorSet { set } => Some(if set(x) { 1.0 } else { a }),
    }
}

/// `E(x, y) = |alpha(x, y) - alpha_t(x, y)|`, or the perturbation's uniform
/// bound when the acceptance has no closed form.
pub fn acceptance_error(problem: &dyn MhProblem, pert: &Perturbation, x: f64, y: f64) -> Result<f64> {
    match effective_acceptance(problem, pert, x, y) {
        Some(at) => Ok((problem.acceptance(x, y) - at).abs()),
        None => pert
            .uniform_bound()
            .ok_or_else(|| Error::Quadrature("randomized ratio without a known bound on |alpha - alpha_t|".into())),
    }
}

/// One transition with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhTransition {
    pub state: f64,
    pub proposal: f64,
    pub accepted: bool,
    pub alpha: f64,
    /// The threshold `u` was compared with.
    pub alpha_t: f64,
}

/// Exact step: accept `y ~ Q(x, .)` iff `u < r(x, y)`.
pub fn mh_step(problem: &dyn MhProblem, x: f64, rng: &mut StreamRng) -> f64 {
    approx_mh_transition(problem, &Perturbation::None, x, rng).state
}

/// Approximate step; consumes the same draws as [`mh_step`] (plus the
/// perturbation's own afterwards), so `s = 0` reproduces it exactly.
pub fn approx_mh_step(problem: &dyn MhProblem, pert: &Perturbation, x: f64, rng: &mut StreamRng) -> f64 {
    approx_mh_transition(problem, pert, x, rng).state
}

pub fn approx_mh_transition(problem: &dyn MhProblem, pert: &Perturbation, x: f64, rng: &mut StreamRng) -> MhTransition {
    let y = problem.propose(x, rng);
    let u: f64 = rng.random();
    let alpha = problem.acceptance(x, y);
    let alpha_t = match pert {
        Perturbation::None => alpha,
        Perturbation::UniformNoise { s } => {
            if *s == 0.0 {
                alpha
            } else {
                let noise = *s * (2.0 * rng.random::<f64>() - 1.0);
                (alpha + noise).clamp(0.0, 1.0)
            }
        }
        Perturbation::RandomizedRatio { sampler, .. } => sampler(x, y, u, rng).clamp(0.0, 1.0),
        Perturbation::IndicatorSet { set } => (alpha + if set(x) { 1.0 } else { 0.0 }).min(1.0),
    };
    debug_assert!((0.0..=1.0).contains(&alpha_t));
    let accepted = u < alpha_t;
    MhTransition {
        state: if accepted { y } else { x },
        proposal: y,
        accepted,
        alpha,
        alpha_t,
    }
}

/// `int g(y) Q(x, dy)` by adaptive quadrature over the proposal support.
pub fn integrate_proposal(problem: &dyn MhProblem, x: f64, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let (lo, hi) = problem.proposal_support(x);
    let mut kinks = problem.kinks(x);
    kinks.push(x);
    integrate(|y| g(y) * problem.proposal_density(x, y), lo, hi, &kinks, tol)
}

/// Rejects perturbations whose `E(x, y)` can be neither evaluated nor
/// bounded; after this check [`error_at`] is total.
fn check_evaluable(pert: &Perturbation) -> Result<()> {
    if let Perturbation::RandomizedRatio { bound: None, .. } = pert {
        return Err(Error::Quadrature(
            "randomized ratio without a known bound on |alpha - alpha_t|".into(),
        ));
    }
    Ok(())
}

fn error_at(problem: &dyn MhProblem, pert: &Perturbation, x: f64, y: f64) -> f64 {
    acceptance_error(problem, pert, x, y).expect("checked by check_evaluable")
}

fn warn_grid(what: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    log::warn!(
        "{what}: supremum taken over {} grid points; on a continuous space this is a lower estimate of the true supremum",
        grid.len()
    );
    Ok(())
}

fn grid_max(grid: &[f64], f: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let vals = grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `max_{x in grid} int |x - y| E(x, y) Q(x, dy) / Vt(x)`.
pub fn gamma_from_acceptance(
    problem: &dyn MhProblem,
    pert: &Perturbation,
    vt: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    tol: f64,
) -> Result<f64> {
    check_evaluable(pert)?;
    warn_grid("gamma", grid)?;
    grid_max(grid, |x| {
        let num = integrate_proposal(problem, x, |y| (x - y).abs() * error_at(problem, pert, x, y), tol)?;
        Ok(num / vt(x))
    })
}

/// `max_{z in grid} int (V(y)/V(z) + 1) E(z, y) Q(z, dy)`.
pub fn delta_v_transfer(
    problem: &dyn MhProblem,
    pert: &Perturbation,
    v: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    tol: f64,
) -> Result<f64> {
    check_evaluable(pert)?;
    warn_grid("delta_V", grid)?;
    grid_max(grid, |z| {
        let vz = v(z);
        integrate_proposal(problem, z, |y| (v(y) / vz + 1.0) * error_at(problem, pert, z, y), tol)
    })
}

/// `1 + max_{x in grid} int V(y)/V(x) Q(x, dy)`.
pub fn lambda_constant(
    problem: &dyn MhProblem,
    v: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    tol: f64,
) -> Result<f64> {
    warn_grid("lambda", grid)?;
    let sup = grid_max(grid, |x| {
        let vx = v(x);
        let val = integrate_proposal(problem, x, |y| v(y) / vx, tol)?;
        if !(val.abs() < OVERFLOW_GUARD) {
            return Err(Error::Quadrature(format!("proposal integral of V diverges at x = {x}")));
        }
        Ok(val)
    })?;
    Ok(1.0 + sup)
}

/// `(P_alpha V)(x)` by quadrature.
pub fn mh_apply_v(problem: &dyn MhProblem, v: &(dyn Fn(f64) -> f64 + Sync), x: f64, tol: f64) -> Result<f64> {
    let vx = v(x);
    integrate_proposal(
        problem,
        x,
        |y| {
            let a = problem.acceptance(x, y);
            a * v(y) + (1.0 - a) * vx
        },
        tol,
    )
}

/// Drift constants of the exact chain fitted on a grid: `delta` is the
/// largest ratio `PV/V` over grid points at or beyond `tail_from`, and `L`
/// the smallest constant making the inequality hold at every grid point.
pub fn mh_fit_drift(
    problem: &dyn MhProblem,
    v: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    tail_from: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    warn_grid("drift", grid)?;
    let pv = grid
        .par_iter()
        .map(|&x| mh_apply_v(problem, v, x, tol))
        .collect::<Result<Vec<f64>>>()?;
    let delta = grid
        .iter()
        .zip(&pv)
        .filter(|(x, _)| **x >= tail_from)
        .map(|(x, p)| p / v(*x))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Inapplicable::new("mh drift", format!("fitted rate {delta} is not in (0, 1)")).into());
    }
    let l = grid
        .iter()
        .zip(&pv)
        .map(|(x, p)| p - delta * v(*x))
        .fold(crate::kernels::MIN_DRIFT_L, f64::max);
    Ok((delta, l))
}

/// V-norm bound for a uniformly `s`-accurate acceptance when the exact
/// chain is V-uniformly ergodic with drift `(delta, L)`.
#[allow(clippy::too_many_arguments)]
pub fn metro_geom_bound(c: f64, rho: f64, n: u64, s: f64, lambda: f64, delta: f64, l: f64, p0_v: f64) -> Result<f64> {
    check_rho(rho)?;
    check_delta(delta)?;
    if !(lambda >= 1.0) || !(s >= 0.0) || !(c >= 0.0) || !(l >= 0.0) {
        return Err(invalid("metro_geom needs lambda >= 1 and nonnegative s, C, L"));
    }
    let limit = (1.0 - delta) / lambda;
    if !(s < limit) {
        return Err(Inapplicable::new(
            "metro_geom",
            format!("s = {s} must be below (1 - delta)/lambda = {limit}"),
        )
        .into());
    }
    let kappa = check_moment(p0_v)?.max(l / (1.0 - delta - lambda * s));
    Ok(lambda * s * kappa * c * (1.0 - pow_n(rho, n)) / (1.0 - rho))
}

/// `C mu(G) D(G) / (1 - rho)` for the independent sampler perturbed on `G`.
pub fn independent_mh_perturbation_bound(c: f64, rho: f64, mu_g: f64, d_g: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(0.0..=1.0).contains(&mu_g) {
        return Err(invalid(format!("mu(G) = {mu_g} must lie in [0, 1]")));
    }
    if !(d_g >= 0.0) || !d_g.is_finite() {
        return Err(invalid(format!("D(G) = {d_g} must be finite and nonnegative")));
    }
    Ok(c * mu_g * d_g / (1.0 - rho))
}

/// Constants of [`metro_geom_bound`]; on continuous spaces `c` and `rho`
/// are supplied by the caller rather than certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetroGeomConstants {
    pub c: f64,
    pub rho: f64,
    pub delta: f64,
    pub l: f64,
    pub lambda: f64,
}

/// Simulates exact and approximate chains from `x0` with shared
/// randomness and tabulates the empirical W1 of their marginals against
/// [`metro_geom_bound`]. W1 under `|x - y|` is dominated by the V-norm
/// whenever `|x - y| <= V(x) + V(y)`, which the caller's `V` must satisfy.
#[allow(clippy::too_many_arguments)]
pub fn mh_metro_geom_report(
    problem: &dyn MhProblem,
    pert: &Perturbation,
    consts: &MetroGeomConstants,
    v_x0: f64,
    x0: f64,
    n: u64,
    samples: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    let s = pert
        .uniform_bound()
        .ok_or_else(|| Error::from(Inapplicable::new("metro_geom", "no uniform bound on |alpha - alpha_t|")))?;
    // Fails early when s is outside the bound's range.
    metro_geom_bound(consts.c, consts.rho, 0, s, consts.lambda, consts.delta, consts.l, v_x0)?;
    if samples < 2 * REPORT_BATCHES {
        return Err(invalid(format!("need at least {} samples", 2 * REPORT_BATCHES)));
    }
    let mut report = PerturbationReport::new(Theorem::MetroGeom)
        .constant("C", consts.c)
        .constant("rho", consts.rho)
        .constant("delta", consts.delta)
        .constant("L", consts.l)
        .constant("lambda", consts.lambda)
        .constant("s", s)
        .constant("samples", samples as f64);
    report.push_mc(0, 0.0, 0.0, 0.0);
    let mut xs = vec![x0; samples];
    let mut ys = vec![x0; samples];
    for step in 1..=n {
        xs.par_iter_mut()
            .zip(ys.par_iter_mut())
            .enumerate()
            .for_each(|(r, (x, y))| {
                let rng = stream_rng(seed, r as u64, step);
                *x = mh_step(problem, *x, &mut rng.clone());
                *y = approx_mh_step(problem, pert, *y, &mut rng.clone());
            });
        let (w, se) = empirical_w1_with_se(&xs, &ys)?;
        let b = metro_geom_bound(
            consts.c,
            consts.rho,
            step,
            s,
            consts.lambda,
            consts.delta,
            consts.l,
            v_x0,
        )?;
        report.push_mc(step, w, se, b);
    }
    Ok(report)
}

fn empirical_w1_with_se(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let sorted = |a: &[f64]| {
        let mut a = a.to_vec();
        a.par_sort_unstable_by(f64::total_cmp);
        a
    };
    let w = empirical_w1_1d(&sorted(xs), &sorted(ys))?;
    let per_batch = batches(xs, REPORT_BATCHES)
        .into_iter()
        .zip(batches(ys, REPORT_BATCHES))
        .map(|(a, b)| empirical_w1_1d(&sorted(a), &sorted(b)))
        .collect::<Result<Vec<_>>>()?;
    Ok((w, batch_se(&per_batch)))
}

/// `max_x int |x - y| Q(x, dy)`, the scale of `gamma` for `E <= s`.
pub fn mean_jump(problem: &dyn MhProblem, x: f64, tol: f64) -> Result<f64> {
    integrate_proposal(problem, x, |y| (x - y).abs(), tol)
}
