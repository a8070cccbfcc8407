//! Autoregressive chain `X_n = alpha X_{n-1} + Z_n` on the real line and a
//! perturbation `alpha -> alpha_t`: drift constants, Wasserstein and
//! total-variation bounds, Gaussian closed forms, and a synchronously
//! coupled simulation.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::bounds::pow_n;
use crate::error::{invalid, Error, Inapplicable, Result};
use crate::otcore::empirical_w1_1d;
use crate::rng::{stream_rng, StreamRng};
use crate::stats::{batch_se, batches, folded_normal_mean, mean_se, normal_cdf};

/// Batches used for the standard error of the empirical W1.
const W1_BATCHES: usize = 20;

pub type Sampler = Arc<dyn Fn(&mut StreamRng) -> f64 + Send + Sync>;

/// Law of the innovations `Z_n`.
#[derive(Clone)]
pub enum Innovation {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Any law given by a sampler and the moments the bounds need.
    Custom {
        sampler: Sampler,
        mean: f64,
        mean_abs: f64,
        /// Upper bound of the density, if it has one.
        h_max: Option<f64>,
        unimodal: bool,
    },
}

impl fmt::Debug for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Innovation::Gaussian { mean, sd } => write!(f, "Gaussian({mean}, {sd})"),
            Innovation::Custom { mean, mean_abs, .. } => {
                write!(f, "Custom(mean = {mean}, mean_abs = {mean_abs})")
            }
        }
    }
}

impl Innovation {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !mean.is_finite() || !sd.is_finite() {
            return Err(invalid(format!(
                "Gaussian innovation needs sd > 0, got N({mean}, {sd}^2)"
            )));
        }
        Ok(Innovation::Gaussian { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Innovation::Gaussian { mean, .. } => *mean,
            Innovation::Custom { mean, .. } => *mean,
        }
    }

    /// `E|Z|`, in closed form for Gaussians.
    pub fn mean_abs(&self) -> f64 {
        match self {
            Innovation::Gaussian { mean, sd } => folded_normal_mean(*mean, *sd),
            Innovation::Custom { mean_abs, .. } => *mean_abs,
        }
    }

    pub fn h_max(&self) -> Option<f64> {
        match self {
            Innovation::Gaussian { sd, .. } => Some(1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt())),
            Innovation::Custom { h_max, .. } => *h_max,
        }
    }

    pub fn is_unimodal(&self) -> bool {
        match self {
            Innovation::Gaussian { .. } => true,
            Innovation::Custom { unimodal, .. } => *unimodal,
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Innovation::Gaussian { mean, sd } => Normal::new(*mean, *sd).expect("validated").sample(rng),
            Innovation::Custom { sampler, .. } => sampler(rng),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ar1Params {
    pub alpha: f64,
    pub innovation: Innovation,
}

impl Ar1Params {
    pub fn new(alpha: f64, innovation: Innovation) -> Result<Self> {
        check_alpha("alpha", alpha)?;
        Ok(Self { alpha, innovation })
    }
}

fn check_alpha(name: &str, a: f64) -> Result<()> {
    if !(a.abs() < 1.0) {
        return Err(invalid(format!("|{name}| = {} must be below 1", a.abs())));
    }
    Ok(())
}

/// `(delta, L)` of the drift condition for `V(x) = 1 + |x|`.
pub fn ar1_constants(alpha_t: f64, e_abs_z: f64) -> Result<(f64, f64)> {
    check_alpha("alpha_t", alpha_t)?;
    if !(e_abs_z >= 0.0) {
        return Err(invalid(format!("E|Z| = {e_abs_z} must be nonnegative")));
    }
    Ok((alpha_t.abs(), 1.0 - alpha_t.abs() + e_abs_z))
}

/// `kappa` for a perturbed chain started at `x0`.
pub fn ar1_default_kappa(x0: f64, alpha_t: f64, e_abs_z: f64) -> Result<f64> {
    check_alpha("alpha_t", alpha_t)?;
    Ok(1.0 + x0.abs().max(e_abs_z / (1.0 - alpha_t.abs())))
}

/// `|alpha|^n w0 + |alpha - alpha_t| (1 - |alpha|^n) kappa / (1 - |alpha|)`.
pub fn ar1_nstep_bound(alpha: f64, alpha_t: f64, w0: f64, n: u64, kappa: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    let a = alpha.abs();
    let an = pow_n(a, n);
    Ok(an * w0 + (alpha - alpha_t).abs() * (1.0 - an) * kappa / (1.0 - a))
}

/// Upper bound on `W(pi_alpha, pi_alpha_t)`.
pub fn ar1_stationary_bound(alpha: f64, alpha_t: f64, e_abs_z: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    check_alpha("alpha_t", alpha_t)?;
    let (a, at) = (alpha.abs(), alpha_t.abs());
    Ok((alpha - alpha_t).abs() * (1.0 - at + e_abs_z) / ((1.0 - a) * (1.0 - at)))
}

/// Lower bound from the stationary means `E Z / (1 - alpha)`.
pub fn ar1_stationary_lower_bound(alpha: f64, alpha_t: f64, e_z: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    check_alpha("alpha_t", alpha_t)?;
    Ok((alpha - alpha_t).abs() * e_z.abs() / ((1.0 - alpha).abs() * (1.0 - alpha_t).abs()))
}

/// Stationary law `N(m, s^2)` of the chain with Gaussian innovations.
pub fn ar1_gaussian_stationary(alpha: f64, mean_z: f64, sd_z: f64) -> Result<(f64, f64)> {
    check_alpha("alpha", alpha)?;
    Ok((mean_z / (1.0 - alpha), sd_z / (1.0 - alpha * alpha).sqrt()))
}

/// Exact W1 between the two Gaussian stationary laws: the quantile
/// coupling gives `E|dm + ds Z|`.
pub fn ar1_gaussian_stationary_w1(alpha: f64, alpha_t: f64, mean_z: f64, sd_z: f64) -> Result<f64> {
    if !(sd_z > 0.0) {
        return Err(invalid(format!("sd_Z = {sd_z} must be positive")));
    }
    let (m1, s1) = ar1_gaussian_stationary(alpha, mean_z, sd_z)?;
    let (m2, s2) = ar1_gaussian_stationary(alpha_t, mean_z, sd_z)?;
    Ok(folded_normal_mean(m1 - m2, s1 - s2))
}

/// `2 |alpha - alpha_t| h_max`, valid for weakly unimodal densities.
pub fn ar1_tv_gamma(alpha: f64, alpha_t: f64, h_max: f64, unimodal: bool) -> Result<f64> {
    if !unimodal {
        return Err(Inapplicable::new("ar1 tv gamma", "innovation density is not weakly unimodal").into());
    }
    if !(h_max > 0.0) || !h_max.is_finite() {
        return Err(invalid(format!("h_max = {h_max} must be positive and finite")));
    }
    Ok(2.0 * (alpha - alpha_t).abs() * h_max)
}

/// `sum`-convention total variation between the rows at `x` for Gaussian
/// innovations, divided by `V(x) = 1 + |x|`.
pub fn ar1_gaussian_row_tv_ratio(alpha: f64, alpha_t: f64, sd_z: f64, x: f64) -> f64 {
    let shift = ((alpha - alpha_t) * x).abs();
    2.0 * (2.0 * normal_cdf(shift / (2.0 * sd_z)) - 1.0) / (1.0 + x.abs())
}

/// Total-variation bound for `|alpha - alpha_t| in (0, 1/(2e))` and
/// `h_max <= 1`, with `C` from the V-uniform ergodicity of the chain.
pub fn ar1_tv_final_bound(alpha: f64, alpha_t: f64, c: f64, kappa: f64, e_abs_z: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    check_alpha("alpha_t", alpha_t)?;
    let d = (alpha - alpha_t).abs();
    let limit = 0.5 * (-1.0f64).exp();
    if !(d > 0.0 && d < limit) {
        return Err(Inapplicable::new("ar1 tv", format!("|alpha - alpha_t| = {d} must lie in (0, {limit})")).into());
    }
    Ok(kappa * std::f64::consts::E / (1.0 - alpha.abs()) * 2.0 * c * (e_abs_z + 2.0) * d * (1.0 / d).ln())
}

/// All closed-form quantities for one `(alpha, alpha_t)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1BoundReport {
    pub delta: f64,
    pub l: f64,
    pub kappa: f64,
    /// `sup_x W(P_alpha(x,.), P_alpha_t(x,.)) / V(x)`, bounded by `|alpha - alpha_t|`.
    pub gamma: f64,
    /// `tau(P_alpha) = |alpha|`.
    pub tau_rate: f64,
    /// Bound at `n = 0..=n_max`.
    pub nstep: Vec<f64>,
    pub stationary: f64,
    pub lower: f64,
    pub tv_gamma: Option<f64>,
    pub tv_final: Option<f64>,
}

/// Evaluates every bound for chains started at `x0` (so `w0 = 0`); the
/// total-variation fields are filled when their hypotheses hold and `c_tv`
/// is given.
pub fn ar1_report(params: &Ar1Params, alpha_t: f64, x0: f64, n_max: u64, c_tv: Option<f64>) -> Result<Ar1BoundReport> {
    let alpha = params.alpha;
    let e_abs = params.innovation.mean_abs();
    let (delta, l) = ar1_constants(alpha_t, e_abs)?;
    let kappa = ar1_default_kappa(x0, alpha_t, e_abs)?;
    let nstep = (0..=n_max)
        .map(|n| ar1_nstep_bound(alpha, alpha_t, 0.0, n, kappa))
        .collect::<Result<Vec<_>>>()?;
    let tv_gamma = match params.innovation.h_max() {
        Some(h) => ar1_tv_gamma(alpha, alpha_t, h, params.innovation.is_unimodal()).ok(),
        None => None,
    };
    let tv_final = match (c_tv, params.innovation.h_max()) {
        (Some(c), Some(h)) if h <= 1.0 && params.innovation.is_unimodal() => {
            ar1_tv_final_bound(alpha, alpha_t, c, kappa, e_abs).ok()
        }
        _ => None,
    };
    Ok(Ar1BoundReport {
        delta,
        l,
        kappa,
        gamma: (alpha - alpha_t).abs(),
        tau_rate: alpha.abs(),
        nstep,
        stationary: ar1_stationary_bound(alpha, alpha_t, e_abs)?,
        lower: ar1_stationary_lower_bound(alpha, alpha_t, params.innovation.mean())?,
        tv_gamma,
        tv_final,
    })
}

/// One step of the coupled simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1SimStep {
    pub n: u64,
    /// Mean of `|X_n - Xt_n|` over replicas.
    pub coupled_dev: f64,
    pub coupled_se: f64,
    /// W1 between the empirical laws of `X_n` and `Xt_n`.
    pub empirical_w1: f64,
    /// Batch-means standard error of `empirical_w1`.
    pub empirical_se: f64,
}

/// Runs `replicas` pairs of chains from `x0`, both driven by the same
/// innovations. Row `k` holds step `k + 1`.
pub fn ar1_simulate_coupled(
    params: &Ar1Params,
    alpha_t: f64,
    x0: f64,
    n: u64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<Ar1SimStep>> {
    check_alpha("alpha_t", alpha_t)?;
    if replicas < 2 {
        return Err(invalid(format!("need at least 2 replicas, got {replicas}")));
    }
    if n < 1 {
        return Err(invalid("need at least one step"));
    }
    let mut xs = vec![x0; replicas];
    let mut ys = vec![x0; replicas];
    let mut out = Vec::with_capacity(n as usize);
    for step in 1..=n {
        xs.par_iter_mut()
            .zip(ys.par_iter_mut())
            .enumerate()
            .for_each(|(r, (x, y))| {
                let z = params.innovation.sample(&mut stream_rng(seed, r as u64, step));
                *x = params.alpha * *x + z;
                *y = alpha_t * *y + z;
            });
        out.push(summarize(step, &xs, &ys)?);
    }
    Ok(out)
}

fn summarize(n: u64, xs: &[f64], ys: &[f64]) -> Result<Ar1SimStep> {
    let devs: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| (a - b).abs()).collect();
    let (coupled_dev, coupled_se) = mean_se(&devs);
    let sorted_w1 = |a: &[f64], b: &[f64]| -> Result<f64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.par_sort_unstable_by(f64::total_cmp);
        b.par_sort_unstable_by(f64::total_cmp);
        empirical_w1_1d(&a, &b)
    };
    let empirical_w1 = sorted_w1(xs, ys)?;
    let per_batch = batches(xs, W1_BATCHES)
        .into_iter()
        .zip(batches(ys, W1_BATCHES))
        .map(|(a, b)| sorted_w1(a, b))
        .collect::<Result<Vec<_>>>()?;
    let empirical_se = if per_batch.len() >= 2 {
        batch_se(&per_batch)
    } else {
        f64::INFINITY
    };
    Ok(Ar1SimStep {
        n,
        coupled_dev,
        coupled_se,
        empirical_w1,
        empirical_se,
    })
}

/// Simulation rows joined with the n-step bound, as
/// `n,coupled_dev,empirical_w1,bound`.
pub fn ar1_csv(steps: &[Ar1SimStep], bounds: &[f64]) -> String {
    let mut out = String::from("n,coupled_dev,empirical_w1,bound\n");
    for s in steps {
        let b = bounds.get(s.n as usize).copied().unwrap_or(f64::NAN);
        out.push_str(&format!("{},{},{},{}\n", s.n, s.coupled_dev, s.empirical_w1, b));
    }
    out
}

/// Monte-Carlo check of `E[V(alpha_t x + Z)] <= delta V(x) + L` at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftPoint {
    pub x: f64,
    pub mean: f64,
    pub se: f64,
    pub bound: f64,
}

impl DriftPoint {
    pub fn holds(&self) -> bool {
        self.mean <= self.bound + 3.0 * self.se
    }
}

pub fn ar1_drift_check(
    alpha_t: f64,
    innovation: &Innovation,
    grid: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<DriftPoint>> {
    let (delta, l) = ar1_constants(alpha_t, innovation.mean_abs())?;
    if draws < 2 {
        return Err(Error::InvalidParameter("need at least 2 draws".into()));
    }
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut rng = stream_rng(seed, i as u64, 0);
            let vals: Vec<f64> = (0..draws)
                .map(|_| 1.0 + (alpha_t * x + innovation.sample(&mut rng)).abs())
                .collect();
            let (mean, se) = mean_se(&vals);
            DriftPoint {
                x,
                mean,
                se,
                bound: delta * (1.0 + x.abs()) + l,
            }
        })
        .collect())
}
