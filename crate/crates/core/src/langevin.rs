//! Ideal and noisy-gradient Langevin chains for the posterior of a
//! one-parameter Gibbs random field with an enumerable configuration space.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Inapplicable, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::stats::{histogram_tv, mean_se};

/// Default cap on `|Y|^M`.
pub const DEFAULT_CAP: u128 = 1 << 20;

/// Bins used by [`langevin_tv_proxy`].
pub const TV_BINS: usize = 256;

// Drift draws are split into this many independent streams per grid point.
const DRIFT_CHUNKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `sum_i y_i`.
    Sum,
    /// Number of agreeing neighbours `y_i = y_{i+1}` on the path `1..M`.
    PathAgreement,
    /// `(1/M) sum_i y_i`.
    Mean,
}

impl Statistic {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sum" => Some(Self::Sum),
            "path-agreement" => Some(Self::PathAgreement),
            "mean" => Some(Self::Mean),
            _ => None,
        }
    }

    pub fn eval(self, y: &[f64]) -> f64 {
        match self {
            Self::Sum => y.iter().sum(),
            Self::PathAgreement => y.windows(2).filter(|w| w[0] == w[1]).count() as f64,
            Self::Mean => y.iter().sum::<f64>() / y.len() as f64,
        }
    }
}

/// Likelihood `exp(theta s(y)) / z(theta)` on `Y^M` with a `N(0, sigma_p^2)`
/// prior on `theta`.
///
/// Only the law of `s(Y)` matters, so the configurations are compressed to
/// the distinct values of `s` and their multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsModel {
    alphabet: Vec<f64>,
    m: usize,
    statistic: Statistic,
    observed: Vec<f64>,
    sigma_p: f64,
    values: Vec<f64>,
    counts: Vec<f64>,
    s_obs: f64,
}

impl GibbsModel {
    pub fn new(alphabet: Vec<f64>, statistic: Statistic, observed: Vec<f64>, sigma_p: f64) -> Result<Self> {
        Self::with_cap(alphabet, statistic, observed, sigma_p, DEFAULT_CAP)
    }

    pub fn with_cap(
        alphabet: Vec<f64>,
        statistic: Statistic,
        observed: Vec<f64>,
        sigma_p: f64,
        cap: u128,
    ) -> Result<Self> {
        if alphabet.is_empty() || observed.is_empty() {
            return Err(Error::EmptyInput);
        }
        if alphabet.iter().any(|a| !a.is_finite()) {
            return Err(invalid("alphabet labels must be finite"));
        }
        if let Some(y) = observed.iter().find(|y| !alphabet.contains(y)) {
            return Err(invalid(format!("observed label {y} is not in the alphabet")));
        }
        if !(sigma_p > 0.0 && sigma_p.is_finite()) {
            return Err(invalid(format!("sigma_p = {sigma_p} must be positive")));
        }
        let m = observed.len();
        let k = alphabet.len() as u128;
        let size = u32::try_from(m)
            .ok()
            .and_then(|m| k.checked_pow(m))
            .unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::EnumerationCap { size, cap });
        }
        let mut stats = Vec::with_capacity(size as usize);
        let mut digits = vec![0usize; m];
        let mut y: Vec<f64> = vec![alphabet[0]; m];
        loop {
            stats.push(statistic.eval(&y));
            // Odometer increment over Y^M.
            let mut i = 0;
            while i < m {
                digits[i] += 1;
                if digits[i] < alphabet.len() {
                    y[i] = alphabet[digits[i]];
                    break;
                }
                digits[i] = 0;
                y[i] = alphabet[0];
                i += 1;
            }
            if i == m {
                break;
            }
        }
        stats.sort_by(f64::total_cmp);
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for s in stats {
            match values.last() {
                Some(&last) if last == s => *counts.last_mut().expect("paired") += 1.0,
                _ => {
                    values.push(s);
                    counts.push(1.0);
                }
            }
        }
        let s_inf = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(s_inf > 0.0 && s_inf.is_finite()) {
            return Err(invalid(format!("sup |s| = {s_inf} must be finite and positive")));
        }
        let s_obs = statistic.eval(&observed);
        Ok(Self {
            alphabet,
            m,
            statistic,
            observed,
            sigma_p,
            values,
            counts,
            s_obs,
        })
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    /// `s(y)` of the observed configuration.
    pub fn observed_statistic(&self) -> f64 {
        self.s_obs
    }

    /// `sup |s|` over `Y^M`.
    pub fn s_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Distinct values of `s` with their multiplicities.
    pub fn support(&self) -> (&[f64], &[f64]) {
        (&self.values, &self.counts)
    }

    /// `log z(theta)`.
    pub fn log_partition(&self, theta: f64) -> f64 {
        let top = self.values.iter().map(|s| theta * s).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self
            .values
            .iter()
            .zip(&self.counts)
            .map(|(s, c)| c * (theta * s - top).exp())
            .sum();
        top + sum.ln()
    }

    /// `log pi_y(theta)` up to an additive constant.
    pub fn log_posterior(&self, theta: f64) -> f64 {
        theta * self.s_obs - self.log_partition(theta) - theta * theta / (2.0 * self.sigma_p * self.sigma_p)
    }

    /// Law of `s(Y)` under `l(. | theta)`, aligned with [`Self::support`].
    pub fn statistic_law(&self, theta: f64) -> Vec<f64> {
        let top = self.values.iter().map(|s| theta * s).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self
            .values
            .iter()
            .zip(&self.counts)
            .map(|(s, c)| c * (theta * s - top).exp())
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

/// Step size `sigma` and Monte-Carlo sample count `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinParams {
    pub sigma: f64,
    pub n: u64,
}

impl LangevinParams {
    /// Checks `sigma > 0`, `N >= 1` and `sigma^2 < 4 sigma_p^2`.
    pub fn new(sigma: f64, n: u64, sigma_p: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma = {sigma} must be positive")));
        }
        if n < 1 {
            return Err(invalid("N must be at least 1"));
        }
        check_variance(sigma, sigma_p)?;
        Ok(Self { sigma, n })
    }
}

fn check_variance(sigma: f64, sigma_p: f64) -> Result<()> {
    if !(sigma * sigma < 4.0 * sigma_p * sigma_p) {
        return Err(Inapplicable::new(
            "langevin",
            format!(
                "sigma^2 = {} must be below 4 sigma_p^2 = {}",
                sigma * sigma,
                4.0 * sigma_p * sigma_p
            ),
        )
        .into());
    }
    Ok(())
}

/// `E_{l(.|theta)} s(Y)`.
pub fn likelihood_mean_s(model: &GibbsModel, theta: f64) -> f64 {
    model
        .statistic_law(theta)
        .iter()
        .zip(&model.values)
        .map(|(p, s)| p * s)
        .sum()
}

/// `d/dtheta log pi_y(theta) = s(y) - E_theta s(Y) - theta / sigma_p^2`.
pub fn grad_log_posterior(model: &GibbsModel, theta: f64) -> f64 {
    model.s_obs - likelihood_mean_s(model, theta) - theta / (model.sigma_p * model.sigma_p)
}

/// Sum of `s(Y_i)` over `N` i.i.d. draws `Y_i ~ l(. | theta)`.
///
/// Draws the multiplicity of each distinct value of `s` by conditional
/// binomials, which is an exact multinomial draw costing `O(#values)`.
pub fn sample_statistic_sum(model: &GibbsModel, theta: f64, n: u64, rng: &mut StreamRng) -> f64 {
    let law = model.statistic_law(theta);
    let mut left = n;
    let mut mass = 1.0;
    let mut total = 0.0;
    for (k, (&p, &s)) in law.iter().zip(&model.values).enumerate() {
        if left == 0 {
            break;
        }
        let count = if k + 1 == law.len() || p >= mass {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
        };
        total += count as f64 * s;
        left -= count;
        mass -= p;
    }
    total
}

/// `s(y) - (1/N) sum_i s(Y_i) - theta / sigma_p^2`.
pub fn noisy_grad(model: &GibbsModel, theta: f64, n: u64, rng: &mut StreamRng) -> Result<f64> {
    if n < 1 {
        return Err(invalid("N must be at least 1"));
    }
    let mean = sample_statistic_sum(model, theta, n, rng) / n as f64;
    Ok(model.s_obs - mean - theta / (model.sigma_p * model.sigma_p))
}

/// `theta + sigma^2/2 g + sigma z` for a standard normal `z`.
pub fn langevin_update(theta: f64, sigma: f64, g: f64, z: f64) -> f64 {
    theta + 0.5 * sigma * sigma * g + sigma * z
}

/// One step of the ideal (`noisy = false`) or noisy chain. The Gaussian
/// innovation is drawn first, so both chains share it under the same
/// generator state.
pub fn langevin_step(
    model: &GibbsModel,
    params: &LangevinParams,
    theta: f64,
    rng: &mut StreamRng,
    noisy: bool,
) -> Result<f64> {
    let z: f64 = rng.sample(StandardNormal);
    let g = if noisy {
        noisy_grad(model, theta, params.n, rng)?
    } else {
        grad_log_posterior(model, theta)
    };
    Ok(langevin_update(theta, params.sigma, g, z))
}

/// `(delta, L, I_radius)` of the drift inequality for `V(theta) = 1 + |theta|`.
pub fn langevin_drift_constants(sigma: f64, sigma_p: f64, s_inf: f64) -> Result<(f64, f64, f64)> {
    if !(sigma > 0.0) || !(sigma_p > 0.0) || !(s_inf > 0.0) {
        return Err(invalid("sigma, sigma_p and sup |s| must be positive"));
    }
    check_variance(sigma, sigma_p)?;
    let sp2 = sigma_p * sigma_p;
    let s2 = sigma * sigma;
    let delta = 1.0 - s2 / (4.0 * sp2);
    let l = sigma + s2 * s_inf + s2 / (2.0 * sp2);
    let radius = 1.0 + 4.0 * sp2 * s_inf + 4.0 * sp2 / sigma;
    Ok((delta, l, radius))
}

fn noise_scale(sigma: f64, s_inf: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    let scale = (s_inf * s2).max(1.0 / (s_inf * s_inf * s2 * s2));
    let threshold = (s_inf * s_inf * s2 * s2).max(1.0 / (s_inf.powi(3) * s2 * s2 * s2));
    (scale, threshold)
}

/// `sup_theta ||P_sigma(theta, .) - P_{sigma,N}(theta, .)||_tv` bound
/// `6 max{|s| sigma^2, |s|^-2 sigma^-4} ln N / N`, valid for
/// `N > 4 max{|s|^2 sigma^4, |s|^-3 sigma^-6}`.
pub fn langevin_tv_perturbation_bound(sigma: f64, s_inf: f64, n: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(s_inf > 0.0) {
        return Err(invalid("sigma and sup |s| must be positive"));
    }
    let (scale, threshold) = noise_scale(sigma, s_inf);
    if !(n > 4.0 * threshold) {
        return Err(Inapplicable::new("langevin tv", format!("N = {n} must exceed {}", 4.0 * threshold)).into());
    }
    Ok(6.0 * scale * n.ln() / n)
}

/// Uniform-in-`n` total-variation bound between the ideal and noisy chains
/// (and their stationary laws), given ergodicity constants `(C, rho)` for
/// `V(theta) = 1 + |theta|`.
#[allow(clippy::too_many_arguments)]
pub fn langevin_final_bound_from(
    sigma: f64,
    sigma_p: f64,
    s_inf: f64,
    c: f64,
    rho: f64,
    e_abs_x0: f64,
    n: f64,
) -> Result<f64> {
    if !(sigma > 0.0) || !(sigma_p > 0.0) || !(s_inf > 0.0) {
        return Err(invalid("sigma, sigma_p and sup |s| must be positive"));
    }
    check_variance(sigma, sigma_p)?;
    crate::bounds::check_rho(rho)?;
    if !(c > 0.0 && c.is_finite()) || !(e_abs_x0 >= 0.0) {
        return Err(invalid("C must be positive and E|X0| nonnegative"));
    }
    let (scale, threshold) = noise_scale(sigma, s_inf);
    if !(n > 90.0 * threshold) {
        return Err(Inapplicable::new("langevin final", format!("N = {n} must exceed {}", 90.0 * threshold)).into());
    }
    let sp2 = sigma_p * sigma_p;
    let r = 18.0 * scale / (1.0 - rho) * (2.0 + e_abs_x0.max(4.0 * sp2 * (s_inf + 1.0 / sigma)));
    let ln = n.ln();
    Ok(r * (2.0 * c * (sigma + sigma * sigma * s_inf + 3.0)).powf(2.0 / ln) * ln * ln / n)
}

pub fn langevin_final_bound(
    model: &GibbsModel,
    params: &LangevinParams,
    c: f64,
    rho: f64,
    e_abs_x0: f64,
) -> Result<f64> {
    langevin_final_bound_from(
        params.sigma,
        model.sigma_p,
        model.s_inf(),
        c,
        rho,
        e_abs_x0,
        params.n as f64,
    )
}

/// Monte-Carlo drift check at one `theta`, for both steppers.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinDriftPoint {
    pub theta: f64,
    pub exact_mean: f64,
    pub exact_se: f64,
    pub noisy_mean: f64,
    pub noisy_se: f64,
    /// `delta V(theta) + L 1_I(theta)`.
    pub bound: f64,
}

impl LangevinDriftPoint {
    pub fn exact_holds(&self) -> bool {
        self.exact_mean <= self.bound + 3.0 * self.exact_se
    }

    pub fn noisy_holds(&self) -> bool {
        self.noisy_mean <= self.bound + 3.0 * self.noisy_se
    }
}

pub fn langevin_drift_check(
    model: &GibbsModel,
    params: &LangevinParams,
    grid: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<LangevinDriftPoint>> {
    let (delta, l, radius) = langevin_drift_constants(params.sigma, model.sigma_p, model.s_inf())?;
    if draws < 2 {
        return Err(invalid("need at least 2 draws"));
    }
    grid.iter()
        .enumerate()
        .map(|(i, &theta)| {
            let run = |noisy: bool| -> Result<(f64, f64)> {
                let per = draws.div_ceil(DRIFT_CHUNKS);
                let chunks: Vec<Vec<f64>> = (0..DRIFT_CHUNKS)
                    .into_par_iter()
                    .map(|chunk| {
                        let mut rng = stream_rng(seed, chunk as u64, i as u64);
                        let take = per.min(draws.saturating_sub(chunk * per));
                        (0..take)
                            .map(|_| Ok(1.0 + langevin_step(model, params, theta, &mut rng, noisy)?.abs()))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<_>>()?;
                Ok(mean_se(&chunks.concat()))
            };
            let (exact_mean, exact_se) = run(false)?;
            let (noisy_mean, noisy_se) = run(true)?;
            let inside = if theta.abs() <= radius { 1.0 } else { 0.0 };
            Ok(LangevinDriftPoint {
                theta,
                exact_mean,
                exact_se,
                noisy_mean,
                noisy_se,
                bound: delta * (1.0 + theta.abs()) + l * inside,
            })
        })
        .collect()
}

/// States after `steps` steps of `replicas` independent chains from `x0`.
/// Replica `r` at step `k` always uses the same generator, so the ideal
/// and noisy runs share their Gaussian innovations.
pub fn langevin_simulate(
    model: &GibbsModel,
    params: &LangevinParams,
    x0: f64,
    steps: u64,
    replicas: usize,
    seed: u64,
    noisy: bool,
) -> Result<Vec<f64>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut x = x0;
            for k in 0..steps {
                x = langevin_step(model, params, x, &mut stream_rng(seed, r as u64, k), noisy)?;
            }
            Ok(x)
        })
        .collect()
}

/// Histogram TV between the ideal and noisy chains after `steps` steps,
/// over [`TV_BINS`] bins. A biased proxy, only meaningful for comparisons.
pub fn langevin_tv_proxy(
    model: &GibbsModel,
    params: &LangevinParams,
    x0: f64,
    steps: u64,
    replicas: usize,
    seed: u64,
) -> Result<f64> {
    let exact = langevin_simulate(model, params, x0, steps, replicas, seed, false)?;
    let noisy = langevin_simulate(model, params, x0, steps, replicas, seed, true)?;
    Ok(histogram_tv(&exact, &noisy, TV_BINS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> GibbsModel {
        GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn likelihood_mean_examples() {
        let m = coin();
        for theta in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            assert!((likelihood_mean_s(&m, theta) - f64::tanh(theta)).abs() < 1e-15);
        }
        let path = GibbsModel::new(
            vec![-1.0, 1.0],
            Statistic::PathAgreement,
            vec![1.0, 1.0, -1.0, 1.0],
            1.0,
        )
        .unwrap();
        // Agreements of a uniform path of 4 nodes: Binomial(3, 1/2).
        assert!((likelihood_mean_s(&path, 0.0) - 1.5).abs() < 1e-15);
        assert_eq!(path.s_inf(), 3.0);
        assert_eq!(path.observed_statistic(), 1.0);
        // Overflow safety.
        let big = GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![1.0; 10], 1.0).unwrap();
        let e = likelihood_mean_s(&big, 70.0);
        assert!(e.is_finite() && (e - 10.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(grad_log_posterior(&coin(), 0.0), 1.0);
        let m = GibbsModel::new(vec![-1.0, 0.0, 1.0], Statistic::Sum, vec![1.0, 0.0, -1.0, 1.0], 2.0).unwrap();
        for theta in [-3.0, -1.0, 0.5, 2.5] {
            let g = grad_log_posterior(&m, theta);
            assert!((g + theta / 4.0).abs() <= 2.0 * m.s_inf());
        }
    }

    #[test]
    fn enumeration_cap() {
        let r = GibbsModel::with_cap(vec![-1.0, 1.0], Statistic::Sum, vec![1.0; 21], 1.0, DEFAULT_CAP);
        assert!(matches!(r, Err(Error::EnumerationCap { .. })));
        assert!(GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![1.0; 20], 1.0).is_ok());
        assert!(GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![2.0], 1.0).is_err());
        assert!(GibbsModel::new(vec![0.0], Statistic::Sum, vec![0.0], 1.0).is_err());
    }

    #[test]
    fn constant_statistic_gives_exact_noisy_gradient() {
        let m = GibbsModel::new(vec![1.0], Statistic::Sum, vec![1.0, 1.0], 1.0).unwrap();
        let mut rng = stream_rng(1, 0, 0);
        for theta in [-1.0, 0.0, 2.0] {
            assert_eq!(
                noisy_grad(&m, theta, 7, &mut rng).unwrap(),
                grad_log_posterior(&m, theta)
            );
        }
    }

    #[test]
    fn noisy_gradient_stays_within_range() {
        let m = GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![1.0, -1.0, 1.0], 1.0).unwrap();
        let mut rng = stream_rng(3, 0, 0);
        for theta in [-2.0, 0.0, 1.5] {
            let g = grad_log_posterior(&m, theta);
            for _ in 0..200 {
                let h = noisy_grad(&m, theta, 5, &mut rng).unwrap();
                assert!((h - g).abs() <= 2.0 * m.s_inf());
            }
        }
    }

    #[test]
    fn shared_innovation_and_small_sigma() {
        let m = coin();
        let p = LangevinParams::new(0.5, 10, 1.0).unwrap();
        let a = langevin_step(&m, &p, 0.3, &mut stream_rng(9, 0, 0), false).unwrap();
        let z: f64 = stream_rng(9, 0, 0).sample(StandardNormal);
        assert_eq!(a, langevin_update(0.3, 0.5, grad_log_posterior(&m, 0.3), z));
        let tiny = LangevinParams::new(1e-9, 10, 1.0).unwrap();
        let b = langevin_step(&m, &tiny, 0.3, &mut stream_rng(9, 0, 0), true).unwrap();
        assert!((b - 0.3).abs() < 1e-8);
    }

    #[test]
    fn drift_constants_examples() {
        assert_eq!(langevin_drift_constants(0.5, 1.0, 1.0).unwrap(), (0.9375, 0.875, 13.0));
        assert!(matches!(
            langevin_drift_constants(2.0, 1.0, 1.0),
            Err(Error::Inapplicable(_))
        ));
        assert!(LangevinParams::new(2.0, 1, 1.0).is_err());
    }

    #[test]
    fn tv_bound_examples() {
        let b = langevin_tv_perturbation_bound(1.0, 1.0, 100.0).unwrap();
        assert!((b - 6.0 * 100f64.ln() / 100.0).abs() < 1e-15);
        assert!((b - 0.276_31).abs() < 1e-5);
        assert!(matches!(
            langevin_tv_perturbation_bound(1.0, 1.0, 4.0),
            Err(Error::Inapplicable(_))
        ));
        let mut prev = f64::INFINITY;
        for n in 5..200 {
            let v = langevin_tv_perturbation_bound(1.0, 1.0, n as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn final_bound_examples() {
        assert!(matches!(
            langevin_final_bound_from(1.0, 1.0, 1.0, 1.0, 0.5, 0.0, 90.0),
            Err(Error::Inapplicable(_))
        ));
        let b = langevin_final_bound_from(1.0, 1.0, 1.0, 1.0, 0.5, 0.0, 1e4).unwrap();
        let ln = 1e4f64.ln();
        let hand = 360.0 * 10f64.powf(2.0 / ln) * ln * ln / 1e4;
        assert!((b - hand).abs() < 1e-12);
        assert!((b - 5.035_019).abs() < 1e-6);
        assert!(langevin_final_bound_from(1.0, 1.0, 1.0, 1.0, 0.5, 0.0, 1e20).unwrap() < 1e-12);
    }

    #[test]
    fn drift_check_near_origin() {
        let m = coin();
        let p = LangevinParams::new(0.5, 10, 1.0).unwrap();
        let pts = langevin_drift_check(&m, &p, &[0.0, 20.0], 2000, 5).unwrap();
        assert_eq!(pts[0].bound, 0.9375 + 0.875);
        assert_eq!(pts[1].bound, 0.9375 * 21.0);
        assert!(pts.iter().all(|p| p.exact_holds() && p.noisy_holds()));
    }
}
