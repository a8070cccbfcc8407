//! Exact probability metrics on finite spaces and the empirical W1 on the
//! real line.
//!
//! Everything here serves as ground truth for the perturbation bounds:
//! [`wasserstein1_exact`] solves the transport problem to optimality, and
//! the V-norm and total variation have closed forms on discrete spaces.

mod distribution;
mod space;
mod transport;

pub use distribution::{Coupling, DiscreteDistribution, WeightFunction, MASS_TOL};
pub use space::FiniteMetricSpace;

use crate::error::{Error, Result};

/// W1 distance under the metric of `space` together with an optimal plan.
pub fn wasserstein1_exact(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    space: &FiniteMetricSpace,
) -> Result<(f64, Coupling)> {
    space.ensure_len(mu.len())?;
    space.ensure_len(nu.len())?;
    let n = space.len();
    let sol = transport::solve(mu.weights(), nu.weights(), |i, j| space.dist(i, j));
    let mut joint = vec![0.0; n * n];
    for (i, j, f) in sol.flows {
        joint[i * n + j] += f;
    }
    Ok((sol.cost, Coupling::from_flat(n, joint)))
}

/// W1 distance only; skips materializing the plan.
pub fn wasserstein1(mu: &DiscreteDistribution, nu: &DiscreteDistribution, space: &FiniteMetricSpace) -> Result<f64> {
    space.ensure_len(mu.len())?;
    space.ensure_len(nu.len())?;
    Ok(transport::solve(mu.weights(), nu.weights(), |i, j| space.dist(i, j)).cost)
}

/// Total variation norm `sum_i |mu_i - nu_i|` (disjoint supports give 2).
pub fn total_variation(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<f64> {
    mu.ensure_len(nu.len())?;
    Ok(tv_slices(mu.weights(), nu.weights()))
}

pub(crate) fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `||mu - nu||_V = sum_i V_i |mu_i - nu_i|`; the supremum over `|f| <= V`
/// is attained at `f = sign(mu - nu) V`.
pub fn vnorm_distance(mu: &DiscreteDistribution, nu: &DiscreteDistribution, v: &WeightFunction) -> Result<f64> {
    mu.ensure_len(nu.len())?;
    mu.ensure_len(v.len())?;
    Ok(vnorm_slices(mu.weights(), nu.weights(), v.values()))
}

pub(crate) fn vnorm_slices(a: &[f64], b: &[f64], v: &[f64]) -> f64 {
    a.iter().zip(b).zip(v).map(|((x, y), w)| w * (x - y).abs()).sum()
}

/// The metric `d_V(x, y) = (V(x) + V(y)) 1{x != y}` on the points of `space`.
pub fn dv_metric(v: &WeightFunction, space: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    space.ensure_len(v.len())?;
    Ok(dv_metric_labelled(v, space.labels().to_vec()))
}

pub(crate) fn dv_metric_labelled(v: &WeightFunction, labels: Vec<String>) -> FiniteMetricSpace {
    let n = v.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = v[i] + v[j];
            }
        }
    }
    FiniteMetricSpace::from_flat_unchecked(labels, dist)
}

/// Exact W1 between two empirical measures on the line with equal sample
/// counts: the sorted (quantile) pairing is optimal.
pub fn empirical_w1_1d(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyInput);
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if !is_sorted(xs) || !is_sorted(ys) {
        return Err(Error::InvalidParameter("samples must be sorted ascending".into()));
    }
    let n = xs.len() as f64;
    Ok(xs.iter().zip(ys).map(|(a, b)| (a - b).abs()).sum::<f64>() / n)
}

/// Sorts copies of the samples and calls [`empirical_w1_1d`].
pub fn empirical_w1_unsorted(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    empirical_w1_1d(&a, &b)
}

fn is_sorted(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}
