//! Metropolis-Hastings kernels on finite spaces, where every constant of
//! the continuous module is an exact sum.

use crate::error::{invalid, Error, Result};
use crate::kernels::FiniteKernel;
use crate::otcore::{DiscreteDistribution, FiniteMetricSpace, WeightFunction};

use super::smoothed_acceptance;

/// Proposal kernel `Q` and a strictly positive target `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMh {
    q: FiniteKernel,
    target: DiscreteDistribution,
}

/// Perturbations of the acceptance matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum FinitePerturbation {
    None,
    /// Acceptance averaged over `U ~ Unif[-s, s]` with clipping.
    UniformNoise {
        s: f64,
    },
    /// Accept every proposal from the flagged states.
    IndicatorSet(Vec<bool>),
    /// Any acceptance matrix with entries in `[0, 1]`, row-major.
    Explicit(Vec<f64>),
}

impl FiniteMh {
    pub fn new(q: FiniteKernel, target: DiscreteDistribution) -> Result<Self> {
        q.ensure_len(target.len())?;
        if let Some((index, &value)) = target.weights().iter().enumerate().find(|(_, &w)| w <= 0.0) {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self { q, target })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn proposal(&self) -> &FiniteKernel {
        &self.q
    }

    pub fn target(&self) -> &DiscreteDistribution {
        &self.target
    }

    /// `min{1, pi(y) Q(y, x) / (pi(x) Q(x, y))}`; 0 where `Q(x, y) = 0`.
    pub fn acceptance(&self, x: usize, y: usize) -> f64 {
        let qxy = self.q.get(x, y);
        if qxy == 0.0 {
            return 0.0;
        }
        let r = self.target[y] * self.q.get(y, x) / (self.target[x] * qxy);
        r.min(1.0)
    }

    pub fn acceptance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        (0..n * n).map(|k| self.acceptance(k / n, k % n)).collect()
    }

    /// `P_alpha`.
    pub fn kernel(&self) -> FiniteKernel {
        self.kernel_with(&self.acceptance_matrix())
            .expect("exact acceptance is valid")
    }

    /// `P(x, y) = Q(x, y) a(x, y)` off the diagonal; the rejected mass
    /// stays at `x`.
    pub fn kernel_with(&self, accept: &[f64]) -> Result<FiniteKernel> {
        let n = self.len();
        check_acceptance(accept, n)?;
        let mut rows = vec![vec![0.0; n]; n];
        for (x, row) in rows.iter_mut().enumerate() {
            let mut moved = 0.0;
            for y in 0..n {
                if y != x {
                    row[y] = self.q.get(x, y) * accept[x * n + y];
                    moved += row[y];
                }
            }
            row[x] = (1.0 - moved).max(0.0);
        }
        FiniteKernel::new(rows)
    }

    /// Acceptance matrix of the perturbed chain.
    pub fn perturbed_acceptance(&self, pert: &FinitePerturbation) -> Result<Vec<f64>> {
        let n = self.len();
        let base = self.acceptance_matrix();
        match pert {
            FinitePerturbation::None => Ok(base),
            FinitePerturbation::UniformNoise { s } => {
                if !(0.0..=1.0).contains(s) {
                    return Err(invalid(format!("noise level s = {s} must lie in [0, 1]")));
                }
                Ok(base.iter().map(|&a| smoothed_acceptance(a, *s)).collect())
            }
            FinitePerturbation::IndicatorSet(set) => {
                if set.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: set.len(),
                    });
                }
                Ok(base
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| if set[k / n] { 1.0 } else { a })
                    .collect())
            }
            FinitePerturbation::Explicit(a) => {
                check_acceptance(a, n)?;
                Ok(a.clone())
            }
        }
    }

    /// `max |pi(x) P(x, y) - pi(y) P(y, x)|` for the exact kernel.
    pub fn detailed_balance_residual(&self) -> f64 {
        let p = self.kernel();
        let n = self.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                let lhs = self.target[x] * p.get(x, y);
                let rhs = self.target[y] * p.get(y, x);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// `sum_y d(x, y) |a(x, y) - at(x, y)| Q(x, y)`, which dominates
    /// `W(P_a(x, .), P_at(x, .))`.
    pub fn lemma_bound(&self, alpha_t: &[f64], space: &FiniteMetricSpace, x: usize) -> Result<f64> {
        let n = self.len();
        space.ensure_len(n)?;
        check_acceptance(alpha_t, n)?;
        Ok((0..n)
            .map(|y| space.dist(x, y) * (self.acceptance(x, y) - alpha_t[x * n + y]).abs() * self.q.get(x, y))
            .sum())
    }

    /// `max_x lemma_bound(x) / Vt(x)`.
    pub fn gamma_from_acceptance(
        &self,
        alpha_t: &[f64],
        space: &FiniteMetricSpace,
        vt: &WeightFunction,
    ) -> Result<f64> {
        self.q.ensure_len(vt.len())?;
        (0..self.len())
            .map(|x| Ok(self.lemma_bound(alpha_t, space, x)? / vt[x]))
            .try_fold(0.0, |acc: f64, v: Result<f64>| Ok(acc.max(v?)))
    }

    /// `max_z sum_y (V(y)/V(z) + 1) E(z, y) Q(z, y)`.
    pub fn delta_v_transfer(&self, alpha_t: &[f64], v: &WeightFunction) -> Result<f64> {
        let n = self.len();
        self.q.ensure_len(v.len())?;
        check_acceptance(alpha_t, n)?;
        Ok((0..n)
            .map(|z| {
                (0..n)
                    .map(|y| {
                        (v[y] / v[z] + 1.0) * (self.acceptance(z, y) - alpha_t[z * n + y]).abs() * self.q.get(z, y)
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }
}

/// `1 + max_x sum_y V(y)/V(x) Q(x, y)`.
pub fn finite_lambda(q: &FiniteKernel, v: &WeightFunction) -> Result<f64> {
    let qv = q.apply_function(v.values())?;
    Ok(1.0 + qv.iter().zip(v.values()).map(|(a, b)| a / b).fold(0.0, f64::max))
}

/// `mu(G)` and `D(G) = max_{x in G} sum_y d(x, y) mu(y)` for the
/// independent-proposal example.
pub fn independent_set_constants(
    mu: &DiscreteDistribution,
    set: &[bool],
    space: &FiniteMetricSpace,
) -> Result<(f64, f64)> {
    mu.ensure_len(set.len())?;
    space.ensure_len(set.len())?;
    let mass = (0..set.len()).filter(|&x| set[x]).map(|x| mu[x]).sum();
    let d = (0..set.len())
        .filter(|&x| set[x])
        .map(|x| (0..set.len()).map(|y| space.dist(x, y) * mu[y]).sum::<f64>())
        .fold(0.0, f64::max);
    Ok((mass, d))
}

fn check_acceptance(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: a.len(),
        });
    }
    if let Some(v) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid(format!("acceptance {v} outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::pow_n;
    use crate::kernels::{fit_geometric_constants_in, stationary_distribution, ContractionMetric};
    use crate::mh::independent_mh_perturbation_bound;
    use crate::otcore::wasserstein1;

    fn six_state() -> (FiniteMh, FiniteMetricSpace) {
        let n: i32 = 6;
        let rows = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let d = (x - y).unsigned_abs();
                        if d <= 1 {
                            1.0
                        } else if d == 2 {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<f64>>()
            })
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        let q = FiniteKernel::new(rows).unwrap();
        let target = DiscreteDistribution::from_unnormalized(vec![1.0, 2.0, 4.0, 3.0, 1.5, 0.5]).unwrap();
        let space = FiniteMetricSpace::on_line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        (FiniteMh::new(q, target).unwrap(), space)
    }

    #[test]
    fn exact_kernel_is_reversible() {
        let (mh, _) = six_state();
        assert!(mh.detailed_balance_residual() <= 1e-12);
        let pi = stationary_distribution(&mh.kernel()).unwrap();
        for (a, b) in pi.weights().iter().zip(mh.target().weights()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn lemma_holds_at_every_state() {
        let (mh, space) = six_state();
        let at = mh
            .perturbed_acceptance(&FinitePerturbation::UniformNoise { s: 0.2 })
            .unwrap();
        let p = mh.kernel();
        let pt = mh.kernel_with(&at).unwrap();
        for x in 0..mh.len() {
            let w = wasserstein1(&p.row_distribution(x), &pt.row_distribution(x), &space).unwrap();
            assert!(w <= mh.lemma_bound(&at, &space, x).unwrap() + 1e-12);
        }
        let none = mh.perturbed_acceptance(&FinitePerturbation::None).unwrap();
        assert_eq!(
            mh.gamma_from_acceptance(&none, &space, &WeightFunction::ones(6))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn delta_v_transfer_is_exact_on_finite_spaces() {
        let (mh, _) = six_state();
        let v = WeightFunction::new(vec![1.0, 1.2, 1.5, 2.0, 2.6, 3.4]).unwrap();
        let at = mh
            .perturbed_acceptance(&FinitePerturbation::UniformNoise { s: 0.1 })
            .unwrap();
        let dv = mh.delta_v_transfer(&at, &v).unwrap();
        let p = mh.kernel();
        let pt = mh.kernel_with(&at).unwrap();
        let est = crate::kernels::fit_drift_l(&p, &v, 0.9).unwrap();
        let ptv = pt.apply_function(v.values()).unwrap();
        for x in 0..6 {
            assert!(ptv[x] <= (est.delta + dv) * v[x] + est.l + 1e-12);
        }
        let ones = mh.delta_v_transfer(&at, &WeightFunction::ones(6)).unwrap();
        assert!(ones <= 0.2 + 1e-12);
        assert_eq!(finite_lambda(mh.proposal(), &WeightFunction::ones(6)).unwrap(), 2.0);
    }

    #[test]
    fn indicator_set_accepts_everything_from_the_set() {
        let (mh, _) = six_state();
        let set = vec![true, false, false, false, false, false];
        let at = mh.perturbed_acceptance(&FinitePerturbation::IndicatorSet(set)).unwrap();
        assert!(at[..6].iter().all(|&a| a == 1.0));
        assert!(mh
            .perturbed_acceptance(&FinitePerturbation::Explicit(vec![1.5; 36]))
            .is_err());
    }

    #[test]
    fn independent_proposal_example() {
        let mu = DiscreteDistribution::from_unnormalized(vec![3.0, 1.0, 2.0, 2.0, 1.0]).unwrap();
        let target = DiscreteDistribution::from_unnormalized(vec![1.0, 3.0, 2.0, 1.0, 2.0]).unwrap();
        let q = FiniteKernel::rank_one(&mu);
        let mh = FiniteMh::new(q, target).unwrap();
        let space = FiniteMetricSpace::on_line(&[0.0, 0.5, 1.5, 2.0, 3.5]).unwrap();
        let set = vec![false, true, false, false, true];
        let (mass, d) = independent_set_constants(&mu, &set, &space).unwrap();
        let at = mh.perturbed_acceptance(&FinitePerturbation::IndicatorSet(set)).unwrap();
        let p = mh.kernel();
        let pt = mh.kernel_with(&at).unwrap();
        let est = fit_geometric_constants_in(&p, ContractionMetric::Base(&space), 8, 30).unwrap();
        let bound = independent_mh_perturbation_bound(est.c, est.rho, mass, d).unwrap();
        let (mut a, mut b) = (mu.clone(), mu.clone());
        for n in 0..=40 {
            let w = wasserstein1(&a, &b, &space).unwrap();
            assert!(w <= bound + 1e-9, "n = {n}: {w} > {bound}");
            a = p.push_forward(&a).unwrap();
            b = pt.push_forward(&b).unwrap();
        }
        assert!(est.bound_at(3) >= pow_n(est.rho, 3) * est.c - 1e-15);
    }
}
