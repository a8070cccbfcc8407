use std::ops::Index;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOL: f64 = 1e-12;

/// Probability weights over the points of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights to unit mass.
    pub fn from_unnormalized(mut weights: Vec<f64>) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(weights)
    }

    pub fn dirac(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: at + 1,
            });
        }
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        Self::new(w)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Rounding-tolerant constructor for vectors produced by matrix
    /// arithmetic: tiny negative entries are clipped and the mass is
    /// renormalized.
    pub(crate) fn from_computed(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && (sum - 1.0).abs() > f64::EPSILON {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` against this distribution.
    pub fn expect(&self, f: &[f64]) -> Result<f64> {
        self.ensure_len(f.len())?;
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }

    pub(crate) fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: n,
            });
        }
        Ok(())
    }
}

impl Index<usize> for DiscreteDistribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// Lyapunov or weight function `V >= 1` on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    values: Vec<f64>,
}

impl WeightFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, &value) in values.iter().enumerate() {
            if value.is_nan() || value < 1.0 {
                return Err(Error::WeightBelowOne { index, value });
            }
        }
        Ok(Self { values })
    }

    /// `V = 1` everywhere.
    pub fn ones(n: usize) -> Self {
        Self { values: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

impl Index<usize> for WeightFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Joint distribution over pairs of points with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    n: usize,
    joint: Vec<f64>,
}

impl Coupling {
    pub(crate) fn from_flat(n: usize, joint: Vec<f64>) -> Self {
        debug_assert_eq!(joint.len(), n * n);
        Self { n, joint }
    }

    /// Product coupling `mu (x) nu`.
    pub fn independent(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<Self> {
        mu.ensure_len(nu.len())?;
        let n = mu.len();
        let joint = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| mu[i] * nu[j])
            .collect();
        Ok(Self { n, joint })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.n + j]
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).sum()).collect()
    }

    /// `sum_ij cost(i, j) * xi(i, j)`.
    pub fn cost(&self, cost: impl Fn(usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let m = self.get(i, j);
                if m != 0.0 {
                    total += m * cost(i, j);
                }
            }
        }
        total
    }
}
