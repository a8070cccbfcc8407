use crate::error::{Error, Result};

const METRIC_TOL: f64 = 1e-12;

/// Finite set of labelled points with a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Builds a space from labels and a dense row-major distance matrix,
    /// checking the metric axioms.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if dist.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: dist.len(),
            });
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &dist {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let space = Self { labels, dist: flat };
        space.check_axioms()?;
        Ok(space)
    }

    /// Unlabelled space from a distance matrix; points are named by index.
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(labels, dist)
    }

    /// Points on the real line with `d(x, y) = |x - y|`.
    pub fn on_line(xs: &[f64]) -> Result<Self> {
        let dist = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
        let labels = xs.iter().map(|x| x.to_string()).collect();
        Self::new(labels, dist)
    }

    /// Points in Euclidean space.
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        let dist = points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
                    .collect()
            })
            .collect();
        Self::from_matrix(dist)
    }

    /// The trivial metric `2 * 1{x != y}` on `n` points, under which W1
    /// coincides with total variation.
    pub fn trivial(n: usize) -> Result<Self> {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 2.0 }).collect())
            .collect();
        Self::from_matrix(dist)
    }

    pub(crate) fn from_flat_unchecked(labels: Vec<String>, dist: Vec<f64>) -> Self {
        debug_assert_eq!(dist.len(), labels.len() * labels.len());
        Self { labels, dist }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let d = self.dist(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) = {d} is not a finite nonnegative number"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidMetric(format!("d({i},{i}) = {d} != 0")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = 0 for distinct points")));
                }
                if (d - self.dist(j, i)).abs() > METRIC_TOL * d.max(1.0) {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist(i, j);
                for k in 0..n {
                    let through = dij + self.dist(j, k);
                    if self.dist(i, k) > through + METRIC_TOL * through.max(1.0) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
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
