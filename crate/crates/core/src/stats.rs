//! Small statistical helpers for the Monte-Carlo checks.

use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a statistic from `batches` contiguous batches: the
/// spread of the batch values divided by `sqrt(batches)`.
pub fn batch_se(values: &[f64]) -> f64 {
    mean_se(values).1
}

/// Splits `xs` into `batches` contiguous chunks of equal size (dropping the
/// remainder).
pub fn batches(xs: &[f64], batches: usize) -> Vec<&[f64]> {
    let size = xs.len() / batches.max(1);
    if size == 0 {
        return Vec::new();
    }
    xs.chunks_exact(size).take(batches).collect()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// `E|m + s Z|` for `Z ~ N(0, 1)`.
pub fn folded_normal_mean(m: f64, s: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 {
        return m.abs();
    }
    let r = m / s;
    s * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * r * r).exp() + m * (1.0 - 2.0 * normal_cdf(-r))
}

/// Histogram estimate of `sum |p - q|` between two samples, using `bins`
/// equal-width bins over the pooled range. Biased; only for comparisons.
pub fn histogram_tv(xs: &[f64], ys: &[f64], bins: usize) -> f64 {
    let lo = xs.iter().chain(ys).copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().chain(ys).copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() || ys.is_empty() || !(hi > lo) {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let count = |s: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in s {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            h[k] += 1.0;
        }
        let n = s.len() as f64;
        h.iter_mut().for_each(|c| *c /= n);
        h
    };
    let (a, b) = (count(xs), count(ys));
    a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum()
}
