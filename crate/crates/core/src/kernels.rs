//! Finite-state transition kernels and the constants the bounds consume:
//! ergodicity coefficients, drift (Lyapunov) constants, certified
//! geometric contraction rates and one-step kernel differences.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::otcore::{
    self, dv_metric_labelled, tv_slices, vnorm_slices, DiscreteDistribution, FiniteMetricSpace, WeightFunction,
    MASS_TOL,
};

/// Residual tolerance for stationary distributions.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Slack tolerance of [`verify_drift`].
pub const DRIFT_TOL: f64 = 1e-10;
/// Smallest `L` returned by [`fit_drift_l`].
pub const MIN_DRIFT_L: f64 = 1e-12;
/// Default power used when certifying `(C, rho)`.
pub const DEFAULT_CERT_POWER: usize = 8;

/// Row-stochastic matrix over `n` states, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    n: usize,
    rows: Vec<f64>,
}

impl FiniteKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            // Reuses the distribution checks for sign and mass.
            DiscreteDistribution::new(row.clone())?;
            flat.extend_from_slice(row);
        }
        Ok(Self { n, rows: flat })
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Self { n, rows }
    }

    /// Every row equal to `row`.
    pub fn rank_one(row: &DiscreteDistribution) -> Self {
        let n = row.len();
        let rows = (0..n).flat_map(|_| row.weights().iter().copied()).collect();
        Self { n, rows }
    }

    pub(crate) fn from_flat_computed(n: usize, mut rows: Vec<f64>) -> Self {
        for r in rows.chunks_mut(n) {
            let d = DiscreteDistribution::from_computed(r.to_vec());
            r.copy_from_slice(d.weights());
        }
        Self { n, rows }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x * self.n..(x + 1) * self.n]
    }

    /// `delta_x P` as a distribution.
    pub fn row_distribution(&self, x: usize) -> DiscreteDistribution {
        DiscreteDistribution::from_computed(self.row(x).to_vec())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `(P f)(x) = sum_y P(x, y) f(y)`.
    pub fn apply_function(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.ensure_len(f.len())?;
        Ok((0..self.n)
            .map(|x| self.row(x).iter().zip(f).map(|(p, v)| p * v).sum())
            .collect())
    }

    /// `mu P`.
    pub fn push_forward(&self, mu: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        self.ensure_len(mu.len())?;
        let mut out = vec![0.0; self.n];
        for (x, &w) in mu.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(x)) {
                *o += w * p;
            }
        }
        Ok(DiscreteDistribution::from_computed(out))
    }

    pub fn power(&self, k: usize) -> FiniteKernel {
        let mut out = FiniteKernel::identity(self.n);
        for _ in 0..k {
            out = out.compose_unchecked(self);
        }
        out
    }

    fn compose_unchecked(&self, q: &FiniteKernel) -> FiniteKernel {
        let n = self.n;
        let mut rows = vec![0.0; n * n];
        for x in 0..n {
            let out = &mut rows[x * n..(x + 1) * n];
            for (z, &p) in self.row(x).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (o, qv) in out.iter_mut().zip(q.row(z)) {
                    *o += p * qv;
                }
            }
        }
        FiniteKernel::from_flat_computed(n, rows)
    }

    pub(crate) fn ensure_len(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

/// The kernel `P Q`.
pub fn compose(p: &FiniteKernel, q: &FiniteKernel) -> Result<FiniteKernel> {
    p.ensure_len(q.len())?;
    Ok(p.compose_unchecked(q))
}

/// `[p0, p0 P, ..., p0 P^n]`.
pub fn evolve(p0: &DiscreteDistribution, p: &FiniteKernel, n: usize) -> Result<Vec<DiscreteDistribution>> {
    p.ensure_len(p0.len())?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(p0.clone());
    for k in 0..n {
        let next = p.push_forward(&out[k])?;
        out.push(next);
    }
    Ok(out)
}

/// Unique `pi` with `pi P = pi`, by a direct linear solve.
pub fn stationary_distribution(p: &FiniteKernel) -> Result<DiscreteDistribution> {
    let n = p.len();
    // A = (I - P)^T; pi spans its kernel.
    let a = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - p.get(j, i)
    });
    let sv = a.clone().singular_values();
    let null_dim = sv.iter().filter(|&&s| s <= 1e-10).count();
    if null_dim > 1 {
        return Err(Error::NonUniqueStationary);
    }
    let mut m = a;
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = m.lu().solve(&rhs).ok_or(Error::NonUniqueStationary)?;
    if sol.iter().any(|&w| w < -STATIONARY_TOL) {
        return Err(Error::NonUniqueStationary);
    }
    let pi = DiscreteDistribution::from_computed(sol.iter().copied().collect());
    let residual = tv_slices(p.push_forward(&pi)?.weights(), pi.weights());
    if residual > STATIONARY_TOL {
        return Err(Error::NonUniqueStationary);
    }
    Ok(pi)
}

/// Generalized ergodicity coefficient
/// `tau(P) = max_{x != y} W(P(x,.), P(y,.)) / d(x, y)` under `metric`.
pub fn tau(p: &FiniteKernel, metric: &FiniteMetricSpace) -> Result<f64> {
    metric.ensure_len(p.len())?;
    let n = p.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    let rows: Vec<DiscreteDistribution> = (0..n).map(|x| p.row_distribution(x)).collect();
    let worst = pairs
        .par_iter()
        .map(|&(x, y)| {
            if p.row(x) == p.row(y) {
                return Ok(0.0);
            }
            let w = otcore::wasserstein1(&rows[x], &rows[y], metric)?;
            Ok(w / metric.dist(x, y))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst)
}

/// `tau_V(P) = max_{x != y} ||P(x,.) - P(y,.)||_V / (V(x) + V(y))`, which
/// equals [`tau`] under the metric `d_V`.
pub fn tau_v(p: &FiniteKernel, v: &WeightFunction) -> Result<f64> {
    p.ensure_len(v.len())?;
    let n = p.len();
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let num = vnorm_slices(p.row(x), p.row(y), v.values());
            worst = worst.max(num / (v[x] + v[y]));
        }
    }
    Ok(worst)
}

/// Which metric an [`ErgodicityEstimate`] certifies contraction in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricTag {
    /// The ground metric of the space.
    Base,
    /// `d_V` for a weight function `V`.
    Weighted,
    /// `2 * 1{x != y}`, i.e. total variation.
    Trivial,
}

impl MetricTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricTag::Base => "base",
            MetricTag::Weighted => "d_V",
            MetricTag::Trivial => "trivial",
        }
    }
}

/// Metric in which a contraction coefficient is measured.
#[derive(Debug, Clone, Copy)]
pub enum ContractionMetric<'a> {
    Base(&'a FiniteMetricSpace),
    Weighted(&'a WeightFunction),
}

impl ContractionMetric<'_> {
    pub fn tau(&self, p: &FiniteKernel) -> Result<f64> {
        match self {
            ContractionMetric::Base(space) => tau(p, space),
            ContractionMetric::Weighted(v) => tau_v(p, v),
        }
    }

    fn tag(&self) -> MetricTag {
        match self {
            ContractionMetric::Base(_) => MetricTag::Base,
            ContractionMetric::Weighted(v) if v.values().iter().all(|&x| x == 1.0) => MetricTag::Trivial,
            ContractionMetric::Weighted(_) => MetricTag::Weighted,
        }
    }
}

/// Certified constants with `tau(P^n) <= C rho^n` for every `n >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityEstimate {
    pub c: f64,
    pub rho: f64,
    pub metric: MetricTag,
    /// Horizon up to which the inequality was also checked directly.
    pub n_checked: usize,
}

impl ErgodicityEstimate {
    pub fn bound_at(&self, n: usize) -> f64 {
        self.c * crate::bounds::pow_n(self.rho, n as u64)
    }
}

/// Certifies `(C, rho)` in the `d_V` metric from the power `m`:
/// `rho = tau_V(P^m)^(1/m)` and `C = max_{j < m} tau_V(P^j) / rho^j`.
pub fn fit_geometric_constants(
    p: &FiniteKernel,
    v: &WeightFunction,
    m: usize,
    n_check: usize,
) -> Result<ErgodicityEstimate> {
    fit_geometric_constants_in(p, ContractionMetric::Weighted(v), m, n_check)
}

/// As [`fit_geometric_constants`] for any contraction metric.
///
/// Writing `n = q m + j` with `j < m`, submultiplicativity gives
/// `tau(P^n) <= tau(P^m)^q tau(P^j) <= C rho^n`, so the certificate holds
/// for all `n`; it is additionally re-checked for `n <= n_check`.
pub fn fit_geometric_constants_in(
    p: &FiniteKernel,
    metric: ContractionMetric<'_>,
    m: usize,
    n_check: usize,
) -> Result<ErgodicityEstimate> {
    if m == 0 {
        return Err(invalid("certification power m must be at least 1"));
    }
    let horizon = m.max(n_check);
    let mut taus = Vec::with_capacity(horizon + 1);
    let mut pk = FiniteKernel::identity(p.len());
    for k in 0..=horizon {
        if k > 0 {
            pk = compose(&pk, p)?;
        }
        taus.push(metric.tau(&pk)?);
    }
    let tau_m = taus[m];
    if tau_m >= 1.0 {
        return Err(Error::NoContraction { power: m, tau: tau_m });
    }
    let mut rho = tau_m.powf(1.0 / m as f64);
    if rho == 0.0 {
        // tau vanishes from step m on; only the first m - 1 powers matter.
        rho = (1..m).map(|j| taus[j].powf(1.0 / j as f64)).fold(0.0, f64::max);
        if rho >= 1.0 {
            rho = 0.5;
        }
    }
    let c = (0..m)
        .map(|j| {
            let r = crate::bounds::pow_n(rho, j as u64);
            if taus[j] == 0.0 {
                0.0
            } else {
                taus[j] / r
            }
        })
        .fold(0.0, f64::max);
    let est = ErgodicityEstimate {
        c,
        rho,
        metric: metric.tag(),
        n_checked: n_check,
    };
    for (n, &t) in taus.iter().enumerate().take(n_check + 1) {
        let bound = est.bound_at(n);
        if t > bound + 1e-9 {
            return Err(Error::CertificateFailed { n, tau: t, bound });
        }
    }
    Ok(est)
}

/// Drift constants with `(P V)(x) <= delta V(x) + L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub delta: f64,
    pub l: f64,
    pub v: WeightFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftCheck {
    pub ok: bool,
    /// `max_x [(PV)(x) - delta V(x) - L]`.
    pub worst_slack: f64,
    /// State attaining the worst slack (lowest index on ties).
    pub argmax: usize,
}

pub fn verify_drift(p: &FiniteKernel, est: &DriftEstimate) -> Result<DriftCheck> {
    let pv = p.apply_function(est.v.values())?;
    let mut worst = f64::NEG_INFINITY;
    let mut argmax = 0;
    for (x, (&pvx, &vx)) in pv.iter().zip(est.v.values()).enumerate() {
        let slack = pvx - est.delta * vx - est.l;
        if slack > worst {
            worst = slack;
            argmax = x;
        }
    }
    Ok(DriftCheck {
        ok: worst <= DRIFT_TOL,
        worst_slack: worst,
        argmax,
    })
}

/// Smallest admissible `L` for the chosen `delta`.
pub fn fit_drift_l(p: &FiniteKernel, v: &WeightFunction, delta: f64) -> Result<DriftEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("drift rate delta = {delta} must lie in (0, 1)")));
    }
    let pv = p.apply_function(v.values())?;
    let l = pv
        .iter()
        .zip(v.values())
        .map(|(pvx, vx)| pvx - delta * vx)
        .fold(MIN_DRIFT_L, f64::max);
    Ok(DriftEstimate { delta, l, v: v.clone() })
}

/// `max_x W(P(x,.), Pt(x,.)) / Vt(x)` under `metric`.
pub fn kernel_gamma_wasserstein(
    p: &FiniteKernel,
    pt: &FiniteKernel,
    metric: &FiniteMetricSpace,
    vt: &WeightFunction,
) -> Result<f64> {
    p.ensure_len(pt.len())?;
    p.ensure_len(vt.len())?;
    metric.ensure_len(p.len())?;
    let vals = (0..p.len())
        .into_par_iter()
        .map(|x| {
            let w = otcore::wasserstein1(&p.row_distribution(x), &pt.row_distribution(x), metric)?;
            Ok(w / vt[x])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `max_x ||P(x,.) - Pt(x,.)||_tv / Vt(x)`.
pub fn kernel_gamma_tv(p: &FiniteKernel, pt: &FiniteKernel, vt: &WeightFunction) -> Result<f64> {
    p.ensure_len(pt.len())?;
    p.ensure_len(vt.len())?;
    Ok((0..p.len())
        .map(|x| tv_slices(p.row(x), pt.row(x)) / vt[x])
        .fold(0.0, f64::max))
}

/// `max_x ||P(x,.) - Pt(x,.)||_V / Vt(x)`, the operator norm of `P - Pt`
/// from `B_V` to `B_Vt`.
pub fn kernel_gamma_vnorm(p: &FiniteKernel, pt: &FiniteKernel, v: &WeightFunction, vt: &WeightFunction) -> Result<f64> {
    p.ensure_len(pt.len())?;
    p.ensure_len(v.len())?;
    p.ensure_len(vt.len())?;
    Ok((0..p.len())
        .map(|x| vnorm_slices(p.row(x), pt.row(x), v.values()) / vt[x])
        .fold(0.0, f64::max))
}

/// `d_V` on an unlabelled space of the kernel's size.
pub fn dv_space(v: &WeightFunction) -> FiniteMetricSpace {
    dv_metric_labelled(v, (0..v.len()).map(|i| i.to_string()).collect())
}

/// Checks that two distributions agree to the mass tolerance.
pub fn approx_equal(a: &DiscreteDistribution, b: &DiscreteDistribution, tol: f64) -> bool {
    a.len() == b.len() && tv_slices(a.weights(), b.weights()) <= tol.max(MASS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> FiniteKernel {
        FiniteKernel::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    fn dist(w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        assert!(FiniteKernel::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(FiniteKernel::new(vec![vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn compose_with_identity_and_rank_one() {
        let p = two_state(0.3, 0.6);
        assert_eq!(compose(&p, &FiniteKernel::identity(2)).unwrap(), p);
        let r = dist(&[0.25, 0.75]);
        let q = FiniteKernel::rank_one(&r);
        let pq = compose(&q, &p).unwrap();
        let rq = p.push_forward(&r).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((pq.get(x, y) - rq[y]).abs() < 1e-15);
            }
        }
        assert!(compose(&p, &FiniteKernel::identity(3)).is_err());
    }

    #[test]
    fn evolve_by_hand() {
        let p = FiniteKernel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let path = evolve(&dist(&[1.0, 0.0]), &p, 2).unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path[1].weights(), &[0.5, 0.5]);
        assert_eq!(evolve(&dist(&[1.0, 0.0]), &p, 0).unwrap().len(), 1);
    }

    #[test]
    fn stationary_two_state_and_doubly_stochastic() {
        let pi = stationary_distribution(&two_state(0.3, 0.6)).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-12);
        let ds = FiniteKernel::new(vec![vec![0.2, 0.5, 0.3], vec![0.5, 0.2, 0.3], vec![0.3, 0.3, 0.4]]).unwrap();
        let u = stationary_distribution(&ds).unwrap();
        for w in u.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        for step in evolve(&u, &ds, 5).unwrap() {
            assert!(approx_equal(&step, &u, 1e-10));
        }
        assert_eq!(
            stationary_distribution(&FiniteKernel::identity(3)),
            Err(Error::NonUniqueStationary)
        );
    }

    #[test]
    fn tau_examples() {
        let line = FiniteMetricSpace::on_line(&[0.0, 1.0, 3.0]).unwrap();
        let q = FiniteKernel::rank_one(&dist(&[0.2, 0.3, 0.5]));
        assert_eq!(tau(&q, &line).unwrap(), 0.0);
        assert!((tau(&FiniteKernel::identity(3), &line).unwrap() - 1.0).abs() < 1e-15);
        let trivial = FiniteMetricSpace::trivial(2).unwrap();
        let p = two_state(0.3, 0.6);
        assert!((tau(&p, &trivial).unwrap() - 0.1).abs() < 1e-12);
        assert!((tau_v(&p, &WeightFunction::ones(2)).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(
            tau_v(&q, &WeightFunction::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn drift_examples() {
        let p = two_state(0.3, 0.6);
        let ones = WeightFunction::ones(2);
        let est = DriftEstimate {
            delta: 0.4,
            l: 0.6,
            v: ones.clone(),
        };
        assert!(verify_drift(&p, &est).unwrap().ok);
        let big = DriftEstimate {
            delta: 1.0 - 1e-9,
            l: 1e6,
            v: WeightFunction::new(vec![1.0, 5.0]).unwrap(),
        };
        assert!(verify_drift(&p, &big).unwrap().worst_slack < 0.0);

        let fit = fit_drift_l(&p, &ones, 0.3).unwrap();
        assert!((fit.l - 0.7).abs() < 1e-15);
        let v = WeightFunction::new(vec![1.0, 2.0]).unwrap();
        let fit = fit_drift_l(&FiniteKernel::identity(2), &v, 0.5).unwrap();
        assert_eq!(fit.l, 1.0);
        assert!(verify_drift(&FiniteKernel::identity(2), &fit).unwrap().ok);
        assert!(fit_drift_l(&p, &v, 1.0).is_err());

        // delta below max PV/V with L = 0 must fail, at the argmax state.
        let pv = p.apply_function(v.values()).unwrap();
        let ratio = (pv[0] / v[0]).max(pv[1] / v[1]);
        let bad = DriftEstimate {
            delta: ratio * 0.9,
            l: 0.0,
            v,
        };
        let check = verify_drift(&p, &bad).unwrap();
        assert!(!check.ok);
    }

    #[test]
    fn geometric_constants_examples() {
        let q = FiniteKernel::rank_one(&dist(&[0.2, 0.8]));
        let est = fit_geometric_constants(&q, &WeightFunction::new(vec![1.0, 3.0]).unwrap(), 1, 4).unwrap();
        assert_eq!(est.rho, 0.0);
        assert_eq!(est.c, 1.0);
        assert!(matches!(
            fit_geometric_constants(&FiniteKernel::identity(2), &WeightFunction::ones(2), 3, 3),
            Err(Error::NoContraction { .. })
        ));
        let p = FiniteKernel::new(vec![vec![0.7, 0.3], vec![0.6, 0.4]]).unwrap();
        let est = fit_geometric_constants(&p, &WeightFunction::ones(2), 1, 10).unwrap();
        assert!((est.rho - 0.1).abs() < 1e-12);
        assert!((est.c - 1.0).abs() < 1e-12);
        assert_eq!(est.metric, MetricTag::Trivial);
    }

    #[test]
    fn gamma_examples() {
        let line = FiniteMetricSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let p = FiniteKernel::new(vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.6, 0.2], vec![0.0, 0.5, 0.5]]).unwrap();
        let pt = FiniteKernel::new(vec![vec![0.4, 0.5, 0.1], vec![0.2, 0.6, 0.2], vec![0.0, 0.6, 0.4]]).unwrap();
        let ones = WeightFunction::ones(3);
        assert_eq!(kernel_gamma_wasserstein(&p, &p, &line, &ones).unwrap(), 0.0);
        assert_eq!(kernel_gamma_tv(&p, &p, &ones).unwrap(), 0.0);
        // Row 0 moves 0.1 mass by 2; row 2 moves 0.1 by 1.
        let g = kernel_gamma_wasserstein(&p, &pt, &line, &ones).unwrap();
        assert!((g - 0.2).abs() < 1e-12);
        let v = WeightFunction::new(vec![1.0, 1.5, 4.0]).unwrap();
        let g1 = kernel_gamma_wasserstein(&p, &pt, &line, &v).unwrap();
        let g2 = kernel_gamma_wasserstein(&p, &pt, &line, &v.scaled(2.0).unwrap()).unwrap();
        assert!(g2 <= g1);
        assert!((kernel_gamma_tv(&p, &pt, &ones).unwrap() - 0.2).abs() < 1e-12);
    }
}
