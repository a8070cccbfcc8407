//! End-to-end check of the bounds on finite chains: every hypothesis is
//! established exactly, then each exact distance is tabulated against
//! the bound.

use super::{
    geom2_kappa, geom3_bound, geom3_stationary_bound, kappa, stationary_wasserstein_bound, thm31_bound, BoundInputs,
    PerturbationReport, Theorem,
};
use crate::error::{invalid, Inapplicable, Result};
use crate::kernels::{
    evolve, fit_drift_l, fit_geometric_constants, fit_geometric_constants_in, kernel_gamma_tv, kernel_gamma_vnorm,
    kernel_gamma_wasserstein, stationary_distribution, verify_drift, ContractionMetric, DriftEstimate,
    ErgodicityEstimate, FiniteKernel, DEFAULT_CERT_POWER,
};
use crate::otcore::{
    total_variation, vnorm_distance, wasserstein1, DiscreteDistribution, FiniteMetricSpace, WeightFunction,
};

/// An ideal kernel `p`, a perturbation `pt`, and everything the bounds
/// are stated over.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteInstance {
    pub p: FiniteKernel,
    pub pt: FiniteKernel,
    pub space: FiniteMetricSpace,
    /// Weight function of the V-uniform ergodicity of `p`.
    pub v: WeightFunction,
    /// Lyapunov function of `pt`.
    pub vt: WeightFunction,
    pub p0: DiscreteDistribution,
    pub pt0: DiscreteDistribution,
}

impl FiniteInstance {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p.len();
        self.pt.ensure_len(n)?;
        self.space.ensure_len(n)?;
        for len in [self.v.len(), self.vt.len(), self.p0.len(), self.pt0.len()] {
            self.p.ensure_len(len)?;
        }
        Ok(())
    }
}

/// How `kappa` bounds the moments `pt_i(Vt)` along the perturbed chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaMode {
    /// `max{pt0(Vt), L / (1 - delta)}`.
    #[default]
    Drift,
    /// `max_{i <= n} pt_i(Vt)`, computed exactly along the chain.
    RunningMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Drift rate for which the smallest `L` is fitted.
    pub delta: f64,
    /// Power used to certify `(C, rho)`.
    pub m: usize,
    /// Horizon of the direct re-check of the certificate.
    pub n_check: usize,
    pub kappa_mode: KappaMode,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            delta: 0.5,
            m: DEFAULT_CERT_POWER,
            n_check: 30,
            kappa_mode: KappaMode::Drift,
        }
    }
}

/// Tabulates the exact distance against the selected bound for
/// `n = 0..=n_max` (a single `n = 0` row for the stationary variants).
pub fn verify_on_finite(
    inst: &FiniteInstance,
    n_max: usize,
    which: Theorem,
    opts: &VerifyOptions,
) -> Result<PerturbationReport> {
    inst.validate()?;
    match which {
        Theorem::Thm31 => wasserstein_report(inst, n_max, opts, false),
        Theorem::TrivialLyapunov => wasserstein_report(inst, n_max, opts, true),
        Theorem::Stationary => stationary_report(inst, opts),
        Theorem::Geom1 => vnorm_report(inst, n_max, opts, false),
        Theorem::Geom2 => vnorm_report(inst, n_max, opts, true),
        Theorem::Geom3 => geom3_report(inst, n_max, opts),
        Theorem::Geom3Stationary => geom3_stationary_report(inst, opts),
        Theorem::Ar1 | Theorem::MetroGeom => Err(invalid(format!("{} is not a finite-state theorem", which.name()))),
    }
}

fn drift_of(p: &FiniteKernel, v: &WeightFunction, delta: f64) -> Result<DriftEstimate> {
    let est = fit_drift_l(p, v, delta)?;
    let check = verify_drift(p, &est)?;
    if !check.ok {
        return Err(Inapplicable::new(
            "drift condition",
            format!("slack {} at state {}", check.worst_slack, check.argmax),
        )
        .into());
    }
    Ok(est)
}

/// `kappa_n` for each `n <= n_max`.
fn kappas(
    mode: KappaMode,
    pt: &FiniteKernel,
    pt0: &DiscreteDistribution,
    v: &WeightFunction,
    base: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    match mode {
        KappaMode::Drift => Ok(vec![base; n_max + 1]),
        KappaMode::RunningMax => {
            let mut run: f64 = 1.0;
            evolve(pt0, pt, n_max)?
                .iter()
                .map(|d| {
                    run = run.max(d.expect(v.values())?);
                    Ok(run)
                })
                .collect()
        }
    }
}

fn with_cert(report: PerturbationReport, est: &ErgodicityEstimate) -> PerturbationReport {
    report.constant("C", est.c).constant("rho", est.rho)
}

fn wasserstein_report(
    inst: &FiniteInstance,
    n_max: usize,
    opts: &VerifyOptions,
    trivial: bool,
) -> Result<PerturbationReport> {
    let est = fit_geometric_constants_in(&inst.p, ContractionMetric::Base(&inst.space), opts.m, opts.n_check)?;
    let ones = WeightFunction::ones(inst.len());
    let vt = if trivial { &ones } else { &inst.vt };
    let drift = if trivial {
        // Vt = 1 satisfies the drift condition with L = 1 - delta.
        DriftEstimate {
            delta: opts.delta,
            l: 1.0 - opts.delta,
            v: ones.clone(),
        }
    } else {
        drift_of(&inst.pt, vt, opts.delta)?
    };
    let gamma = kernel_gamma_wasserstein(&inst.p, &inst.pt, &inst.space, vt)?;
    let base = kappa(inst.pt0.expect(vt.values())?, drift.l, drift.delta)?;
    let ks = kappas(opts.kappa_mode, &inst.pt, &inst.pt0, vt, base, n_max)?;
    let w0 = wasserstein1(&inst.p0, &inst.pt0, &inst.space)?;

    let which = if trivial {
        Theorem::TrivialLyapunov
    } else {
        Theorem::Thm31
    };
    let mut report = with_cert(PerturbationReport::new(which), &est)
        .constant("delta", drift.delta)
        .constant("L", drift.l)
        .constant("gamma", gamma)
        .constant("kappa", base);
    let p = evolve(&inst.p0, &inst.p, n_max)?;
    let q = evolve(&inst.pt0, &inst.pt, n_max)?;
    for n in 0..=n_max {
        let d = wasserstein1(&p[n], &q[n], &inst.space)?;
        let b = thm31_bound(&BoundInputs {
            c: est.c,
            rho: est.rho,
            delta: drift.delta,
            l: drift.l,
            gamma,
            kappa: ks[n],
            n: n as u64,
            w0,
        })?;
        report.push(n as u64, d, b);
    }
    Ok(report)
}

fn stationary_report(inst: &FiniteInstance, opts: &VerifyOptions) -> Result<PerturbationReport> {
    let est = fit_geometric_constants_in(&inst.p, ContractionMetric::Base(&inst.space), opts.m, opts.n_check)?;
    let drift = drift_of(&inst.pt, &inst.vt, opts.delta)?;
    let gamma = kernel_gamma_wasserstein(&inst.p, &inst.pt, &inst.space, &inst.vt)?;
    let pi = stationary_distribution(&inst.p)?;
    let pit = stationary_distribution(&inst.pt)?;
    let d = wasserstein1(&pi, &pit, &inst.space)?;
    let b = stationary_wasserstein_bound(est.c, est.rho, gamma, drift.l, drift.delta)?;
    let mut report = with_cert(PerturbationReport::new(Theorem::Stationary), &est)
        .constant("delta", drift.delta)
        .constant("L", drift.l)
        .constant("gamma", gamma);
    report.push(0, d, b);
    Ok(report)
}

fn vnorm_report(
    inst: &FiniteInstance,
    n_max: usize,
    opts: &VerifyOptions,
    ideal_drift: bool,
) -> Result<PerturbationReport> {
    let est = fit_geometric_constants(&inst.p, &inst.v, opts.m, opts.n_check)?;
    let (which, drift, gamma, base, lyap) = if ideal_drift {
        // The drift of the ideal kernel in V transfers to the perturbed one.
        let drift = drift_of(&inst.p, &inst.v, opts.delta)?;
        let gamma = kernel_gamma_vnorm(&inst.p, &inst.pt, &inst.v, &inst.v)?;
        if gamma + drift.delta >= 1.0 {
            return Err(Inapplicable::new(
                "geom2",
                format!("gamma + delta = {} must be below 1", gamma + drift.delta),
            )
            .into());
        }
        let base = geom2_kappa(inst.pt0.expect(inst.v.values())?, drift.l, drift.delta, gamma)?;
        (Theorem::Geom2, drift, gamma, base, &inst.v)
    } else {
        let drift = drift_of(&inst.pt, &inst.vt, opts.delta)?;
        let gamma = kernel_gamma_vnorm(&inst.p, &inst.pt, &inst.v, &inst.vt)?;
        let base = kappa(inst.pt0.expect(inst.vt.values())?, drift.l, drift.delta)?;
        (Theorem::Geom1, drift, gamma, base, &inst.vt)
    };
    let ks = kappas(opts.kappa_mode, &inst.pt, &inst.pt0, lyap, base, n_max)?;
    let w0 = vnorm_distance(&inst.p0, &inst.pt0, &inst.v)?;

    let mut report = with_cert(PerturbationReport::new(which), &est)
        .constant("delta", drift.delta)
        .constant("L", drift.l)
        .constant("gamma", gamma)
        .constant("kappa", base);
    let p = evolve(&inst.p0, &inst.p, n_max)?;
    let q = evolve(&inst.pt0, &inst.pt, n_max)?;
    for n in 0..=n_max {
        let d = vnorm_distance(&p[n], &q[n], &inst.v)?;
        let b = thm31_bound(&BoundInputs {
            c: est.c,
            rho: est.rho,
            delta: drift.delta,
            l: drift.l,
            gamma,
            kappa: ks[n],
            n: n as u64,
            w0,
        })?;
        report.push(n as u64, d, b);
    }
    Ok(report)
}

/// Constants for the total-variation bounds: contraction in `d_Vt`, a
/// drift of `pt` with rate `delta`, and `P Vt <= Vt + L` for the ideal
/// kernel with the same `L`.
fn geom3_constants(inst: &FiniteInstance, opts: &VerifyOptions) -> Result<(ErgodicityEstimate, DriftEstimate, f64)> {
    let est = fit_geometric_constants(&inst.p, &inst.vt, opts.m, opts.n_check)?;
    let mut drift = drift_of(&inst.pt, &inst.vt, opts.delta)?;
    let pv = inst.p.apply_function(inst.vt.values())?;
    let l_ideal = pv.iter().zip(inst.vt.values()).map(|(a, b)| a - b).fold(0.0, f64::max);
    drift.l = drift.l.max(l_ideal);
    let ideal = DriftEstimate {
        delta: 1.0,
        l: drift.l,
        v: inst.vt.clone(),
    };
    let check = verify_drift(&inst.p, &ideal)?;
    if !check.ok {
        return Err(Inapplicable::new("geom3", format!("ideal kernel drift fails at state {}", check.argmax)).into());
    }
    let gamma = kernel_gamma_tv(&inst.p, &inst.pt, &inst.vt)?;
    Ok((est, drift, gamma))
}

fn geom3_report(inst: &FiniteInstance, n_max: usize, opts: &VerifyOptions) -> Result<PerturbationReport> {
    let (est, drift, gamma) = geom3_constants(inst, opts)?;
    let base = kappa(inst.pt0.expect(inst.vt.values())?, drift.l, drift.delta)?;
    let ks = kappas(opts.kappa_mode, &inst.pt, &inst.pt0, &inst.vt, base, n_max)?;
    let w0 = vnorm_distance(&inst.p0, &inst.pt0, &inst.vt)?;
    // Evaluated once up front so an inapplicable gamma fails before any work.
    geom3_bound(est.c, est.rho, 0, w0, gamma, drift.delta, drift.l, base)?;

    let mut report = with_cert(PerturbationReport::new(Theorem::Geom3), &est)
        .constant("delta", drift.delta)
        .constant("L", drift.l)
        .constant("gamma", gamma)
        .constant("kappa", base);
    let p = evolve(&inst.p0, &inst.p, n_max)?;
    let q = evolve(&inst.pt0, &inst.pt, n_max)?;
    for n in 0..=n_max {
        let d = total_variation(&p[n], &q[n])?;
        let b = geom3_bound(est.c, est.rho, n as u64, w0, gamma, drift.delta, drift.l, ks[n])?;
        report.push(n as u64, d, b);
    }
    Ok(report)
}

fn geom3_stationary_report(inst: &FiniteInstance, opts: &VerifyOptions) -> Result<PerturbationReport> {
    let (est, drift, gamma) = geom3_constants(inst, opts)?;
    let b = geom3_stationary_bound(est.c, est.rho, gamma, drift.delta, drift.l)?;
    let pi = stationary_distribution(&inst.p)?;
    let pit = stationary_distribution(&inst.pt)?;
    let d = total_variation(&pi, &pit)?;
    let mut report = with_cert(PerturbationReport::new(Theorem::Geom3Stationary), &est)
        .constant("delta", drift.delta)
        .constant("L", drift.l)
        .constant("gamma", gamma);
    report.push(0, d, b);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn instance(eps: f64) -> FiniteInstance {
        let p = FiniteKernel::new(vec![vec![0.5, 0.3, 0.2], vec![0.3, 0.4, 0.3], vec![0.2, 0.3, 0.5]]).unwrap();
        let pt = FiniteKernel::new(vec![
            vec![0.5 - eps, 0.3, 0.2 + eps],
            vec![0.3, 0.4, 0.3],
            vec![0.2, 0.3 + eps, 0.5 - eps],
        ])
        .unwrap();
        FiniteInstance {
            p,
            pt,
            space: FiniteMetricSpace::on_line(&[0.0, 1.0, 2.5]).unwrap(),
            v: WeightFunction::new(vec![1.0, 1.5, 2.0]).unwrap(),
            vt: WeightFunction::new(vec![1.0, 1.5, 2.0]).unwrap(),
            p0: DiscreteDistribution::dirac(3, 0).unwrap(),
            pt0: DiscreteDistribution::dirac(3, 2).unwrap(),
        }
    }

    #[test]
    fn identical_kernels_give_zero_distance() {
        let mut inst = instance(0.0);
        inst.pt0 = inst.p0.clone();
        for which in [Theorem::Thm31, Theorem::TrivialLyapunov, Theorem::Geom1, Theorem::Geom2] {
            let r = verify_on_finite(&inst, 10, which, &VerifyOptions::default()).unwrap();
            assert!(r.rows.iter().all(|row| row.distance.abs() < 1e-12 && row.slack >= 0.0));
        }
        // gamma = 0 is outside the range of the total-variation bound.
        assert!(matches!(
            verify_on_finite(&inst, 10, Theorem::Geom3, &VerifyOptions::default()),
            Err(Error::Inapplicable(_))
        ));
    }

    #[test]
    fn perturbed_instance_is_sound_for_every_theorem() {
        let inst = instance(0.05);
        for mode in [KappaMode::Drift, KappaMode::RunningMax] {
            let opts = VerifyOptions {
                kappa_mode: mode,
                ..VerifyOptions::default()
            };
            for which in Theorem::FINITE {
                let r = verify_on_finite(&inst, 30, which, &opts).unwrap();
                assert!(r.holds(1e-9), "{which:?}: {}", r.min_slack());
                let rows = if matches!(which, Theorem::Stationary | Theorem::Geom3Stationary) {
                    1
                } else {
                    31
                };
                assert_eq!(r.rows.len(), rows);
            }
        }
    }

    #[test]
    fn running_max_kappa_is_no_larger() {
        let inst = instance(0.05);
        let a = verify_on_finite(&inst, 20, Theorem::Thm31, &VerifyOptions::default()).unwrap();
        let b = verify_on_finite(
            &inst,
            20,
            Theorem::Thm31,
            &VerifyOptions {
                kappa_mode: KappaMode::RunningMax,
                ..VerifyOptions::default()
            },
        )
        .unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(y.bound <= x.bound + 1e-15);
        }
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let mut inst = instance(0.05);
        inst.vt = WeightFunction::ones(2);
        assert!(matches!(
            verify_on_finite(&inst, 5, Theorem::Thm31, &VerifyOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
