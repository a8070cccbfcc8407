use proptest::prelude::*;
use wperturb_core::bounds::{verify_on_finite, FiniteInstance, VerifyOptions};
use wperturb_core::instance::{generate_random_mh_instance, MhInstance};
use wperturb_core::kernels::{fit_geometric_constants_in, ContractionMetric};
use wperturb_core::mh::finite::FiniteMh;
use wperturb_core::mh::{
    approx_mh_transition, lambda_constant, metro_geom_bound, mh_fit_drift, mh_metro_geom_report, ExponentialTarget,
    MetroGeomConstants, Perturbation,
};
use wperturb_core::otcore::wasserstein1;
use wperturb_core::quadrature::ABS_TOL;
use wperturb_core::rng::stream_rng;
use wperturb_core::{DiscreteDistribution, Error, FiniteKernel, FiniteMetricSpace, Theorem, WeightFunction};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn perturbed_acceptance_is_a_probability(x in 0.0f64..8.0, s in 0.0f64..=1.0, seed in any::<u64>()) {
        let problem = ExponentialTarget::new(1.0).unwrap();
        let pert = Perturbation::uniform_noise(s).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        let mut state = x;
        for _ in 0..20 {
            let t = approx_mh_transition(&problem, &pert, state, &mut rng);
            prop_assert!((0.0..=1.0).contains(&t.alpha_t));
            prop_assert!((0.0..=1.0).contains(&t.alpha));
            state = t.state;
        }
    }

    #[test]
    fn lemma_and_detailed_balance(seed in any::<u64>(), size in 2usize..=12) {
        let inst = generate_random_mh_instance(seed, size).unwrap();
        prop_assert!(inst.mh.detailed_balance_residual() <= 1e-12);
        let at = inst.mh.perturbed_acceptance(&inst.perturbation).unwrap();
        let p = inst.mh.kernel();
        let pt = inst.mh.kernel_with(&at).unwrap();
        for x in 0..size {
            let w = wasserstein1(&p.row_distribution(x), &pt.row_distribution(x), &inst.space).unwrap();
            prop_assert!(w <= inst.mh.lemma_bound(&at, &inst.space, x).unwrap() + 1e-9);
        }
    }

    #[test]
    fn wasserstein_bound_for_finite_mh(seed in any::<u64>(), size in 2usize..=8, start in 0usize..8) {
        let inst = mixing_instance(seed, size);
        let at = inst.mh.perturbed_acceptance(&inst.perturbation).unwrap();
        let p0 = DiscreteDistribution::dirac(size, start % size).unwrap();
        let fin = FiniteInstance {
            p: inst.mh.kernel(),
            pt: inst.mh.kernel_with(&at).unwrap(),
            space: inst.space.clone(),
            v: WeightFunction::ones(size),
            vt: WeightFunction::ones(size),
            p0: p0.clone(),
            pt0: p0,
        };
        let report = verify_on_finite(&fin, 30, Theorem::Thm31, &VerifyOptions::default()).unwrap();
        prop_assert!(report.min_slack() >= -1e-9, "{}", report.min_slack());
    }
}

#[test]
fn lambda_of_the_exponential_toy() {
    let problem = ExponentialTarget::new(1.0).unwrap();
    let grid: Vec<f64> = (0..=400).map(|k| k as f64 * 0.05).collect();
    let lam = lambda_constant(&problem, &f64::exp, &grid, ABS_TOL).unwrap();
    let exact = 1.0 + (1f64.exp() - (-1f64).exp()) / 2.0;
    assert!((lam - exact).abs() < 1e-6);
    assert!((lam - 2.175_20).abs() < 1e-5);
    assert!(lam <= 1.0 + 1f64.exp());
}

#[test]
fn metro_geom_threshold_is_strict() {
    let (delta, lambda) = (0.7, 2.0);
    let edge = (1.0 - delta) / lambda;
    assert!(matches!(
        metro_geom_bound(1.0, 0.5, 5, edge, lambda, delta, 1.0, 1.0),
        Err(Error::Inapplicable(_))
    ));
    assert!(metro_geom_bound(1.0, 0.5, 5, edge * (1.0 - 1e-9), lambda, delta, 1.0, 1.0).is_ok());
}

#[test]
fn report_tracks_noise_level() {
    let problem = ExponentialTarget::new(1.0).unwrap();
    let v = |x: f64| (0.5 * x).exp();
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1).collect();
    let (delta, l) = mh_fit_drift(&problem, &v, &grid, 1.0, ABS_TOL).unwrap();
    let lambda = lambda_constant(&problem, &v, &grid, ABS_TOL).unwrap();
    assert!(delta < 1.0 && l > 0.0 && lambda > 1.0);
    let consts = MetroGeomConstants {
        c: 2.0,
        rho: 0.9,
        delta,
        l,
        lambda,
    };
    let run = |s: f64| {
        mh_metro_geom_report(
            &problem,
            &Perturbation::uniform_noise(s).unwrap(),
            &consts,
            1.0,
            0.0,
            10,
            4_000,
            17,
        )
        .unwrap()
    };
    let quiet = run(0.0);
    assert!(quiet.rows.iter().all(|r| r.distance == 0.0 && r.bound == 0.0));
    let noisy = run(0.01);
    assert_eq!(noisy.rows.len(), 11);
    assert!(noisy.rows.iter().skip(1).all(|r| r.bound > 0.0 && r.se.is_some()));
    let too_loud = (1.0 - delta) / lambda * 1.01;
    assert!(matches!(
        mh_metro_geom_report(
            &problem,
            &Perturbation::uniform_noise(too_loud).unwrap(),
            &consts,
            1.0,
            0.0,
            10,
            4_000,
            17
        ),
        Err(Error::Inapplicable(_))
    ));
}

/// A random instance whose proposal is half independent-uniform, on the
/// grid `0, 1, ..., size - 1`, so that the exact chain contracts.
fn mixing_instance(seed: u64, size: usize) -> MhInstance {
    let inst = generate_random_mh_instance(seed, size).unwrap();
    let q = inst.mh.proposal();
    let rows = (0..size)
        .map(|x| (0..size).map(|y| 0.5 * q.get(x, y) + 0.5 / size as f64).collect())
        .collect();
    let grid: Vec<f64> = (0..size).map(|k| k as f64).collect();
    MhInstance {
        mh: FiniteMh::new(FiniteKernel::new(rows).unwrap(), inst.mh.target().clone()).unwrap(),
        perturbation: inst.perturbation,
        space: FiniteMetricSpace::on_line(&grid).unwrap(),
    }
}

#[test]
fn mixing_instances_are_certified() {
    // Guards the property above against a generator that stops contracting.
    for seed in 0..200u64 {
        let inst = mixing_instance(seed, 2 + (seed as usize) % 7);
        fit_geometric_constants_in(&inst.mh.kernel(), ContractionMetric::Base(&inst.space), 8, 30).unwrap();
    }
}
