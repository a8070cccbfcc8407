use wperturb_core::langevin::{
    grad_log_posterior, langevin_drift_check, langevin_drift_constants, langevin_final_bound,
    langevin_final_bound_from, langevin_step, langevin_tv_perturbation_bound, langevin_tv_proxy, noisy_grad,
    GibbsModel, LangevinParams, Statistic,
};
use wperturb_core::rng::stream_rng;
use wperturb_core::stats::mean_se;
use wperturb_core::Error;

fn ising(statistic: Statistic, m: usize) -> GibbsModel {
    let observed: Vec<f64> = (0..m).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
    GibbsModel::new(vec![-1.0, 1.0], statistic, observed, 1.0).unwrap()
}

/// `log pi_y` up to a constant, from a direct sum over all configurations.
fn brute_log_posterior(model: &GibbsModel, theta: f64) -> f64 {
    let m = model.nodes();
    let s = model.statistic();
    let z: f64 = (0..1usize << m)
        .map(|bits| {
            let y: Vec<f64> = (0..m).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            (theta * s.eval(&y)).exp()
        })
        .sum();
    theta * s.eval(model.observed()) - z.ln() - theta * theta / (2.0 * model.sigma_p().powi(2))
}

#[test]
fn gradient_matches_finite_differences() {
    let h = 1e-5;
    for statistic in [Statistic::Sum, Statistic::PathAgreement] {
        for m in [2, 4, 10] {
            let model = ising(statistic, m);
            for k in -30..=30 {
                let theta = k as f64 * 0.1;
                let fd = (brute_log_posterior(&model, theta + h) - brute_log_posterior(&model, theta - h)) / (2.0 * h);
                let g = grad_log_posterior(&model, theta);
                assert!((g - fd).abs() <= 1e-6, "{statistic:?} M={m} theta={theta}: {g} vs {fd}");
                assert!((model.log_posterior(theta) - brute_log_posterior(&model, theta)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn noisy_gradient_is_unbiased() {
    let model = ising(Statistic::Sum, 8);
    for n in [1u64, 10, 100] {
        for (i, theta) in [-1.5, 0.0, 0.4, 2.0].into_iter().enumerate() {
            let mut rng = stream_rng(21, n, i as u64);
            let draws: Vec<f64> = (0..10_000)
                .map(|_| noisy_grad(&model, theta, n, &mut rng).unwrap())
                .collect();
            let (mean, se) = mean_se(&draws);
            let exact = grad_log_posterior(&model, theta);
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "N={n} theta={theta}: {mean} vs {exact} (se {se})"
            );
        }
    }
}

#[test]
fn one_step_mean_follows_the_exact_gradient() {
    let model = ising(Statistic::PathAgreement, 6);
    let params = LangevinParams::new(0.8, 5, model.sigma_p()).unwrap();
    let theta = 0.7;
    let mut rng = stream_rng(8, 0, 0);
    let steps: Vec<f64> = (0..100_000)
        .map(|_| langevin_step(&model, &params, theta, &mut rng, true).unwrap())
        .collect();
    let (mean, se) = mean_se(&steps);
    let expected = theta + 0.5 * params.sigma * params.sigma * grad_log_posterior(&model, theta);
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn drift_inequality_for_both_steppers() {
    let model = ising(Statistic::Mean, 6);
    assert_eq!(model.s_inf(), 1.0);
    let params = LangevinParams::new(0.5, 10, 1.0).unwrap();
    assert_eq!(langevin_drift_constants(0.5, 1.0, 1.0).unwrap(), (0.9375, 0.875, 13.0));
    let grid = [-40.0, -13.5, -13.0, -5.0, 0.0, 2.0, 12.9, 13.1, 30.0];
    for p in langevin_drift_check(&model, &params, &grid, 20_000, 4).unwrap() {
        assert!(p.exact_holds() && p.noisy_holds(), "{p:?}");
    }
}

#[test]
fn large_steps_break_the_drift_inequality() {
    // sigma^2 close to 4 sigma_p^2: the update overshoots the origin, so
    // E V(theta') grows like |1 - sigma^2/(2 sigma_p^2)| |theta|, far above
    // delta V(theta) with delta = 1 - sigma^2/(4 sigma_p^2).
    let model = ising(Statistic::Mean, 4);
    let params = LangevinParams::new(1.9, 10, 1.0).unwrap();
    let pts = langevin_drift_check(&model, &params, &[100.0], 5_000, 2).unwrap();
    assert!(!pts[0].exact_holds() && !pts[0].noisy_holds(), "{:?}", pts[0]);
}

#[test]
fn tv_proxy_does_not_grow_with_n() {
    let model = ising(Statistic::Sum, 10);
    let runs = 4u64;
    let proxy = |n: u64| {
        let params = LangevinParams::new(1.0, n, 1.0).unwrap();
        let vals: Vec<f64> = (0..runs)
            .map(|seed| langevin_tv_proxy(&model, &params, 0.0, 10, 100_000, 100 + seed).unwrap())
            .collect();
        mean_se(&vals)
    };
    let tvs: Vec<(f64, f64)> = [100, 1_000, 10_000].into_iter().map(proxy).collect();
    for w in tvs.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        assert!(b <= a + 3.0 * (sa * sa + sb * sb).sqrt(), "{tvs:?}");
    }
}

#[test]
fn thresholds_are_strict() {
    // N <= 4 max{|s|^2 sigma^4, |s|^-3 sigma^-6} = 4 and 90 respectively.
    assert!(matches!(
        langevin_tv_perturbation_bound(1.0, 1.0, 4.0),
        Err(Error::Inapplicable(_))
    ));
    assert!(langevin_tv_perturbation_bound(1.0, 1.0, 4.000_001).is_ok());
    assert!(matches!(
        langevin_final_bound_from(1.0, 1.0, 1.0, 1.0, 0.5, 0.0, 90.0),
        Err(Error::Inapplicable(_))
    ));
    assert!(langevin_final_bound_from(1.0, 1.0, 1.0, 1.0, 0.5, 0.0, 90.001).is_ok());
    // Threshold with |s| = 2, sigma = 0.5: max{4 * 0.0625, 1/(8 * 0.015625)} = 8.
    assert!(matches!(
        langevin_tv_perturbation_bound(0.5, 2.0, 32.0),
        Err(Error::Inapplicable(_))
    ));
    assert!(langevin_tv_perturbation_bound(0.5, 2.0, 32.001).is_ok());
    assert!(matches!(
        langevin_drift_constants(2.0, 1.0, 1.0),
        Err(Error::Inapplicable(_))
    ));
}

#[test]
fn final_bound_from_model() {
    let model = GibbsModel::new(vec![-1.0, 1.0], Statistic::Sum, vec![1.0], 1.0).unwrap();
    let params = LangevinParams::new(1.0, 10_000, 1.0).unwrap();
    let b = langevin_final_bound(&model, &params, 1.0, 0.5, 0.0).unwrap();
    assert!((b - 5.035_019).abs() < 1e-6);
    let small = LangevinParams::new(1.0, 90, 1.0).unwrap();
    assert!(langevin_final_bound(&model, &small, 1.0, 0.5, 0.0).is_err());
}
