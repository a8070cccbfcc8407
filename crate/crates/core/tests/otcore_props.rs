use proptest::prelude::*;
use wperturb_core::otcore::{
    dv_metric, empirical_w1_1d, total_variation, vnorm_distance, wasserstein1, wasserstein1_exact,
};
use wperturb_core::{DiscreteDistribution, FiniteMetricSpace, WeightFunction};

const TOL: f64 = 1e-9;

fn weights(n: usize) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], n)
        .prop_filter_map("all zero", |w| DiscreteDistribution::from_unnormalized(w).ok())
}

fn points(n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), n)
        .prop_filter_map("coincident points", |p| FiniteMetricSpace::euclidean(&p).ok())
}

fn triple() -> impl Strategy<
    Value = (
        FiniteMetricSpace,
        DiscreteDistribution,
        DiscreteDistribution,
        DiscreteDistribution,
    ),
> {
    (1usize..=12).prop_flat_map(|n| (points(n), weights(n), weights(n), weights(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms((space, mu, nu, la) in triple()) {
        let d = |a: &DiscreteDistribution, b: &DiscreteDistribution| wasserstein1(a, b, &space).unwrap();
        prop_assert!(d(&mu, &nu) >= 0.0);
        prop_assert!((d(&mu, &nu) - d(&nu, &mu)).abs() <= TOL);
        prop_assert!(d(&mu, &mu).abs() <= TOL);
        prop_assert!(d(&mu, &la) <= d(&mu, &nu) + d(&nu, &la) + TOL);
    }

    #[test]
    fn lipschitz_functions_lower_bound_transport(
        (space, mu, nu, _) in triple(),
        anchors in prop::collection::vec((0usize..12, -3.0f64..3.0), 1..5),
    ) {
        let n = space.len();
        let f: Vec<f64> = (0..n)
            .map(|x| anchors.iter().map(|&(j, c)| c + space.dist(x, j % n)).fold(f64::INFINITY, f64::min))
            .collect();
        for x in 0..n {
            for y in 0..n {
                prop_assert!((f[x] - f[y]).abs() <= space.dist(x, y) + 1e-12);
            }
        }
        let pairing: f64 = (0..n).map(|x| f[x] * (mu[x] - nu[x])).sum();
        prop_assert!(pairing.abs() <= wasserstein1(&mu, &nu, &space).unwrap() + TOL);
    }

    #[test]
    fn trivial_metric_gives_total_variation((space, mu, nu, _) in triple()) {
        let trivial = FiniteMetricSpace::trivial(space.len()).unwrap();
        let w = wasserstein1(&mu, &nu, &trivial).unwrap();
        prop_assert!((w - total_variation(&mu, &nu).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn dv_duality(
        (space, mu, nu, _) in triple(),
        raw in prop::collection::vec(1.0f64..10.0, 12),
    ) {
        let v = WeightFunction::new(raw[..space.len()].to_vec()).unwrap();
        let w = wasserstein1(&mu, &nu, &dv_metric(&v, &space).unwrap()).unwrap();
        prop_assert!((w - vnorm_distance(&mu, &nu, &v).unwrap()).abs() <= TOL);
    }

    #[test]
    fn optimal_plan_is_a_coupling((space, mu, nu, _) in triple()) {
        let (w, plan) = wasserstein1_exact(&mu, &nu, &space).unwrap();
        for (a, b) in plan.first_marginal().iter().zip(mu.weights()) {
            prop_assert!((a - b).abs() <= TOL);
        }
        for (a, b) in plan.second_marginal().iter().zip(nu.weights()) {
            prop_assert!((a - b).abs() <= TOL);
        }
        prop_assert!((plan.cost(|i, j| space.dist(i, j)) - w).abs() <= TOL);
    }

    #[test]
    fn sorted_pairing_matches_exact_transport(
        xs in prop::collection::vec(-20i32..20, 1..=50),
        ys_raw in prop::collection::vec(-20i32..20, 50),
    ) {
        // Integer-valued samples force ties and shared support points.
        let k = xs.len();
        let mut a: Vec<f64> = xs.iter().map(|&x| x as f64 * 0.25).collect();
        let mut b: Vec<f64> = ys_raw[..k].iter().map(|&y| y as f64 * 0.25).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let mut support: Vec<f64> = a.iter().chain(&b).copied().collect();
        support.sort_by(f64::total_cmp);
        support.dedup();
        let mass = |s: &[f64]| {
            let w = support.iter().map(|p| s.iter().filter(|x| *x == p).count() as f64 / k as f64).collect();
            DiscreteDistribution::from_unnormalized(w).unwrap()
        };
        let line = FiniteMetricSpace::on_line(&support).unwrap();
        let exact = wasserstein1(&mass(&a), &mass(&b), &line).unwrap();
        prop_assert!((empirical_w1_1d(&a, &b).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact));
    }
}
