//! Seeded property suites over random finite instances. Each check
//! records how far the worst case overshoots its inequality.

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{verify_on_finite, FiniteInstance, KappaMode, Theorem, VerifyOptions};
use crate::error::Result;
use crate::instance::generate_random_instance;
use crate::kernels::{
    compose, fit_drift_l, fit_geometric_constants_in, stationary_distribution, tau, tau_v, verify_drift,
    ContractionMetric, DEFAULT_CERT_POWER,
};
use crate::otcore::{
    dv_metric, total_variation, vnorm_distance, wasserstein1, wasserstein1_exact, Coupling, DiscreteDistribution,
    FiniteMetricSpace,
};
use crate::rng::stream_rng;

/// Tolerance of every check.
pub const SUITE_TOL: f64 = 1e-9;
/// Largest instance drawn by the suites.
pub const MAX_STATES: usize = 12;
/// Horizon of the bound checks.
pub const HORIZON: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Otcore,
    Kernels,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Otcore, Suite::Kernels, Suite::Bounds];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Otcore => "otcore",
            Suite::Kernels => "kernels",
            Suite::Bounds => "bounds",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// Aggregate of one named check over all cases.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest `lhs - rhs` seen; at most [`SUITE_TOL`] when the check passes.
    pub worst: f64,
    pub first_error: Option<String>,
}

impl SuiteCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

// One observation: check name and either an excess or an error message.
type Obs = (String, std::result::Result<f64, String>);

/// Instance for case `case` of a run seeded by `seed`.
pub fn case_instance(seed: u64, case: usize) -> Result<FiniteInstance> {
    let mut rng = stream_rng(seed, case as u64, 0);
    let size = 2 + case % (MAX_STATES - 1);
    let mix = 0.3 + 0.7 * rng.random::<f64>();
    generate_random_instance(rng.random(), size, mix)
}

pub fn run_suite(suite: Suite, cases: usize, seed: u64) -> Vec<SuiteCheck> {
    let obs: Vec<Vec<Obs>> = (0..cases)
        .into_par_iter()
        .map(|case| match case_instance(seed, case) {
            Err(e) => vec![("instance generation".to_string(), Err(e.to_string()))],
            Ok(inst) => match suite {
                Suite::Otcore => otcore_case(&inst, seed, case),
                Suite::Kernels => kernels_case(&inst),
                Suite::Bounds => bounds_case(&inst),
            },
        })
        .collect();
    aggregate(obs)
}

fn aggregate(obs: Vec<Vec<Obs>>) -> Vec<SuiteCheck> {
    let mut out: Vec<SuiteCheck> = Vec::new();
    for (name, value) in obs.into_iter().flatten() {
        let idx = match out.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                out.push(SuiteCheck {
                    name: name.clone(),
                    cases: 0,
                    failures: 0,
                    worst: f64::NEG_INFINITY,
                    first_error: None,
                });
                out.len() - 1
            }
        };
        let check = &mut out[idx];
        check.cases += 1;
        match value {
            Ok(excess) => {
                check.worst = check.worst.max(excess);
                if !(excess <= SUITE_TOL) {
                    check.failures += 1;
                }
            }
            Err(msg) => {
                check.failures += 1;
                check.first_error.get_or_insert(msg);
            }
        }
    }
    out
}

fn obs(name: &str, r: Result<f64>) -> Obs {
    (name.to_string(), r.map_err(|e| e.to_string()))
}

fn otcore_case(inst: &FiniteInstance, seed: u64, case: usize) -> Vec<Obs> {
    let n = inst.len();
    let pairs = [
        (inst.p0.clone(), inst.pt0.clone()),
        (inst.p.row_distribution(0), inst.pt.row_distribution(n - 1)),
    ];
    let mut out = Vec::new();
    for (mu, nu) in &pairs {
        out.push(obs(
            "dv duality",
            (|| {
                let w = wasserstein1(mu, nu, &dv_metric(&inst.v, &inst.space)?)?;
                Ok((w - vnorm_distance(mu, nu, &inst.v)?).abs())
            })(),
        ));
        out.push(obs(
            "trivial metric gives tv",
            (|| {
                let w = wasserstein1(mu, nu, &FiniteMetricSpace::trivial(n)?)?;
                Ok((w - total_variation(mu, nu)?).abs())
            })(),
        ));
        out.push(obs(
            "optimal plan marginals and cost",
            (|| {
                let (w, plan) = wasserstein1_exact(mu, nu, &inst.space)?;
                let marg = plan
                    .first_marginal()
                    .iter()
                    .zip(mu.weights())
                    .chain(plan.second_marginal().iter().zip(nu.weights()))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let cost = (plan.cost(|i, j| inst.space.dist(i, j)) - w).abs();
                Ok(marg.max(cost))
            })(),
        ));
        out.push(obs(
            "optimal below product coupling",
            (|| {
                let w = wasserstein1(mu, nu, &inst.space)?;
                Ok(w - Coupling::independent(mu, nu)?.cost(|i, j| inst.space.dist(i, j)))
            })(),
        ));
        out.push(obs(
            "w1 symmetric",
            (|| Ok((wasserstein1(mu, nu, &inst.space)? - wasserstein1(nu, mu, &inst.space)?).abs()))(),
        ));
    }
    let (mu, nu) = &pairs[0];
    let lambda = inst.p.row_distribution(n / 2);
    out.push(obs(
        "w1 triangle inequality",
        (|| {
            let d = |a: &DiscreteDistribution, b: &DiscreteDistribution| wasserstein1(a, b, &inst.space);
            Ok(d(mu, &lambda)? - d(mu, nu)? - d(nu, &lambda)?)
        })(),
    ));
    out.push(obs("w1 of identical laws", wasserstein1(mu, mu, &inst.space)));
    out.push(obs(
        "line transport matches cdf formula",
        (|| {
            let mut rng = stream_rng(seed, case as u64, 1);
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let line = FiniteMetricSpace::on_line(&xs)?;
            let w = wasserstein1(mu, nu, &line)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
            let mut gap = 0.0;
            let mut cdf = 0.0;
            for k in 0..n - 1 {
                cdf += mu[order[k]] - nu[order[k]];
                gap += cdf.abs() * (xs[order[k + 1]] - xs[order[k]]);
            }
            Ok((w - gap).abs())
        })(),
    ));
    out
}

fn kernels_case(inst: &FiniteInstance) -> Vec<Obs> {
    let (p, pt, space) = (&inst.p, &inst.pt, &inst.space);
    let mut out = vec![
        obs(
            "tau submultiplicative",
            (|| Ok(tau(&compose(p, pt)?, space)? - tau(p, space)? * tau(pt, space)?))(),
        ),
        obs(
            "tau_V submultiplicative",
            (|| Ok(tau_v(&compose(pt, p)?, &inst.v)? - tau_v(pt, &inst.v)? * tau_v(p, &inst.v)?))(),
        ),
        obs(
            "tau contraction",
            (|| {
                let before = wasserstein1(&inst.p0, &inst.pt0, space)?;
                let after = wasserstein1(&p.push_forward(&inst.p0)?, &p.push_forward(&inst.pt0)?, space)?;
                Ok(after - tau(p, space)? * before)
            })(),
        ),
        obs(
            "distance to stationarity ratio",
            (|| {
                let pi = stationary_distribution(p)?;
                let t = tau(p, space)?;
                let mut worst = f64::NEG_INFINITY;
                for x in 0..p.len() {
                    let dirac = DiscreteDistribution::dirac(p.len(), x)?;
                    let before = wasserstein1(&dirac, &pi, space)?;
                    let after = wasserstein1(&p.row_distribution(x), &pi, space)?;
                    worst = worst.max(after - t * before);
                }
                Ok(worst)
            })(),
        ),
        obs(
            "stationary law is invariant",
            (|| {
                let pi = stationary_distribution(p)?;
                total_variation(&p.push_forward(&pi)?, &pi)
            })(),
        ),
        obs(
            "fitted drift verifies",
            (|| {
                let est = fit_drift_l(pt, &inst.vt, 0.5)?;
                Ok(verify_drift(pt, &est)?.worst_slack)
            })(),
        ),
    ];
    for (name, metric) in [
        ("certificate in d", ContractionMetric::Base(space)),
        ("certificate in d_V", ContractionMetric::Weighted(&inst.v)),
    ] {
        out.push(obs(
            name,
            (|| {
                let est = fit_geometric_constants_in(p, metric, DEFAULT_CERT_POWER, HORIZON)?;
                let mut pk = crate::kernels::FiniteKernel::identity(p.len());
                let mut worst = f64::NEG_INFINITY;
                for k in 0..=HORIZON {
                    worst = worst.max(metric.tau(&pk)? - est.bound_at(k));
                    pk = compose(&pk, p)?;
                }
                Ok(worst)
            })(),
        ));
    }
    out
}

fn bounds_case(inst: &FiniteInstance) -> Vec<Obs> {
    let mut out = Vec::new();
    for mode in [KappaMode::Drift, KappaMode::RunningMax] {
        let opts = VerifyOptions {
            kappa_mode: mode,
            ..VerifyOptions::default()
        };
        for which in Theorem::FINITE {
            let label = match mode {
                KappaMode::Drift => which.name().to_string(),
                KappaMode::RunningMax => format!("{} (running-max kappa)", which.name()),
            };
            let r = verify_on_finite(inst, HORIZON, which, &opts).map(|rep| -rep.min_slack());
            out.push((label, r.map_err(|e| e.to_string())));
        }
    }
    out
}
