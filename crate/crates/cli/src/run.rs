use rand::Rng;
use rayon::prelude::*;
use wperturb_core::ar1::{
    ar1_csv, ar1_gaussian_stationary_w1, ar1_report, ar1_simulate_coupled, Ar1Params, Innovation,
};
use wperturb_core::bounds::{verify_on_finite, FiniteInstance, VerifyOptions};
use wperturb_core::instance::generate_random_instance;
use wperturb_core::langevin::{
    langevin_drift_check, langevin_drift_constants, langevin_final_bound, langevin_tv_perturbation_bound,
    langevin_tv_proxy, GibbsModel, LangevinParams, Statistic,
};
use wperturb_core::mh::{
    lambda_constant, mh_fit_drift, mh_metro_geom_report, ExponentialTarget, MetroGeomConstants, Perturbation,
};
use wperturb_core::quadrature::ABS_TOL;
use wperturb_core::rng::stream_rng;
use wperturb_core::{
    DiscreteDistribution, FiniteKernel, FiniteMetricSpace, PerturbationReport, Theorem, WeightFunction,
};

use crate::config::{
    Ar1Config, ExperimentConfig, ExplicitInstance, FiniteVerifyConfig, Kind, LangevinConfig, MhConfig,
};
use crate::output::{RunOutcome, SlackEntry};
use crate::CliError;

/// Tolerance on exact slacks.
pub const EXACT_TOL: f64 = 1e-9;

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let seed = cfg.seed;
    match cfg.kind {
        Kind::FiniteVerify => finite_verify(cfg.finite_verify.as_ref().expect("validated"), seed),
        Kind::Ar1 => ar1(cfg.ar1.as_ref().expect("validated"), seed),
        Kind::Mh => mh(cfg.mh.as_ref().expect("validated"), seed),
        Kind::Langevin => langevin(cfg.langevin.as_ref().expect("validated"), seed),
    }
}

fn entry(theorem: &str, id: usize, label: String, report: &PerturbationReport) -> SlackEntry {
    SlackEntry {
        theorem: theorem.to_string(),
        id,
        label,
        min_slack: report.min_slack(),
        holds: report.holds(EXACT_TOL),
    }
}

/// Seed of random instance `id`, decorrelated from neighbouring ids and seeds.
fn instance_seed(seed: u64, id: usize) -> u64 {
    stream_rng(seed, id as u64, 0).random()
}

fn finite_verify(cfg: &FiniteVerifyConfig, seed: u64) -> Result<RunOutcome, CliError> {
    let theorems: Vec<Theorem> = cfg
        .theorems
        .iter()
        .map(|t| Theorem::parse(t).expect("validated"))
        .collect();
    let opts = VerifyOptions {
        delta: cfg.delta,
        m: cfg.cert_power,
        kappa_mode: cfg.kappa.into(),
        ..VerifyOptions::default()
    };
    let instances: Vec<FiniteInstance> = match (&cfg.instance, cfg.instances) {
        (Some(inst), _) => vec![explicit_instance(inst)?],
        (None, Some(count)) => (0..count)
            .into_par_iter()
            .map(|id| generate_random_instance(instance_seed(seed, id), cfg.size, cfg.contraction_mix))
            .collect::<wperturb_core::Result<_>>()?,
        (None, None) => unreachable!("validated"),
    };

    let jobs: Vec<(usize, Theorem)> = (0..instances.len())
        .flat_map(|id| theorems.iter().map(move |&t| (id, t)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(id, t)| (id, t, verify_on_finite(&instances[id], cfg.n_max, t, &opts)))
        .collect();

    let mut out = RunOutcome::default();
    for (id, t, res) in results {
        let label = format!("instance-{id:04}");
        match res {
            Ok(report) => {
                out.slacks.push(entry(t.name(), id, label.clone(), &report));
                out.files.push((format!("{label}-{}.csv", t.name()), report.to_csv()));
            }
            Err(e) if e.is_hypothesis_failure() => out.inapplicable.push((id, format!("{label} {}: {e}", t.name()))),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn explicit_instance(inst: &ExplicitInstance) -> Result<FiniteInstance, CliError> {
    let p = FiniteKernel::new(inst.p.clone())?;
    let pt = FiniteKernel::new(inst.pt.clone())?;
    let n = p.len();
    let space = match (&inst.points, &inst.distance) {
        (Some(_), Some(_)) => return Err(CliError::Schema("give `points` or `distance`, not both".into())),
        (Some(points), None) => FiniteMetricSpace::euclidean(points)?,
        (None, Some(d)) => FiniteMetricSpace::from_matrix(d.clone())?,
        (None, None) => FiniteMetricSpace::trivial(n)?,
    };
    let weights = |w: &Option<Vec<f64>>| match w {
        Some(v) => WeightFunction::new(v.clone()),
        None => Ok(WeightFunction::ones(n)),
    };
    let p0 = match &inst.p0 {
        Some(w) => DiscreteDistribution::new(w.clone())?,
        None => DiscreteDistribution::dirac(n, 0)?,
    };
    let pt0 = match &inst.pt0 {
        Some(w) => DiscreteDistribution::new(w.clone())?,
        None => p0.clone(),
    };
    let fin = FiniteInstance {
        p,
        pt,
        space,
        v: weights(&inst.v)?,
        vt: weights(&inst.vt)?,
        p0,
        pt0,
    };
    fin.validate()?;
    Ok(fin)
}

fn ar1(cfg: &Ar1Config, seed: u64) -> Result<RunOutcome, CliError> {
    let params = Ar1Params::new(cfg.alpha, Innovation::gaussian(cfg.mean, cfg.sd)?)?;
    let bounds = ar1_report(&params, cfg.alpha_t, cfg.x0, cfg.steps, cfg.c_tv)?;
    let sim = ar1_simulate_coupled(&params, cfg.alpha_t, cfg.x0, cfg.steps, cfg.replicas, seed)?;

    let mut report = PerturbationReport::new(Theorem::Ar1);
    for s in &sim {
        report.push_mc(s.n, s.coupled_dev, s.coupled_se, bounds.nstep[s.n as usize]);
    }
    let mut out = RunOutcome::default();
    out.slacks
        .push(entry(Theorem::Ar1.name(), 0, "ar1.csv".into(), &report));
    out.files.push(("ar1.csv".into(), ar1_csv(&sim, &bounds.nstep)));
    out.note("replicas", cfg.replicas as f64);
    out.note("delta", bounds.delta);
    out.note("L", bounds.l);
    out.note("kappa", bounds.kappa);
    out.note("gamma", bounds.gamma);
    out.note("stationary lower bound", bounds.lower);
    out.note(
        "stationary W1",
        ar1_gaussian_stationary_w1(cfg.alpha, cfg.alpha_t, cfg.mean, cfg.sd)?,
    );
    out.note("stationary upper bound", bounds.stationary);
    if let Some(g) = bounds.tv_gamma {
        out.note("tv gamma", g);
    }
    if let Some(b) = bounds.tv_final {
        out.note("tv final bound", b);
    }
    Ok(out)
}

fn grid(max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && max >= 0.0 && max.is_finite()) {
        return Err(CliError::Schema(format!(
            "grid needs step > 0 and max >= 0, got {step} and {max}"
        )));
    }
    let k = (max / step).floor() as usize;
    Ok((0..=k).map(|i| i as f64 * step).collect())
}

fn mh(cfg: &MhConfig, seed: u64) -> Result<RunOutcome, CliError> {
    let problem = ExponentialTarget::new(cfg.width)?;
    let v = |x: f64| (0.5 * x).exp();
    let grid = grid(cfg.grid_max, cfg.grid_step)?;
    let (delta, l) = mh_fit_drift(&problem, &v, &grid, cfg.tail_from, ABS_TOL)?;
    let lambda = lambda_constant(&problem, &v, &grid, ABS_TOL)?;
    let consts = MetroGeomConstants {
        c: cfg.c,
        rho: cfg.rho,
        delta,
        l,
        lambda,
    };
    let pert = Perturbation::uniform_noise(cfg.s)?;
    let report = mh_metro_geom_report(
        &problem,
        &pert,
        &consts,
        v(cfg.x0),
        cfg.x0,
        cfg.steps,
        cfg.samples,
        seed,
    )?;

    let mut out = RunOutcome::default();
    out.slacks
        .push(entry(Theorem::MetroGeom.name(), 0, "metro-geom.csv".into(), &report));
    out.files.push(("metro-geom.csv".into(), report.to_csv()));
    out.note("samples", cfg.samples as f64);
    out.note("delta", delta);
    out.note("L", l);
    out.note("lambda", lambda);
    // Sups over a grid only bound the true sups from below.
    out.note("grid points (sup is a lower estimate)", grid.len() as f64);
    Ok(out)
}

fn langevin(cfg: &LangevinConfig, seed: u64) -> Result<RunOutcome, CliError> {
    let statistic = Statistic::parse(&cfg.statistic).expect("validated");
    let model = GibbsModel::new(cfg.alphabet.clone(), statistic, cfg.observed.clone(), cfg.sigma_p)?;
    let params = LangevinParams::new(cfg.sigma, cfg.n, cfg.sigma_p)?;
    let (delta, l, radius) = langevin_drift_constants(cfg.sigma, cfg.sigma_p, model.s_inf())?;
    let points = langevin_drift_check(&model, &params, &cfg.theta_grid, cfg.draws, seed)?;

    let mut out = RunOutcome::default();
    let mut csv = String::from("theta,exact_mean,exact_se,noisy_mean,noisy_se,bound\n");
    for (i, p) in points.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.theta, p.exact_mean, p.exact_se, p.noisy_mean, p.noisy_se, p.bound
        ));
        for (name, mean, holds) in [
            ("langevin-drift-exact", p.exact_mean, p.exact_holds()),
            ("langevin-drift-noisy", p.noisy_mean, p.noisy_holds()),
        ] {
            out.slacks.push(SlackEntry {
                theorem: name.into(),
                id: i,
                label: format!("theta = {}", p.theta),
                min_slack: p.bound - mean,
                holds,
            });
        }
    }
    out.files.push(("langevin-drift.csv".into(), csv));

    let tv = langevin_tv_proxy(&model, &params, cfg.x0, cfg.steps, cfg.replicas, seed)?;
    out.files.push((
        "langevin-tv.csv".into(),
        format!(
            "n,steps,replicas,tv_proxy\n{},{},{},{}\n",
            cfg.n, cfg.steps, cfg.replicas, tv
        ),
    ));
    out.note("s_inf", model.s_inf());
    out.note("delta", delta);
    out.note("L", l);
    out.note("I radius", radius);
    if let (Some(c), Some(rho)) = (cfg.c, cfg.rho) {
        out.note(
            "tv perturbation bound",
            langevin_tv_perturbation_bound(cfg.sigma, model.s_inf(), cfg.n as f64)?,
        );
        out.note(
            "final bound",
            langevin_final_bound(&model, &params, c, rho, cfg.x0.abs())?,
        );
    }
    Ok(out)
}
