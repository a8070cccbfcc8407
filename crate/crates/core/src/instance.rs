//! Seeded random finite instances for the property suites and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::FiniteInstance;
use crate::error::{invalid, Error, Result};
use crate::kernels::{
    fit_geometric_constants, fit_geometric_constants_in, kernel_gamma_tv, kernel_gamma_vnorm, tau_v, ContractionMetric,
    FiniteKernel, DEFAULT_CERT_POWER,
};
use crate::mh::finite::{FiniteMh, FinitePerturbation};
use crate::otcore::{DiscreteDistribution, FiniteMetricSpace, WeightFunction};

pub const MAX_SIZE: usize = 200;
pub const MAX_ATTEMPTS: usize = 100;

/// Weight of the independent noise kernel in `Pt = (1 - w) P + w R`.
const PERTURBATION_WEIGHT: f64 = 0.05;
/// `gamma + delta < 1` is required with the default `delta = 0.5`.
const GEOM2_GAMMA_MAX: f64 = 0.5;
const CHECK_HORIZON: usize = 30;

fn random_row(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> Vec<f64> {
    let keep = rng.random_range(0..n);
    let mut row: Vec<f64> = (0..n)
        .map(|j| {
            if j != keep && rng.random::<f64>() < sparsity {
                0.0
            } else {
                // Exponential weights make each row a flat Dirichlet draw.
                -(1.0 - rng.random::<f64>()).ln() + 1e-3
            }
        })
        .collect();
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
    row
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Result<WeightFunction> {
    WeightFunction::new((0..n).map(|_| 1.0 + rng.random::<f64>()).collect())
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Result<DiscreteDistribution> {
    DiscreteDistribution::from_unnormalized(random_row(rng, n, 0.3))
}

fn mix(a: &FiniteKernel, b: &[Vec<f64>], w: f64) -> Result<FiniteKernel> {
    FiniteKernel::new(
        (0..a.len())
            .map(|x| a.row(x).iter().zip(&b[x]).map(|(p, r)| (1.0 - w) * p + w * r).collect())
            .collect(),
    )
}

fn candidate(rng: &mut ChaCha8Rng, size: usize, contraction_mix: f64) -> Result<FiniteInstance> {
    let dim = rng.random_range(1..=3usize);
    let points: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let space = FiniteMetricSpace::euclidean(&points)?;
    let anchor = random_distribution(rng, size)?;
    let noise: Vec<Vec<f64>> = (0..size).map(|_| random_row(rng, size, 0.5)).collect();
    let p = mix(&FiniteKernel::rank_one(&anchor), &noise, 1.0 - contraction_mix)?;
    let perturb: Vec<Vec<f64>> = (0..size).map(|_| random_row(rng, size, 0.0)).collect();
    let pt = mix(&p, &perturb, PERTURBATION_WEIGHT)?;
    let v = random_weights(rng, size)?;
    let vt = random_weights(rng, size)?;
    let p0 = random_distribution(rng, size)?;
    let pt0 = if rng.random::<bool>() {
        p0.clone()
    } else {
        random_distribution(rng, size)?
    };
    Ok(FiniteInstance {
        p,
        pt,
        space,
        v,
        vt,
        p0,
        pt0,
    })
}

/// Every hypothesis the finite verifier needs, at its default options:
/// `(C, rho)` certificates in `d`, `d_V` and `d_Vt`, `tau_V(P) < 1`, and
/// the `gamma` ranges of the V-norm and total-variation bounds.
pub fn instance_is_admissible(inst: &FiniteInstance) -> Result<bool> {
    let certified = |r: Result<_>| match r {
        Ok(_) => Ok(true),
        Err(Error::NoContraction { .. } | Error::CertificateFailed { .. }) => Ok(false),
        Err(e) => Err(e),
    };
    let contracts = tau_v(&inst.p, &inst.v)? < 1.0
        && certified(fit_geometric_constants_in(
            &inst.p,
            ContractionMetric::Base(&inst.space),
            DEFAULT_CERT_POWER,
            CHECK_HORIZON,
        ))?
        && certified(fit_geometric_constants(
            &inst.p,
            &inst.v,
            DEFAULT_CERT_POWER,
            CHECK_HORIZON,
        ))?
        && certified(fit_geometric_constants(
            &inst.p,
            &inst.vt,
            DEFAULT_CERT_POWER,
            CHECK_HORIZON,
        ))?;
    let g_tv = kernel_gamma_tv(&inst.p, &inst.pt, &inst.vt)?;
    let g_v = kernel_gamma_vnorm(&inst.p, &inst.pt, &inst.v, &inst.v)?;
    Ok(contracts && g_tv > 0.0 && g_tv < (-1.0f64).exp() && g_v < GEOM2_GAMMA_MAX)
}

/// `P` mixes a rank-one kernel (weight `contraction_mix`) with a random
/// kernel on random Euclidean points; `Pt` moves 5% of every row of `P`
/// to a random row. Candidates failing [`instance_is_admissible`] are
/// redrawn up to [`MAX_ATTEMPTS`] times.
pub fn generate_random_instance(seed: u64, size: usize, contraction_mix: f64) -> Result<FiniteInstance> {
    if !(2..=MAX_SIZE).contains(&size) {
        return Err(invalid(format!("instance size {size} must lie in [2, {MAX_SIZE}]")));
    }
    if !(contraction_mix > 0.0 && contraction_mix <= 1.0) {
        return Err(invalid(format!(
            "contraction_mix = {contraction_mix} must lie in (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let inst = candidate(&mut rng, size, contraction_mix)?;
        if instance_is_admissible(&inst)? {
            return Ok(inst);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no admissible instance after {MAX_ATTEMPTS} draws (seed {seed}, size {size}, mix {contraction_mix})"
    )))
}

/// A random finite Metropolis-Hastings problem: proposal, target,
/// perturbed acceptance and a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MhInstance {
    pub mh: FiniteMh,
    pub perturbation: FinitePerturbation,
    pub space: FiniteMetricSpace,
}

/// Proposal rows are sparse random rows; the perturbation cycles through
/// uniform noise, an indicator set and an arbitrary acceptance matrix.
pub fn generate_random_mh_instance(seed: u64, size: usize) -> Result<MhInstance> {
    if !(2..=MAX_SIZE).contains(&size) {
        return Err(invalid(format!("instance size {size} must lie in [2, {MAX_SIZE}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = FiniteKernel::new((0..size).map(|_| random_row(&mut rng, size, 0.4)).collect())?;
    let target = DiscreteDistribution::from_unnormalized((0..size).map(|_| 0.05 + rng.random::<f64>()).collect())?;
    let xs: Vec<f64> = (0..size).map(|_| 10.0 * rng.random::<f64>()).collect();
    let space = FiniteMetricSpace::on_line(&xs)?;
    let perturbation = match rng.random_range(0..3u8) {
        0 => FinitePerturbation::UniformNoise { s: rng.random::<f64>() },
        1 => FinitePerturbation::IndicatorSet((0..size).map(|_| rng.random::<bool>()).collect()),
        _ => FinitePerturbation::Explicit((0..size * size).map(|_| rng.random::<f64>()).collect()),
    };
    Ok(MhInstance {
        mh: FiniteMh::new(q, target)?,
        perturbation,
        space,
    })
}
