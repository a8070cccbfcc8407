//! Experiment configuration. A TOML file names the experiment `kind`, a
//! seed and an output directory, plus one section of parameters for that
//! kind. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use wperturb_core::bounds::KappaMode;
use wperturb_core::Theorem;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    FiniteVerify,
    Ar1,
    Mh,
    Langevin,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::FiniteVerify => "finite-verify",
            Kind::Ar1 => "ar1",
            Kind::Mh => "mh",
            Kind::Langevin => "langevin",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(rename = "finite-verify")]
    pub finite_verify: Option<FiniteVerifyConfig>,
    pub ar1: Option<Ar1Config>,
    pub mh: Option<MhConfig>,
    pub langevin: Option<LangevinConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("wperturb-out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaSetting {
    #[default]
    Drift,
    RunningMax,
}

impl From<KappaSetting> for KappaMode {
    fn from(k: KappaSetting) -> Self {
        match k {
            KappaSetting::Drift => KappaMode::Drift,
            KappaSetting::RunningMax => KappaMode::RunningMax,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteVerifyConfig {
    /// Number of random instances; exclusive with `instance`.
    pub instances: Option<usize>,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_mix")]
    pub contraction_mix: f64,
    #[serde(default = "default_horizon")]
    pub n_max: usize,
    #[serde(default = "default_theorems")]
    pub theorems: Vec<String>,
    #[serde(default)]
    pub kappa: KappaSetting,
    /// Drift rate for which `L` is fitted.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_cert_power")]
    pub cert_power: usize,
    pub instance: Option<ExplicitInstance>,
}

fn default_size() -> usize {
    8
}
fn default_mix() -> f64 {
    0.5
}
fn default_horizon() -> usize {
    30
}
fn default_theorems() -> Vec<String> {
    vec![Theorem::Thm31.name().to_string()]
}
fn default_delta() -> f64 {
    0.5
}
fn default_cert_power() -> usize {
    8
}

/// A hand-written instance: kernels as dense row-major matrices. The
/// metric is Euclidean over `points`, an explicit `distance` matrix, or
/// the trivial metric when neither is given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInstance {
    pub p: Vec<Vec<f64>>,
    pub pt: Vec<Vec<f64>>,
    pub points: Option<Vec<Vec<f64>>>,
    pub distance: Option<Vec<Vec<f64>>>,
    pub v: Option<Vec<f64>>,
    pub vt: Option<Vec<f64>>,
    /// Defaults to a point mass at state 0.
    pub p0: Option<Vec<f64>>,
    /// Defaults to `p0`.
    pub pt0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Config {
    pub alpha: f64,
    pub alpha_t: f64,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub sd: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_ar1_steps")]
    pub steps: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Ergodicity constant for the total-variation bound, if known.
    pub c_tv: Option<f64>,
}

fn one() -> f64 {
    1.0
}
fn default_ar1_steps() -> u64 {
    50
}
fn default_replicas() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhConfig {
    /// Half-width of the uniform random-walk proposal.
    #[serde(default = "one")]
    pub width: f64,
    /// Uniform bound on the acceptance noise.
    pub s: f64,
    pub c: f64,
    pub rho: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_mh_steps")]
    pub steps: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Grid `0, step, ..., max` for the sup in the drift and `lambda`.
    #[serde(default = "default_grid_max")]
    pub grid_max: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    /// Grid points at or beyond this value determine the drift rate.
    #[serde(default = "one")]
    pub tail_from: f64,
}

fn default_mh_steps() -> u64 {
    10
}
fn default_samples() -> usize {
    10_000
}
fn default_grid_max() -> f64 {
    20.0
}
fn default_grid_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    #[serde(default = "default_alphabet")]
    pub alphabet: Vec<f64>,
    #[serde(default = "default_statistic")]
    pub statistic: String,
    pub observed: Vec<f64>,
    pub sigma: f64,
    #[serde(default = "one")]
    pub sigma_p: f64,
    /// Likelihood draws per noisy gradient.
    pub n: u64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_mh_steps")]
    pub steps: u64,
    #[serde(default = "default_samples")]
    pub replicas: usize,
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,
    #[serde(default = "default_samples")]
    pub draws: usize,
    /// Ergodicity constants; when both are given the perturbation bounds
    /// are evaluated and must be applicable.
    pub c: Option<f64>,
    pub rho: Option<f64>,
}

fn default_alphabet() -> Vec<f64> {
    vec![-1.0, 1.0]
}
fn default_statistic() -> String {
    "sum".into()
}
fn default_theta_grid() -> Vec<f64> {
    vec![-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The section for `kind` must be present and no other may be.
    fn validate(&self) -> Result<(), CliError> {
        let present = [
            (Kind::FiniteVerify, self.finite_verify.is_some()),
            (Kind::Ar1, self.ar1.is_some()),
            (Kind::Mh, self.mh.is_some()),
            (Kind::Langevin, self.langevin.is_some()),
        ];
        for (kind, there) in present {
            if kind == self.kind && !there {
                return Err(CliError::Schema(format!("missing section [{}]", kind.name())));
            }
            if kind != self.kind && there {
                return Err(CliError::Schema(format!(
                    "section [{}] does not belong to kind = \"{}\"",
                    kind.name(),
                    self.kind.name()
                )));
            }
        }
        if let Some(fv) = &self.finite_verify {
            match (fv.instances, &fv.instance) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Schema(
                        "give either `instances` or [finite-verify.instance], not both".into(),
                    ))
                }
                (Some(0), None) => return Err(CliError::Schema("`instances` must be positive".into())),
                (None, None) => return Err(CliError::Schema("give `instances` or [finite-verify.instance]".into())),
                _ => {}
            }
            if fv.theorems.is_empty() {
                return Err(CliError::Schema("`theorems` is empty".into()));
            }
            for t in &fv.theorems {
                match Theorem::parse(t) {
                    Some(th) if Theorem::FINITE.contains(&th) => {}
                    _ => return Err(CliError::Schema(format!("unknown finite theorem `{t}`"))),
                }
            }
        }
        if let Some(l) = &self.langevin {
            if wperturb_core::langevin::Statistic::parse(&l.statistic).is_none() {
                return Err(CliError::Schema(format!("unknown statistic `{}`", l.statistic)));
            }
            if l.c.is_some() != l.rho.is_some() {
                return Err(CliError::Schema("give both `c` and `rho` or neither".into()));
            }
        }
        Ok(())
    }
}
