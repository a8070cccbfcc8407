//! Perturbation bounds for Markov chains in Wasserstein, V-norm and total
//! variation distance, with exact verification on finite state spaces and
//! the AR(1), approximate Metropolis-Hastings and noisy Langevin
//! applications.

// `!(x > 0.0)` is how parameter checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar1;
pub mod bounds;
pub mod error;
pub mod instance;
pub mod kernels;
pub mod langevin;
pub mod mh;
pub mod otcore;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod suites;

pub use bounds::{BoundInputs, PerturbationReport, Theorem};
pub use error::{Error, Inapplicable, Result};
pub use kernels::{DriftEstimate, ErgodicityEstimate, FiniteKernel, MetricTag};
pub use otcore::{Coupling, DiscreteDistribution, FiniteMetricSpace, WeightFunction};
