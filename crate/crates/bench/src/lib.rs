//! Fixtures shared by the benchmarks: random points, laws and kernels,
//! without the admissibility checks of the instance generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wperturb_core::{DiscreteDistribution, FiniteKernel, FiniteMetricSpace};

fn random_row(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// `size` points in the unit square.
pub fn space(size: usize, seed: u64) -> FiniteMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..size).map(|_| vec![rng.random(), rng.random()]).collect();
    FiniteMetricSpace::euclidean(&points).expect("distinct points")
}

/// Two random laws on a random `size`-point space.
pub fn transport_pair(size: usize, seed: u64) -> (DiscreteDistribution, DiscreteDistribution, FiniteMetricSpace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mu = DiscreteDistribution::from_unnormalized(random_row(&mut rng, size)).unwrap();
    let nu = DiscreteDistribution::from_unnormalized(random_row(&mut rng, size)).unwrap();
    (mu, nu, space(size, seed))
}

/// A dense random kernel on a random `size`-point space.
pub fn kernel(size: usize, seed: u64) -> (FiniteKernel, FiniteMetricSpace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e7);
    let rows = (0..size).map(|_| random_row(&mut rng, size)).collect();
    (FiniteKernel::new(rows).unwrap(), space(size, seed))
}
