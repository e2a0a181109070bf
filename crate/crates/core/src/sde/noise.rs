use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::TWO_PI;

/// Reproducible Gaussian stream for one path.
///
/// The generator is ChaCha8 seeded with `base_seed` and switched to stream
/// `path_index`, so the sequence depends only on `(base_seed, path_index)`:
/// paths can be simulated in any order, on any worker.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    base_seed: u64,
    path_index: u64,
    draws: u64,
}

impl NoiseStream {
    pub fn new(base_seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(path_index);
        NoiseStream { rng, base_seed, path_index, draws: 0 }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Number of variates drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn normals<const D: usize>(&mut self) -> [f64; D] {
        std::array::from_fn(|_| self.standard_normal())
    }

    /// Brownian increment over `dt`: `√dt · N(0, I)`.
    #[inline]
    pub fn increment<const D: usize>(&mut self, dt: f64) -> [f64; D] {
        let s = dt.sqrt();
        std::array::from_fn(|_| s * self.standard_normal())
    }

    /// Uniform angle in `[0, 2π)`.
    #[inline]
    pub fn uniform_angle(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>() * TWO_PI
    }
}
