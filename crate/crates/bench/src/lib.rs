//! Fixed inputs shared by the kernel benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use photoloc_core::fock::FockState;
use photoloc_core::linalg::{haar_unitary, ComplexMatrix};
use photoloc_core::runner::{load_preset, ExperimentConfig};

/// Haar unitary reproducible from `seed`.
pub fn unitary(n: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `photons` photons in the first modes of an `m`-mode register.
pub fn leading_photons(m: usize, photons: usize) -> FockState {
    FockState::new((0..m).map(|i| usize::from(i < photons)).collect())
}

/// Preset config with its grid shortened to `steps` intervals.
pub fn short_preset(name: &str, steps: usize) -> ExperimentConfig {
    let mut config = load_preset(name).expect("shipped preset").config;
    config.grid.t_end = config.grid.t_start + (config.grid.t_end - config.grid.t_start) * steps as f64 / config.grid.steps as f64;
    config.grid.steps = steps;
    config
}
