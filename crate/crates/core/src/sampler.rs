//! Shot-based measurement: seeded draws from a Fock distribution and the
//! empirical distributions they produce.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), a counter-based stream
//! cipher generator whose output is fixed for a given 64-bit seed on every
//! platform. Independent streams for timesteps or repetitions are derived
//! with [`sub_seed`].

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockDistribution, FockError, FockState};

/// Normalization slack accepted by [`draw`].
pub const DRAW_NORMALIZATION_TOL: f64 = 1e-6;
/// Slack accepted when a probability is compared against `[0, 1]`.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// Shot counts swept by the sample-count study.
pub const DEFAULT_SHOT_GRID: [u64; 4] = [10, 100, 1000, 5000];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("distribution sums to {total}, not 1")]
    Unnormalized { total: f64 },

    #[error("at least one shot is required")]
    NoShots,

    #[error("probability {0} lies outside [0, 1]")]
    OutOfRange(f64),

    #[error(transparent)]
    Fock(#[from] FockError),
}

pub type SamplerResult<T> = Result<T, SamplerError>;

/// Outcome counts of repeated photon-counting measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub shots: u64,
    pub seed: u64,
    modes: usize,
    photons: usize,
    /// Every outcome of the source distribution, in its enumeration order.
    counts: Vec<(FockState, u64)>,
}

impl SampleSet {
    pub fn counts(&self) -> &[(FockState, u64)] {
        &self.counts
    }

    pub fn count(&self, state: &FockState) -> u64 {
        self.counts
            .iter()
            .find(|(s, _)| s == state)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }

    /// CSV rows `timestep,occupation,count` for every outcome.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W, timestep: usize) -> io::Result<()> {
        for (state, n) in &self.counts {
            writeln!(out, "{timestep},{state},{n}")?;
        }
        Ok(())
    }
}

pub const SAMPLE_CSV_HEADER: &str = "timestep,occupation,count";

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed for stream `index` of `seed`:
/// `splitmix64(seed ^ splitmix64(index))`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// `shots` independent inverse-CDF draws over the distribution's
/// enumeration order.
pub fn draw(dist: &FockDistribution, shots: u64, seed: u64) -> SamplerResult<SampleSet> {
    if shots == 0 {
        return Err(SamplerError::NoShots);
    }
    let total = dist.total();
    if (total - 1.0).abs() > DRAW_NORMALIZATION_TOL {
        return Err(SamplerError::Unnormalized { total });
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for (_, p) in dist.entries() {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut tallies = vec![0u64; dist.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = dist.len() - 1;
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        tallies[idx] += 1;
    }
    let counts = dist
        .entries()
        .iter()
        .zip(tallies)
        .map(|((s, _), n)| (s.clone(), n))
        .collect();
    Ok(SampleSet {
        shots,
        seed,
        modes: dist.modes(),
        photons: dist.photons(),
        counts,
    })
}

/// Relative frequencies `count / shots`.
pub fn empirical(samples: &SampleSet) -> FockDistribution {
    let shots = samples.shots as f64;
    let entries = samples
        .counts
        .iter()
        .map(|(s, n)| (s.clone(), *n as f64 / shots))
        .collect();
    FockDistribution::from_entries(samples.modes, samples.photons, entries)
        .expect("sample keys come from a valid distribution")
}

/// `Δ = |P_num − P_bs|`.
pub fn true_error(p_num: f64, p_bs: f64) -> SamplerResult<f64> {
    for p in [p_num, p_bs] {
        if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
            return Err(SamplerError::OutOfRange(p));
        }
    }
    Ok((p_num - p_bs).abs())
}

/// Total-variation distance between two distributions on the same outcomes.
pub fn total_variation(a: &FockDistribution, b: &FockDistribution) -> f64 {
    let mut tv = 0.0;
    for (s, p) in a.entries() {
        tv += (p - b.probability(s)).abs();
    }
    for (s, q) in b.entries() {
        if !a.contains(s) {
            tv += q.abs();
        }
    }
    0.5 * tv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(probs: &[f64]) -> FockDistribution {
        let m = probs.len();
        let entries = probs
            .iter()
            .enumerate()
            .map(|(j, &p)| (FockState::single(m, j), p))
            .collect();
        FockDistribution::from_entries(m, 1, entries).unwrap()
    }

    #[test]
    fn deterministic_distribution() {
        let d = dist(&[1.0, 0.0, 0.0]);
        let s = draw(&d, 100, 1).unwrap();
        assert_eq!(s.count(&FockState::single(3, 0)), 100);
        assert_eq!(s.counts().iter().map(|(_, n)| n).sum::<u64>(), 100);
    }

    #[test]
    fn zero_probability_outcomes_never_drawn() {
        let d = dist(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let s = draw(&d, 20_000, 3).unwrap();
        for j in [0, 2, 4] {
            assert_eq!(s.count(&FockState::single(5, j)), 0);
        }
    }

    #[test]
    fn fair_coin_converges() {
        let d = dist(&[0.5, 0.5]);
        let mean: f64 = (0..4)
            .map(|r| {
                let s = draw(&d, 1_000_000, sub_seed(99, r)).unwrap();
                empirical(&s).entries()[0].1
            })
            .sum::<f64>()
            / 4.0;
        assert!((mean - 0.5).abs() < 0.002);
    }

    #[test]
    fn empirical_frequencies() {
        let d = dist(&[0.75, 0.25]);
        let s = SampleSet {
            shots: 100,
            seed: 0,
            modes: 2,
            photons: 1,
            counts: vec![(FockState::single(2, 0), 75), (FockState::single(2, 1), 25)],
        };
        let e = empirical(&s);
        assert_eq!(e.entries()[0].1, 0.75);
        assert_eq!(e.entries()[1].1, 0.25);
        assert_eq!(e.total(), 1.0);
        let one = draw(&d, 1, 5).unwrap();
        let e = empirical(&one);
        assert_eq!(e.entries().iter().filter(|(_, p)| *p == 1.0).count(), 1);
    }

    #[test]
    fn round_trip_total_variation() {
        let d = dist(&[0.05, 0.1, 0.2, 0.3, 0.15, 0.12, 0.08]);
        let e = empirical(&draw(&d, 1_000_000, 11).unwrap());
        assert!(total_variation(&d, &e) < 0.005);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(draw(&dist(&[0.5, 0.4]), 10, 0).unwrap_err(), SamplerError::Unnormalized { total: 0.9 });
        assert_eq!(draw(&dist(&[1.0]), 0, 0).unwrap_err(), SamplerError::NoShots);
        assert_eq!(true_error(1.2, 0.5).unwrap_err(), SamplerError::OutOfRange(1.2));
        assert_eq!(true_error(0.5, -0.1).unwrap_err(), SamplerError::OutOfRange(-0.1));
    }

    #[test]
    fn true_error_values() {
        assert!((true_error(0.5, 0.45).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(true_error(0.3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn determinism_and_stream_independence() {
        let d = dist(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(draw(&d, 500, 42).unwrap(), draw(&d, 500, 42).unwrap());
        assert_ne!(draw(&d, 500, sub_seed(42, 0)).unwrap(), draw(&d, 500, sub_seed(42, 1)).unwrap());
        assert_ne!(sub_seed(1, 2), sub_seed(2, 1));
    }

    #[test]
    fn csv_rows() {
        let s = draw(&dist(&[0.0, 1.0]), 3, 0).unwrap();
        let mut buf = Vec::new();
        s.write_csv_rows(&mut buf, 7).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "7,10,0\n7,01,3\n");
    }

    #[test]
    fn error_shrinks_like_inverse_sqrt_shots() {
        let d = dist(&[0.05, 0.1, 0.2, 0.3, 0.15, 0.12, 0.08]);
        let mean_delta = |shots: u64| -> f64 {
            let reps = 100;
            let mut acc = 0.0;
            for r in 0..reps {
                let e = empirical(&draw(&d, shots, sub_seed(shots, r)).unwrap());
                for ((_, p), (_, q)) in d.entries().iter().zip(e.entries()) {
                    acc += true_error(*p, *q).unwrap();
                }
            }
            acc / (reps as f64 * d.len() as f64)
        };
        let scaled: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&s| mean_delta(s) * (s as f64).sqrt())
            .collect();
        let (lo, hi) = scaled
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &c| (lo.min(c), hi.max(c)));
        assert!(hi / lo < 2.0, "{scaled:?}");
    }
}
