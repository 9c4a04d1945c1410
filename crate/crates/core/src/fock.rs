//! Exact Fock-state evolution through a linear interferometer.
//!
//! The interferometer matrix follows the creation-operator convention
//! `a_i† → Σ_j U_ij a_j†`: row `i` is the input mode, column `j` the output
//! mode. For a circuit whose realized unitary `S` propagates the
//! single-particle state vector, the interferometer matrix is `Sᵀ`.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Largest permanent order evaluated exactly.
pub const MAX_PERMANENT_ORDER: usize = 20;
/// Largest configuration space enumerated by [`full_distribution`].
pub const MAX_CONFIGURATIONS: usize = 1_000_000;
/// Normalization tolerance of a [`FockDistribution`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

const FACTORIALS: [u64; 21] = {
    let mut f = [1u64; 21];
    let mut i = 1;
    while i < 21 {
        f[i] = f[i - 1] * i as u64;
        i += 1;
    }
    f
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("permanent of order {0} exceeds the limit of {MAX_PERMANENT_ORDER}")]
    TooLarge(usize),

    #[error("photon number mismatch: input has {input}, output has {output}")]
    PhotonMismatch { input: usize, output: usize },

    #[error("state has {state} modes but the interferometer has {modes}")]
    ModeMismatch { state: usize, modes: usize },

    #[error("configuration space C({modes}+{photons}-1, {photons}) = {size} exceeds {MAX_CONFIGURATIONS}")]
    SpaceTooLarge { modes: usize, photons: usize, size: u128 },

    #[error("state carries no photons")]
    Vacuum,
}

pub type FockResult<T> = Result<T, FockError>;

/// Occupation vector `(n_0, …, n_{M−1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<usize>);

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    /// One photon in `mode` of an `modes`-mode register.
    pub fn single(modes: usize, mode: usize) -> Self {
        let mut occ = vec![0; modes];
        occ[mode] = 1;
        Self(occ)
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().sum()
    }

    /// Mode indices, each repeated by its occupation.
    fn expanded_modes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n))
            .collect()
    }

    fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

/// Colexicographic order: compare the last mode first.
pub fn colex_cmp(a: &FockState, b: &FockState) -> Ordering {
    a.0.iter().rev().cmp(b.0.iter().rev())
}

impl fmt::Display for FockState {
    /// Digits concatenated (`0001000`); dot-separated if any mode holds ten or more.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.0.iter().any(|&n| n >= 10) { "." } else { "" };
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

fn factorial(n: usize) -> f64 {
    if n < FACTORIALS.len() {
        FACTORIALS[n] as f64
    } else {
        (1..=n).map(|k| k as f64).product()
    }
}

/// Probability distribution over all occupation vectors of fixed photon
/// number, stored in colexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    modes: usize,
    photons: usize,
    entries: Vec<(FockState, f64)>,
}

impl FockDistribution {
    /// Builds a distribution from arbitrary entries; keys are sorted into
    /// colexicographic order. All keys must share `modes` and `photons`.
    pub fn from_entries(modes: usize, photons: usize, mut entries: Vec<(FockState, f64)>) -> FockResult<Self> {
        for (state, _) in &entries {
            if state.modes() != modes {
                return Err(FockError::ModeMismatch {
                    state: state.modes(),
                    modes,
                });
            }
            if state.photons() != photons {
                return Err(FockError::PhotonMismatch {
                    input: photons,
                    output: state.photons(),
                });
            }
        }
        entries.sort_by(|a, b| colex_cmp(&a.0, &b.0));
        Ok(Self {
            modes,
            photons,
            entries,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn entries(&self) -> &[(FockState, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn probability(&self, state: &FockState) -> f64 {
        self.entries
            .binary_search_by(|(s, _)| colex_cmp(s, state))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn contains(&self, state: &FockState) -> bool {
        self.entries.binary_search_by(|(s, _)| colex_cmp(s, state)).is_ok()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOL
            && self.entries.iter().all(|(_, p)| (-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(p))
    }
}

/// `C(modes + photons − 1, photons)`.
pub fn configuration_count(modes: usize, photons: usize) -> u128 {
    if modes == 0 {
        return u128::from(photons == 0);
    }
    let n = (modes + photons - 1) as u128;
    let k = photons.min(modes - 1) as u128;
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Every occupation vector with `photons` photons on `modes` modes, in
/// colexicographic order.
pub fn enumerate_configurations(modes: usize, photons: usize) -> Vec<FockState> {
    fn fill(out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>, mode: usize, remaining: usize) {
        if mode == 0 {
            prefix.push(remaining);
            let mut occ = prefix.clone();
            occ.reverse();
            out.push(occ);
            prefix.pop();
            return;
        }
        // prefix holds modes from the last one downwards, smallest first
        for n in 0..=remaining {
            prefix.push(n);
            fill(out, prefix, mode - 1, remaining - n);
            prefix.pop();
        }
    }
    if modes == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    fill(&mut out, &mut Vec::with_capacity(modes), modes - 1, photons);
    out.into_iter().map(FockState).collect()
}

/// Matrix permanent by Ryser's formula over Gray-code ordered column subsets,
/// `O(2ⁿ·n)`.
pub fn permanent(a: &ComplexMatrix) -> FockResult<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(FockError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    match n {
        0 => return Ok(Complex64::new(1.0, 0.0)),
        1 => return Ok(a[(0, 0)]),
        2 => return Ok(a[(0, 0)] * a[(1, 1)] + a[(0, 1)] * a[(1, 0)]),
        _ if n > MAX_PERMANENT_ORDER => return Err(FockError::TooLarge(n)),
        _ => {}
    }

    // Per(A) = (−1)ⁿ Σ_{S ⊆ cols} (−1)^{|S|} Π_i Σ_{j∈S} a_ij
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_subset = vec![false; n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut subset_size = 0usize;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        if in_subset[col] {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, col)];
            }
            subset_size -= 1;
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, col)];
            }
            subset_size += 1;
        }
        in_subset[col] = !in_subset[col];
        let prod: Complex64 = row_sums.iter().product();
        if subset_size % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(if n % 2 == 0 { total } else { -total })
}

fn check_pair(u: &ComplexMatrix, input: &FockState, output: &FockState) -> FockResult<()> {
    if u.nrows() != u.ncols() {
        return Err(FockError::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    for state in [input, output] {
        if state.modes() != u.nrows() {
            return Err(FockError::ModeMismatch {
                state: state.modes(),
                modes: u.nrows(),
            });
        }
    }
    if input.photons() != output.photons() {
        return Err(FockError::PhotonMismatch {
            input: input.photons(),
            output: output.photons(),
        });
    }
    Ok(())
}

/// `U^{(F,I)}`: row `r` repeated `n_r` times for the input, column `c`
/// repeated `n_c` times for the output.
pub fn submatrix(u: &ComplexMatrix, input: &FockState, output: &FockState) -> FockResult<ComplexMatrix> {
    check_pair(u, input, output)?;
    let rows = input.expanded_modes();
    let cols = output.expanded_modes();
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]))
}

/// `|Per U^{(F,I)}|² / (Π n_i^{(I)}! Π n_i^{(F)}!)`.
pub fn outcome_probability(u: &ComplexMatrix, input: &FockState, output: &FockState) -> FockResult<f64> {
    let sub = submatrix(u, input, output)?;
    let per = permanent(&sub)?;
    Ok(per.norm_sqr() / (input.factorial_product() * output.factorial_product()))
}

/// Probabilities of every output configuration for `input`.
///
/// Single photons skip the permanent machinery: `P_j = |U_ij|²`.
pub fn full_distribution(u: &ComplexMatrix, input: &FockState) -> FockResult<FockDistribution> {
    let modes = u.nrows();
    check_pair(u, input, input)?;
    let photons = input.photons();
    if photons == 0 {
        return Err(FockError::Vacuum);
    }
    if photons == 1 {
        let source = input.occupations().iter().position(|&n| n == 1).expect("one photon");
        let entries = (0..modes)
            .map(|j| (FockState::single(modes, j), u[(source, j)].norm_sqr()))
            .collect();
        return Ok(FockDistribution {
            modes,
            photons,
            entries,
        });
    }
    let size = configuration_count(modes, photons);
    if size > MAX_CONFIGURATIONS as u128 {
        return Err(FockError::SpaceTooLarge { modes, photons, size });
    }
    if photons > MAX_PERMANENT_ORDER {
        return Err(FockError::TooLarge(photons));
    }
    let outputs = enumerate_configurations(modes, photons);
    let entries = outputs
        .into_par_iter()
        .map(|out| {
            let p = outcome_probability(u, input, &out)?;
            Ok((out, p))
        })
        .collect::<FockResult<Vec<_>>>()?;
    Ok(FockDistribution {
        modes,
        photons,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn brute_force(a: &ComplexMatrix) -> Complex64 {
        fn rec(a: &ComplexMatrix, row: usize, used: &mut Vec<bool>, acc: Complex64, total: &mut Complex64) {
            if row == a.nrows() {
                *total += acc;
                return;
            }
            for col in 0..a.ncols() {
                if !used[col] {
                    used[col] = true;
                    rec(a, row + 1, used, acc * a[(row, col)], total);
                    used[col] = false;
                }
            }
        }
        let mut total = c(0.0, 0.0);
        rec(a, 0, &mut vec![false; a.ncols()], c(1.0, 0.0), &mut total);
        total
    }

    #[test]
    fn small_permanents() {
        let a = ComplexMatrix::from_element(1, 1, c(2.5, -1.0));
        assert_eq!(permanent(&a).unwrap(), c(2.5, -1.0));
        assert_eq!(permanent(&ComplexMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap(), c(2.0, 0.0));
        assert_eq!(permanent(&ComplexMatrix::from_element(3, 3, c(1.0, 0.0))).unwrap(), c(6.0, 0.0));
        for n in 0..8 {
            let p = permanent(&ComplexMatrix::identity(n, n)).unwrap();
            assert!((p - c(1.0, 0.0)).norm() < 1e-15);
        }
        let ones = ComplexMatrix::from_element(6, 6, c(1.0, 0.0));
        assert!((permanent(&ones).unwrap() - c(720.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn permanent_errors() {
        assert_eq!(
            permanent(&ComplexMatrix::zeros(2, 3)).unwrap_err(),
            FockError::NotSquare { rows: 2, cols: 3 }
        );
        assert_eq!(
            permanent(&ComplexMatrix::zeros(21, 21)).unwrap_err(),
            FockError::TooLarge(21)
        );
    }

    #[test]
    fn random_five_by_five_matches_permutation_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a = random_matrix(5, &mut rng);
            let expected = brute_force(&a);
            assert!((permanent(&a).unwrap() - expected).norm() <= 1e-10 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn zero_row_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a = random_matrix(6, &mut rng);
        for col in 0..6 {
            a[(3, col)] = c(0.0, 0.0);
        }
        assert!(permanent(&a).unwrap().norm() < 1e-14);
    }

    #[test]
    fn submatrix_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = haar_unitary(7, &mut rng);
        let s = submatrix(&u, &FockState::single(7, 2), &FockState::single(7, 5)).unwrap();
        assert_eq!(s.shape(), (1, 1));
        assert_eq!(s[(0, 0)], u[(2, 5)]);

        let input = FockState::new(vec![0, 1, 0, 0, 1, 0, 0]);
        let output = FockState::new(vec![0, 0, 0, 0, 0, 2, 0]);
        let s = submatrix(&u, &input, &output).unwrap();
        assert_eq!(s.shape(), (2, 2));
        assert_eq!(s[(1, 1)], u[(4, 5)]);

        let u2 = haar_unitary(2, &mut rng);
        let s = submatrix(&u2, &FockState::new(vec![1, 1]), &FockState::new(vec![2, 0])).unwrap();
        assert_eq!(s, ComplexMatrix::from_row_slice(2, 2, &[u2[(0, 0)], u2[(0, 0)], u2[(1, 0)], u2[(1, 0)]]));

        assert_eq!(
            submatrix(&u2, &FockState::new(vec![1, 1]), &FockState::new(vec![1, 0])).unwrap_err(),
            FockError::PhotonMismatch { input: 2, output: 1 }
        );
    }

    #[test]
    fn hong_ou_mandel() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let input = FockState::new(vec![1, 1]);
        let coincidence = outcome_probability(&bs, &input, &FockState::new(vec![1, 1])).unwrap();
        assert!(coincidence.abs() < 1e-15);
        let bunched = outcome_probability(&bs, &input, &FockState::new(vec![2, 0])).unwrap();
        assert!((bunched - 0.5).abs() < 1e-15);
        let dist = full_distribution(&bs, &input).unwrap();
        assert!((dist.probability(&FockState::new(vec![0, 2])) - 0.5).abs() < 1e-15);
        assert!(dist.is_normalized());
    }

    #[test]
    fn identity_preserves_state() {
        let id = ComplexMatrix::identity(4, 4);
        let s = FockState::new(vec![2, 0, 1, 1]);
        assert!((outcome_probability(&id, &s, &s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn colex_enumeration() {
        let configs = enumerate_configurations(3, 2);
        let as_vecs: Vec<Vec<usize>> = configs.iter().map(|s| s.occupations().to_vec()).collect();
        assert_eq!(
            as_vecs,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
        assert!(configs.windows(2).all(|w| colex_cmp(&w[0], &w[1]) == Ordering::Less));
        assert_eq!(enumerate_configurations(7, 1).len(), 7);
        assert_eq!(enumerate_configurations(7, 1)[3], FockState::single(7, 3));
        for (m, n) in [(1, 3), (4, 3), (7, 2), (5, 5)] {
            assert_eq!(enumerate_configurations(m, n).len() as u128, configuration_count(m, n));
        }
        assert_eq!(configuration_count(7, 1), 7);
        assert_eq!(configuration_count(23, 23), 4_116_715_363_800);
    }

    #[test]
    fn single_photon_distribution_is_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = haar_unitary(7, &mut rng);
        let dist = full_distribution(&u, &FockState::single(7, 3)).unwrap();
        assert_eq!(dist.len(), 7);
        for j in 0..7 {
            assert!((dist.probability(&FockState::single(7, j)) - u[(3, j)].norm_sqr()).abs() < 1e-12);
            // agrees with the general permanent route
            let p = outcome_probability(&u, &FockState::single(7, 3), &FockState::single(7, j)).unwrap();
            assert!((p - dist.entries()[j].1).abs() < 1e-15);
        }
    }

    #[test]
    fn distribution_errors() {
        let id = ComplexMatrix::identity(3, 3);
        assert_eq!(full_distribution(&id, &FockState::new(vec![0, 0, 0])).unwrap_err(), FockError::Vacuum);
        assert!(matches!(
            full_distribution(&id, &FockState::new(vec![1, 0])),
            Err(FockError::ModeMismatch { .. })
        ));
        let big = ComplexMatrix::identity(20, 20);
        let mut occ = vec![0; 20];
        occ[0] = 12;
        assert!(matches!(
            full_distribution(&big, &FockState::new(occ)),
            Err(FockError::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn display_format() {
        assert_eq!(FockState::single(7, 3).to_string(), "0001000");
        assert_eq!(FockState::new(vec![10, 0, 2]).to_string(), "10.0.2");
    }

    proptest! {
        #[test]
        fn permanent_symmetries(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(5, &mut rng);
            let base = permanent(&a).unwrap();
            let tol = 1e-10 * base.norm().max(1.0);

            let mut swapped = a.clone();
            swapped.swap_rows(0, 3);
            swapped.swap_columns(1, 4);
            prop_assert!((permanent(&swapped).unwrap() - base).norm() < tol);

            let d: Vec<Complex64> = (0..5).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let mut scaled = a.clone();
            for (i, di) in d.iter().enumerate() {
                for col in 0..5 {
                    scaled[(i, col)] *= di;
                }
            }
            let factor: Complex64 = d.iter().product();
            let expected = factor * base;
            prop_assert!((permanent(&scaled).unwrap() - expected).norm() < 1e-10 * expected.norm().max(1.0));
        }

        #[test]
        fn multi_photon_distribution_normalized(seed in 0u64..200, photons in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = haar_unitary(4, &mut rng);
            let mut occ = vec![0; 4];
            for _ in 0..photons {
                occ[rng.random_range(0..4)] += 1;
            }
            let dist = full_distribution(&u, &FockState::new(occ)).unwrap();
            prop_assert!((dist.total() - 1.0).abs() < 1e-9);
            prop_assert!(dist.is_normalized());
        }
    }
}
