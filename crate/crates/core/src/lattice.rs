//! Tight-binding chain Hamiltonians and their propagators.
//!
//! Three onsite profiles are supported: a static linear field (Wannier-Stark
//! ladder), a sinusoidally driven linear field, and the quasiperiodic
//! Aubry-André-Harper cosine. Linear potentials are centred on the chain
//! midpoint; a uniform energy shift only contributes a global phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};

/// Inverse golden mean `(√5 − 1)/2`, the conventional AAH incommensurability.
pub const INVERSE_GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Largest argument evaluated with the J₀ power series.
const BESSEL_SERIES_LIMIT: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("chain must have at least one site")]
    NoSites,

    #[error("coupling ({j}, {k}) must satisfy 0 <= j < k < {sites}")]
    CouplingOutOfRange { j: usize, k: usize, sites: usize },

    #[error("duplicate coupling ({j}, {k})")]
    DuplicateCoupling { j: usize, k: usize },

    #[error("nearest-neighbour amplitude |A| = {magnitude} on ({j}, {k}) exceeds 1")]
    AmplitudeTooLarge { j: usize, k: usize, magnitude: f64 },

    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("time grid needs steps >= 1 and t_end > t_start (got {steps} steps on [{t_start}, {t_end}])")]
    InvalidGrid { t_start: f64, t_end: f64, steps: usize },

    #[error("Bloch scales are undefined for zero field")]
    ZeroField,

    #[error("effective hopping is undefined for zero drive frequency")]
    ZeroFrequency,

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type LatticeResult<T> = Result<T, LatticeError>;

/// One hopping term `−J·A_jk a_j† a_k + h.c.`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub j: usize,
    pub k: usize,
    pub amplitude: Complex64,
}

/// Onsite energy profile of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Onsite {
    /// `a·F·(j − (M−1)/2)`.
    StaticField { field: f64 },
    /// `a·A·cos(ωt)·(j − (M−1)/2)`.
    Sinusoidal { amplitude: f64, omega: f64 },
    /// `λ·cos(2πα(j+1) + δ)`, sites counted from one inside the cosine.
    Aah { lambda: f64, alpha: f64, phase: f64 },
}

impl Onsite {
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Onsite::Sinusoidal { amplitude, .. } if *amplitude != 0.0)
    }
}

/// Symbolic description of a one-dimensional tight-binding Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightBindingSpec {
    pub sites: usize,
    pub hopping: f64,
    pub couplings: Vec<Coupling>,
    pub onsite: Onsite,
    /// Uniform shift added to every onsite energy.
    #[serde(default)]
    pub onsite_offset: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub lattice_a: f64,
}

fn one() -> f64 {
    1.0
}

impl TightBindingSpec {
    /// Open nearest-neighbour chain with unit amplitudes.
    pub fn chain(sites: usize, hopping: f64, onsite: Onsite) -> Self {
        let couplings = (0..sites.saturating_sub(1))
            .map(|j| Coupling {
                j,
                k: j + 1,
                amplitude: Complex64::new(1.0, 0.0),
            })
            .collect();
        Self {
            sites,
            hopping,
            couplings,
            onsite,
            onsite_offset: 0.0,
            hbar: 1.0,
            lattice_a: 1.0,
        }
    }

    pub fn validate(&self) -> LatticeResult<()> {
        if self.sites == 0 {
            return Err(LatticeError::NoSites);
        }
        for (name, value) in [("hbar", self.hbar), ("lattice_a", self.lattice_a)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(LatticeError::NonPositive { name, value });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.couplings {
            if !(c.j < c.k && c.k < self.sites) {
                return Err(LatticeError::CouplingOutOfRange {
                    j: c.j,
                    k: c.k,
                    sites: self.sites,
                });
            }
            if !seen.insert((c.j, c.k)) {
                return Err(LatticeError::DuplicateCoupling { j: c.j, k: c.k });
            }
            let magnitude = c.amplitude.norm();
            if c.k == c.j + 1 && magnitude > 1.0 + 1e-12 {
                return Err(LatticeError::AmplitudeTooLarge {
                    j: c.j,
                    k: c.k,
                    magnitude,
                });
            }
        }
        Ok(())
    }

    pub fn is_time_dependent(&self) -> bool {
        self.onsite.is_time_dependent()
    }

    /// Onsite energies `h_j(t)` including the uniform offset.
    pub fn onsite_energies(&self, t: f64) -> Vec<f64> {
        let centre = (self.sites as f64 - 1.0) / 2.0;
        (0..self.sites)
            .map(|j| {
                let x = j as f64 - centre;
                let h = match self.onsite {
                    Onsite::StaticField { field } => self.lattice_a * field * x,
                    Onsite::Sinusoidal { amplitude, omega } => {
                        self.lattice_a * amplitude * (omega * t).cos() * x
                    }
                    Onsite::Aah {
                        lambda,
                        alpha,
                        phase,
                    } => lambda * (2.0 * PI * alpha * (j as f64 + 1.0) + phase).cos(),
                };
                h + self.onsite_offset
            })
            .collect()
    }
}

/// Uniform time grid `t_k = t_start + k·(t_end − t_start)/steps`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> LatticeResult<Self> {
        let grid = Self {
            t_start,
            t_end,
            steps,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> LatticeResult<()> {
        if self.steps == 0 || !(self.t_end > self.t_start) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(LatticeError::InvalidGrid {
                t_start: self.t_start,
                t_end: self.t_end,
                steps: self.steps,
            });
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt()
    }

    /// All `steps + 1` timestamps, starting at `t_start`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Single-particle Hamiltonian matrix at time `t`.
pub fn hamiltonian_matrix(spec: &TightBindingSpec, t: f64) -> LatticeResult<ComplexMatrix> {
    spec.validate()?;
    let m = spec.sites;
    let mut h = ComplexMatrix::zeros(m, m);
    for (j, e) in spec.onsite_energies(t).into_iter().enumerate() {
        h[(j, j)] = Complex64::new(e, 0.0);
    }
    for c in &spec.couplings {
        let v = -spec.hopping * c.amplitude;
        h[(c.j, c.k)] += v;
        h[(c.k, c.j)] += v.conj();
    }
    Ok(h)
}

/// Cumulative propagators `U(t_start, t_k)` for every grid point, the first
/// being the identity.
///
/// Time-dependent specs use the time-ordered midpoint product
/// `U(t_{k+1}) = exp(−i H(t_k + Δt/2) Δt/ħ) · U(t_k)`; static specs are
/// exponentiated directly at each `t_k`.
pub fn propagator_sequence(spec: &TightBindingSpec, grid: &TimeGrid) -> LatticeResult<Vec<ComplexMatrix>> {
    spec.validate()?;
    grid.validate()?;
    let m = spec.sites;
    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(ComplexMatrix::identity(m, m));

    if !spec.is_time_dependent() {
        let h = hamiltonian_matrix(spec, grid.t_start)?;
        let eig = linalg::hermitian_eig(&h)?;
        for k in 1..=grid.steps {
            let elapsed = (grid.time(k) - grid.t_start) / spec.hbar;
            out.push(eig.reconstruct_with(|l| Complex64::from_polar(1.0, -l * elapsed)));
        }
        return Ok(out);
    }

    let dt = grid.dt();
    let mut current = ComplexMatrix::identity(m, m);
    for k in 0..grid.steps {
        let h = hamiltonian_matrix(spec, grid.time(k) + 0.5 * dt)?;
        let step = linalg::expm_unitary(&h, dt / spec.hbar)?;
        current = step * current;
        out.push(current.clone());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochScales {
    pub length: f64,
    pub period: f64,
}

/// Bloch length `2J/F` and period `2πħ/(aF)`.
pub fn bloch_scales(hopping: f64, field: f64, lattice_a: f64, hbar: f64) -> LatticeResult<BlochScales> {
    if field == 0.0 {
        return Err(LatticeError::ZeroField);
    }
    Ok(BlochScales {
        length: 2.0 * hopping / field,
        period: 2.0 * PI * hbar / (lattice_a * field),
    })
}

/// Renormalized hopping `J·J₀(A/ħω)` of the sinusoidally driven chain.
pub fn effective_hopping(hopping: f64, amplitude: f64, omega: f64, hbar: f64) -> LatticeResult<f64> {
    if omega == 0.0 {
        return Err(LatticeError::ZeroFrequency);
    }
    Ok(hopping * bessel_j0(amplitude / (hbar * omega)))
}

/// Zeroth-order Bessel function of the first kind.
///
/// Even power series up to |x| = 12, Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= BESSEL_SERIES_LIMIT {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= -q / (k * k);
            sum += term;
            if term.abs() <= 1e-16 * sum.abs().max(1e-300) || k > 200.0 {
                break;
            }
            k += 1.0;
        }
        return sum;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let p = 1.0 - 9.0 / 128.0 * inv2 + 3675.0 / 32768.0 * inv2 * inv2;
    let q = -0.125 * inv + 75.0 / 1024.0 * inv2 * inv - 59535.0 / 262144.0 * inv2 * inv2 * inv;
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
