//! Photonic circuits: beam-splitter and phase-shift gate lists, their
//! realized unitaries, and two compilers (Trotterized Hamiltonian and
//! rectangular mesh decomposition of an arbitrary unitary).
//!
//! Gate convention. A beam splitter on modes `(j, k)` embeds
//!
//! ```text
//! B(θ, φ) = [[cos θ,            −i e^{iφ} sin θ],
//!            [−i e^{−iφ} sin θ,  cos θ        ]]
//! ```
//!
//! which is `exp(−iθ (e^{iφ}|j⟩⟨k| + h.c.))`, the propagator of a single
//! hopping term. A phase shift on mode `j` embeds `e^{iδ}`. Gates act on the
//! single-particle state vector in list order, so the realized unitary is
//! `G_last ⋯ G_2 G_1`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, LatticeError, TightBindingSpec};
use crate::linalg::{self, ComplexMatrix, LinalgError};

/// Rotation/phase magnitude below which a gate counts as the identity.
pub const NULL_GATE_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit needs at least one Trotter step")]
    ZeroSteps,

    #[error("coupling ({j}, {k}) has zero amplitude; its phase log(A) is undefined")]
    ZeroAmplitude { j: usize, k: usize },

    #[error("gate {index} references mode {mode} in a {modes}-mode circuit")]
    ModeOutOfRange { index: usize, mode: usize, modes: usize },

    #[error("beam splitter {index} acts twice on mode {mode}")]
    RepeatedMode { index: usize, mode: usize },

    #[error("spec is time dependent; compile it slice by slice")]
    TimeDependent,

    #[error("malformed circuit document: {0}")]
    Json(String),

    #[error(transparent)]
    Lattice(#[from] LatticeError),

    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type CircuitResult<T> = Result<T, CircuitError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    BeamSplitter { theta: f64, phi: f64, modes: (usize, usize) },
    PhaseShift { delta: f64, mode: usize },
}

impl Gate {
    fn is_null(&self) -> bool {
        match *self {
            Gate::BeamSplitter { theta, .. } => theta.abs() < NULL_GATE_TOL,
            Gate::PhaseShift { delta, .. } => delta.abs() < NULL_GATE_TOL,
        }
    }

    /// `u ← G·u`.
    pub fn apply_left(&self, u: &mut ComplexMatrix) {
        match *self {
            Gate::BeamSplitter { theta, phi, modes: (j, k) } => {
                let (s, c) = theta.sin_cos();
                let upper = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, phi);
                let lower = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -phi);
                for col in 0..u.ncols() {
                    let a = u[(j, col)];
                    let b = u[(k, col)];
                    u[(j, col)] = a * c + upper * b;
                    u[(k, col)] = lower * a + b * c;
                }
            }
            Gate::PhaseShift { delta, mode } => {
                let w = Complex64::from_polar(1.0, delta);
                for col in 0..u.ncols() {
                    u[(mode, col)] *= w;
                }
            }
        }
    }

    /// `u ← u·G`.
    fn apply_right(&self, u: &mut ComplexMatrix) {
        match *self {
            Gate::BeamSplitter { theta, phi, modes: (j, k) } => {
                let (s, c) = theta.sin_cos();
                let upper = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, phi);
                let lower = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -phi);
                for row in 0..u.nrows() {
                    let a = u[(row, j)];
                    let b = u[(row, k)];
                    u[(row, j)] = a * c + b * lower;
                    u[(row, k)] = a * upper + b * c;
                }
            }
            Gate::PhaseShift { delta, mode } => {
                let w = Complex64::from_polar(1.0, delta);
                for row in 0..u.nrows() {
                    u[(row, mode)] *= w;
                }
            }
        }
    }

    /// Full `modes × modes` embedding of this gate.
    pub fn embedding(&self, modes: usize) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(modes, modes);
        self.apply_left(&mut u);
        u
    }
}

/// Ordered gate list on `modes` modes with its cached realized unitary.
#[derive(Clone, Debug)]
pub struct PhotonicCircuit {
    modes: usize,
    gates: Vec<Gate>,
    realized: ComplexMatrix,
}

impl PhotonicCircuit {
    pub fn new(modes: usize, gates: Vec<Gate>) -> CircuitResult<Self> {
        for (index, gate) in gates.iter().enumerate() {
            match *gate {
                Gate::BeamSplitter { modes: (j, k), .. } => {
                    for mode in [j, k] {
                        if mode >= modes {
                            return Err(CircuitError::ModeOutOfRange { index, mode, modes });
                        }
                    }
                    if j == k {
                        return Err(CircuitError::RepeatedMode { index, mode: j });
                    }
                }
                Gate::PhaseShift { mode, .. } => {
                    if mode >= modes {
                        return Err(CircuitError::ModeOutOfRange { index, mode, modes });
                    }
                }
            }
        }
        let realized = multiply_gates(modes, &gates);
        Ok(Self {
            modes,
            gates,
            realized,
        })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            gates: Vec::new(),
            realized: ComplexMatrix::identity(modes, modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn realized_unitary(&self) -> &ComplexMatrix {
        &self.realized
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::BeamSplitter { .. }))
            .count()
    }

    pub fn phase_shift_count(&self) -> usize {
        self.gates.len() - self.beam_splitter_count()
    }

    /// Appends `later` so that it acts after `self`.
    pub fn then(mut self, later: &PhotonicCircuit) -> Self {
        assert_eq!(self.modes, later.modes, "mode count mismatch");
        self.gates.extend_from_slice(&later.gates);
        self.realized = &later.realized * &self.realized;
        self
    }

    /// Drops gates with `|θ|` or `|δ|` below [`NULL_GATE_TOL`].
    pub fn without_null_gates(&self) -> Self {
        let gates: Vec<Gate> = self.gates.iter().copied().filter(|g| !g.is_null()).collect();
        let realized = multiply_gates(self.modes, &gates);
        Self {
            modes: self.modes,
            gates,
            realized,
        }
    }

    pub fn to_document(&self) -> CircuitDocument {
        CircuitDocument {
            modes: self.modes,
            gates: self
                .gates
                .iter()
                .map(|g| match *g {
                    Gate::BeamSplitter { theta, phi, modes: (j, k) } => GateRecord {
                        kind: GateKind::BeamSplitter,
                        params: vec![theta, phi],
                        modes: vec![j, k],
                    },
                    Gate::PhaseShift { delta, mode } => GateRecord {
                        kind: GateKind::PhaseShift,
                        params: vec![delta],
                        modes: vec![mode],
                    },
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &CircuitDocument) -> CircuitResult<Self> {
        let mut gates = Vec::with_capacity(doc.gates.len());
        for (index, rec) in doc.gates.iter().enumerate() {
            let gate = match (rec.kind, rec.params.as_slice(), rec.modes.as_slice()) {
                (GateKind::BeamSplitter, &[theta, phi], &[j, k]) => Gate::BeamSplitter {
                    theta,
                    phi,
                    modes: (j, k),
                },
                (GateKind::PhaseShift, &[delta], &[mode]) => Gate::PhaseShift { delta, mode },
                _ => {
                    return Err(CircuitError::Json(format!(
                        "gate {index}: wrong parameter or mode count for {:?}",
                        rec.kind
                    )))
                }
            };
            gates.push(gate);
        }
        Self::new(doc.modes, gates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("circuit document serializes")
    }

    pub fn from_json(text: &str) -> CircuitResult<Self> {
        let doc: CircuitDocument = serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        Self::from_document(&doc)
    }
}

fn multiply_gates(modes: usize, gates: &[Gate]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(modes, modes);
    for g in gates {
        g.apply_left(&mut u);
    }
    u
}

/// Serialized circuit: `{"M": .., "gates": [{"kind", "params", "modes"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitDocument {
    #[serde(rename = "M")]
    pub modes: usize,
    pub gates: Vec<GateRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    BeamSplitter,
    PhaseShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: GateKind,
    /// `[θ, φ]` for beam splitters, `[δ]` for phase shifts.
    pub params: Vec<f64>,
    pub modes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    pub drop_null_gates: bool,
}

/// Lie-product compilation of `exp(−iHt/ħ)` into `steps` repetitions of one
/// beam splitter per coupling followed by one phase shift per site.
///
/// Angles: `θ = −J|A_jk|t/(lħ)`, `φ_jk = arg A_jk` (principal branch),
/// `δ_j = −t·h_j/(lħ)`.
pub fn trotter_compile(spec: &TightBindingSpec, t: f64, steps: usize) -> CircuitResult<PhotonicCircuit> {
    if spec.is_time_dependent() {
        return Err(CircuitError::TimeDependent);
    }
    trotter_compile_slice(spec, 0.0, t, steps, CompileOptions::default())
}

/// Trotter compilation of a duration `t` with the Hamiltonian frozen at
/// `evaluated_at`.
pub fn trotter_compile_slice(
    spec: &TightBindingSpec,
    evaluated_at: f64,
    t: f64,
    steps: usize,
    options: CompileOptions,
) -> CircuitResult<PhotonicCircuit> {
    spec.validate()?;
    if steps == 0 {
        return Err(CircuitError::ZeroSteps);
    }
    let l = steps as f64;
    let scale = t / (l * spec.hbar);
    let mut layer = Vec::with_capacity(spec.couplings.len() + spec.sites);
    for c in &spec.couplings {
        let magnitude = c.amplitude.norm();
        if magnitude == 0.0 {
            return Err(CircuitError::ZeroAmplitude { j: c.j, k: c.k });
        }
        layer.push(Gate::BeamSplitter {
            theta: -spec.hopping * magnitude * scale,
            phi: principal_phase(c.amplitude),
            modes: (c.j, c.k),
        });
    }
    for (mode, h) in spec.onsite_energies(evaluated_at).into_iter().enumerate() {
        layer.push(Gate::PhaseShift {
            delta: -scale * h,
            mode,
        });
    }
    let mut gates = Vec::with_capacity(layer.len() * steps);
    for _ in 0..steps {
        gates.extend_from_slice(&layer);
    }
    let circuit = PhotonicCircuit::new(spec.sites, gates)?;
    Ok(if options.drop_null_gates {
        circuit.without_null_gates()
    } else {
        circuit
    })
}

/// `−i·log(A)` restricted to its real part, in `(−π, π]`.
fn principal_phase(a: Complex64) -> f64 {
    let phi = a.arg();
    if phi == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        phi
    }
}

/// `1 − fidelity(exp(−iHt/ħ), trotter_compile(spec, t, steps))`.
pub fn trotter_error(spec: &TightBindingSpec, t: f64, steps: usize) -> CircuitResult<f64> {
    let circuit = trotter_compile(spec, t, steps)?;
    let h = lattice::hamiltonian_matrix(spec, 0.0)?;
    let exact = linalg::expm_unitary(&h, t / spec.hbar)?;
    let fidelity = linalg::gate_fidelity(&exact, circuit.realized_unitary())?;
    Ok((1.0 - fidelity).max(0.0))
}

/// Rectangular (Clements-style) mesh of `M(M−1)/2` nearest-neighbour beam
/// splitters followed by `M` output phase shifts.
pub fn rectangular_decompose(u: &ComplexMatrix) -> CircuitResult<PhotonicCircuit> {
    linalg::ensure_unitary(u)?;
    let n = u.nrows();
    let mut v = u.clone();
    // V·B⁻¹ nullings, in application order
    let mut right: Vec<Gate> = Vec::new();
    // B·V nullings, in application order
    let mut left: Vec<Gate> = Vec::new();

    for diag in 0..n.saturating_sub(1) {
        if diag % 2 == 0 {
            for j in 0..=diag {
                let p = diag - j;
                let row = n - 1 - j;
                let a = v[(row, p)];
                let b = v[(row, p + 1)];
                // zero the left entry of the pair: a·cosθ = i e^{−iφ}·sinθ·b
                let (theta, phi) = if a.norm() == 0.0 {
                    (0.0, 0.0)
                } else {
                    (a.norm().atan2(b.norm()), b.arg() - a.arg() - FRAC_PI_2)
                };
                let gate = Gate::BeamSplitter {
                    theta,
                    phi,
                    modes: (p, p + 1),
                };
                inverse(gate).apply_right(&mut v);
                v[(row, p)] = Complex64::new(0.0, 0.0);
                right.push(gate);
            }
        } else {
            for j in 1..=diag + 1 {
                let row = n + j - diag - 2;
                let col = j - 1;
                let p = row - 1;
                let a = v[(p, col)];
                let b = v[(row, col)];
                // zero the lower entry: i e^{−iφ}·sinθ·a = cosθ·b
                let (theta, phi) = if b.norm() == 0.0 {
                    (0.0, 0.0)
                } else {
                    (b.norm().atan2(a.norm()), a.arg() - b.arg() + FRAC_PI_2)
                };
                let gate = Gate::BeamSplitter {
                    theta,
                    phi,
                    modes: (p, p + 1),
                };
                gate.apply_left(&mut v);
                v[(row, col)] = Complex64::new(0.0, 0.0);
                left.push(gate);
            }
        }
    }

    // U = L₁⁻¹⋯L_m⁻¹ · D · R_n⋯R₁. Commute D to the far left:
    // B(θ,φ)·D = D·B(θ, φ − arg d_j + arg d_k).
    let phases: Vec<f64> = (0..n).map(|i| v[(i, i)].arg()).collect();
    let mut gates = right;
    for gate in left.iter().rev() {
        if let Gate::BeamSplitter { theta, phi, modes: (j, k) } = inverse(*gate) {
            gates.push(Gate::BeamSplitter {
                theta,
                phi: phi - phases[j] + phases[k],
                modes: (j, k),
            });
        }
    }
    gates.extend(
        phases
            .iter()
            .enumerate()
            .map(|(mode, &delta)| Gate::PhaseShift { delta, mode }),
    );
    PhotonicCircuit::new(n, gates)
}

fn inverse(gate: Gate) -> Gate {
    match gate {
        Gate::BeamSplitter { theta, phi, modes } => Gate::BeamSplitter {
            theta: -theta,
            phi,
            modes,
        },
        Gate::PhaseShift { delta, mode } => Gate::PhaseShift { delta: -delta, mode },
    }
}
