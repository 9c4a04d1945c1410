//! Linear-optical simulation of single-particle transport and localization
//! in one-dimensional tight-binding chains.
//!
//! A chain Hamiltonian is turned into a propagator, compiled into a
//! beam-splitter/phase-shifter circuit, and a Fock state is pushed through
//! the circuit exactly (permanents) or by sampling shots. Site populations
//! then feed the localization diagnostics: mean squared displacement,
//! participation entropy and inverse participation ratio.

pub mod circuit;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod runner;
pub mod sampler;

pub use circuit::{rectangular_decompose, trotter_compile, trotter_error, Gate, PhotonicCircuit};
pub use fock::{full_distribution, outcome_probability, permanent, FockDistribution, FockState};
pub use lattice::{hamiltonian_matrix, propagator_sequence, Onsite, TightBindingSpec, TimeGrid};
pub use linalg::{expm_unitary, gate_fidelity, hermitian_eig, ComplexMatrix};
pub use observables::{ObservableKind, ObservableSeries, SitePopulations};
pub use runner::{run, simulate, validate_config, ExperimentConfig, RunManifest};
pub use sampler::{draw, empirical, SampleSet};
