//! Config-driven orchestration of the four experiments and their CSV and
//! manifest artifacts.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{
    merge_json, phase_grid, validate_config, validate_value, Backend, CompilePath, ConfigErrors, ConfigIssue,
    ExperimentConfig, ExperimentKind, ModelConfig, ModelKind, ShotsStudyConfig, ValidatedConfig,
};
pub use presets::{find_preset, load_preset, preset_names, presets, Preset};
pub use run::{
    resolve_output_dir, run, simulate, simulate_shots_study, RunError, RunManifest, RunOptions, ShotsStudyOutcome,
    Simulation,
};
