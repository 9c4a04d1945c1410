//! `photoloc`: run experiments, inspect presets and export circuits.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::Value;

use photoloc_core::circuit::rectangular_decompose;
use photoloc_core::lattice::propagator_sequence;
use photoloc_core::runner::run::{resolve_output_dir, trotter_circuit, RunError, OUTPUT_DIR_ENV};
use photoloc_core::runner::{
    find_preset, merge_json, presets, run, validate_value, CompilePath, ConfigErrors, ExperimentConfig, RunOptions,
    ValidatedConfig,
};

#[derive(Parser)]
#[command(name = "photoloc", version, about = "Linear-optical simulation of localization in tight-binding chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV artifacts and manifest.
    Run {
        /// Config JSON; merged over --preset when both are given.
        config: Option<PathBuf>,
        /// Output directory (overrides the environment and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces every base seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        preset: Option<String>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config and print it with all defaults filled in.
    Validate {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// List the shipped presets.
    Presets,
    /// Print the config JSON of one preset.
    Preset { name: String },
    /// Export the circuit of one timestep as JSON.
    Compile {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Grid index of the circuit.
        #[arg(long, default_value_t = 1)]
        timestep: usize,
        /// Disorder realization (phase index).
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying its process exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            error: e.into(),
        }
    }
}

impl From<ConfigErrors> for Failure {
    fn from(e: ConfigErrors) -> Self {
        RunError::from(e).into()
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn load(config: Option<&Path>, preset: Option<&str>) -> Result<ValidatedConfig, Failure> {
    let mut doc = match preset {
        Some(name) => find_preset(name)
            .ok_or_else(|| {
                let names: Vec<String> = presets().into_iter().map(|p| p.name).collect();
                ConfigErrors::single("preset", format!("unknown preset {name:?}; available: {}", names.join(", ")))
            })?
            .config,
        None => Value::Object(Default::default()),
    };
    match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigErrors::single("", format!("cannot read {}: {e}", path.display())))?;
            let overlay: Value = serde_json::from_str(&text)
                .map_err(|e| ConfigErrors::single("", format!("{} is not valid JSON: {e}", path.display())))?;
            merge_json(&mut doc, &overlay);
        }
        None if preset.is_none() => {
            return Err(ConfigErrors::single("", "give a config file, --preset NAME, or both").into());
        }
        None => {}
    }
    Ok(validate_value(&doc)?)
}

fn compile_circuit(config: &ExperimentConfig, timestep: usize, realization: usize) -> Result<String, Failure> {
    if timestep > config.grid.steps {
        return Err(ConfigErrors::single("timestep", format!("grid has {} steps", config.grid.steps)).into());
    }
    if realization >= config.model.realizations() {
        return Err(ConfigErrors::single(
            "realization",
            format!("model has {} realizations", config.model.realizations()),
        )
        .into());
    }
    let spec = config.model.spec(realization);
    let circuit = match config.compile_path {
        CompilePath::Rectangular => {
            let props = propagator_sequence(&spec, &config.grid).map_err(|e| RunError::Numerical(e.to_string()))?;
            rectangular_decompose(&props[timestep]).map_err(|e| RunError::Numerical(e.to_string()))?
        }
        CompilePath::Trotter { steps } => trotter_circuit(&spec, &config.grid, timestep, steps)?,
    };
    Ok(circuit.to_json())
}

fn execute(cli: Cli) -> Result<String, Failure> {
    let mut stdout = String::new();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            preset,
            threads,
        } => {
            let mut validated = load(config.as_deref(), preset.as_deref())?;
            if let Some(seed) = seed {
                validated.config = validated.config.with_seed(seed);
            }
            for w in &validated.warnings {
                eprintln!("warning: {w}");
            }
            let env = std::env::var(OUTPUT_DIR_ENV).ok();
            let dir = resolve_output_dir(out.as_deref(), env.as_deref(), &validated.config);
            let manifest = run(
                &validated,
                &RunOptions {
                    out_dir: Some(dir.clone()),
                    threads,
                },
            )?;
            for f in &manifest.files {
                writeln!(stdout, "{}", dir.join(&f.path).display()).unwrap();
            }
            writeln!(stdout, "{}", dir.join("manifest.json").display()).unwrap();
        }
        Command::Validate { config, preset } => {
            let validated = load(config.as_deref(), preset.as_deref())?;
            for w in &validated.warnings {
                eprintln!("warning: {w}");
            }
            let text = serde_json::to_string_pretty(&validated.config.to_json()).context("serializing config")?;
            writeln!(stdout, "{text}").unwrap();
        }
        Command::Presets => {
            for p in presets() {
                writeln!(stdout, "{:<24} {}", p.name, p.description).unwrap();
            }
        }
        Command::Preset { name } => {
            let p = find_preset(&name)
                .ok_or_else(|| ConfigErrors::single("preset", format!("unknown preset {name:?}")))?;
            let text = serde_json::to_string_pretty(&p.config).context("serializing preset")?;
            writeln!(stdout, "{text}").unwrap();
        }
        Command::Compile {
            config,
            preset,
            timestep,
            realization,
            out,
        } => {
            let validated = load(config.as_deref(), preset.as_deref())?;
            let json = compile_circuit(&validated.config, timestep, realization)?;
            match out {
                Some(path) => fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => writeln!(stdout, "{json}").unwrap(),
            }
        }
    }
    Ok(stdout)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(text) => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
            _ => ExitCode::SUCCESS,
        },
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
