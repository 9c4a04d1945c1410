//! Per-timestep pipeline: propagator, circuit, Fock distribution, optional
//! shots, populations and observables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::config::{Backend, CompilePath, ConfigErrors, ExperimentConfig, ExperimentKind, ValidatedConfig};
use crate::circuit::{self, CircuitError, CompileOptions, PhotonicCircuit};
use crate::fock::{full_distribution, FockDistribution, FockError};
use crate::lattice::{propagator_sequence, LatticeError, TightBindingSpec, TimeGrid};
use crate::linalg::ComplexMatrix;
use crate::observables::{
    disorder_average, entropy_identity_residual, site_populations, ObservableError, ObservableSeries, SitePopulations,
    ENTROPY_IDENTITY_TOL, POPULATION_SUM_TOL,
};
use crate::sampler::{draw, empirical, sub_seed, SampleSet, SamplerError, SAMPLE_CSV_HEADER};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PHOTOLOC_OUT_DIR";

pub const POPULATIONS_CSV_HEADER: &str = "timestep,site,P";
pub const DELTA_CSV_HEADER: &str = "time,site,shots,delta";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },

    #[error("thread pool: {0}")]
    Threads(String),
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io { .. } | RunError::Threads(_) => 1,
        }
    }

    fn io(context: impl Into<String>, source: io::Error) -> Self {
        RunError::Io {
            context: context.into(),
            source,
        }
    }
}

macro_rules! numerical_from {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Numerical(e.to_string())
            }
        }
    )*};
}
numerical_from!(LatticeError, CircuitError, FockError, SamplerError, ObservableError);

pub type RunResult<T> = Result<T, RunError>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Takes precedence over the config's `output_dir`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; the global pool when `None`.
    pub threads: Option<usize>,
}

/// Output directory by precedence: explicit flag, environment, config.
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<&str>, config: &ExperimentConfig) -> PathBuf {
    match (flag, env) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(dir)) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.output_dir.clone(),
    }
}

/// Seed of the draw at (`realization`, `timestep`) under base `seed`.
pub fn timestep_seed(seed: u64, realization: usize, timestep: usize) -> u64 {
    sub_seed(sub_seed(seed, realization as u64), timestep as u64)
}

/// Seed of the draw at (`shots`, `repetition`, `timestep`) in a shots study.
pub fn study_seed(seed: u64, shots: u64, repetition: usize, timestep: usize) -> u64 {
    sub_seed(sub_seed(sub_seed(seed, shots), repetition as u64), timestep as u64)
}

/// Realized circuit unitaries for every grid point, each covering
/// `[t_start, t_k]`.
///
/// The Trotter path spends `steps` Lie-product steps per grid interval; a
/// driven chain is frozen at each interval's midpoint, the same time
/// ordering as [`propagator_sequence`].
pub fn circuit_unitaries(spec: &TightBindingSpec, grid: &TimeGrid, path: CompilePath) -> RunResult<Vec<ComplexMatrix>> {
    match path {
        CompilePath::Rectangular => {
            let props = propagator_sequence(spec, grid)?;
            props
                .par_iter()
                .map(|u| Ok(circuit::rectangular_decompose(u)?.realized_unitary().clone()))
                .collect()
        }
        CompilePath::Trotter { steps } if !spec.is_time_dependent() => (0..=grid.steps)
            .into_par_iter()
            .map(|k| Ok(trotter_circuit(spec, grid, k, steps)?.realized_unitary().clone()))
            .collect(),
        CompilePath::Trotter { steps } => {
            let mut out = Vec::with_capacity(grid.steps + 1);
            let mut current = PhotonicCircuit::identity(spec.sites);
            out.push(current.realized_unitary().clone());
            for k in 0..grid.steps {
                let mid = grid.time(k) + 0.5 * grid.dt();
                let slice = circuit::trotter_compile_slice(spec, mid, grid.dt(), steps, CompileOptions::default())?;
                current = current.then(&slice);
                out.push(current.realized_unitary().clone());
            }
            Ok(out)
        }
    }
}

/// Lie-product circuit for `[t_start, t_k]` with `steps` steps per grid
/// interval.
pub fn trotter_circuit(spec: &TightBindingSpec, grid: &TimeGrid, k: usize, steps: usize) -> RunResult<PhotonicCircuit> {
    if k == 0 {
        return Ok(PhotonicCircuit::identity(spec.sites));
    }
    if !spec.is_time_dependent() {
        let elapsed = grid.time(k) - grid.t_start;
        return Ok(circuit::trotter_compile_slice(
            spec,
            grid.t_start,
            elapsed,
            k * steps,
            CompileOptions::default(),
        )?);
    }
    let mut out = PhotonicCircuit::identity(spec.sites);
    for i in 0..k {
        let mid = grid.time(i) + 0.5 * grid.dt();
        out = out.then(&circuit::trotter_compile_slice(spec, mid, grid.dt(), steps, CompileOptions::default())?);
    }
    Ok(out)
}

/// Exact output distributions of one realization, one per grid point.
pub fn exact_distributions(config: &ExperimentConfig, realization: usize) -> RunResult<Vec<FockDistribution>> {
    let spec = config.model.spec(realization);
    let unitaries = circuit_unitaries(&spec, &config.grid, config.compile_path)?;
    unitaries
        .par_iter()
        .map(|u| Ok(full_distribution(&u.transpose(), &config.initial_state)?))
        .collect()
}

fn checked_populations(dist: &FockDistribution, realization: usize, timestep: usize) -> RunResult<SitePopulations> {
    let p = site_populations(dist);
    let total: f64 = p.values().iter().sum();
    if (total - 1.0).abs() > POPULATION_SUM_TOL {
        return Err(RunError::Numerical(format!(
            "populations of realization {realization} at timestep {timestep} sum to {total}"
        )));
    }
    let residual = entropy_identity_residual(&p);
    if !(residual <= ENTROPY_IDENTITY_TOL) {
        return Err(RunError::Numerical(format!(
            "S2 + log IPR = {residual:e} for realization {realization} at timestep {timestep}"
        )));
    }
    Ok(p)
}

/// In-memory result of [`simulate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub times: Vec<f64>,
    /// `[realization][timestep]`.
    pub populations: Vec<Vec<SitePopulations>>,
    /// `[realization][timestep]`, shots backend only.
    pub samples: Option<Vec<Vec<SampleSet>>>,
    /// Disorder-averaged series in the order of the config's observables.
    pub series: Vec<ObservableSeries>,
    pub max_identity_residual: f64,
}

impl Simulation {
    pub fn series(&self, label: &str) -> Option<&ObservableSeries> {
        self.series.iter().find(|s| s.label == label)
    }

    /// Populations averaged over realizations, per timestep.
    pub fn mean_populations(&self) -> Vec<SitePopulations> {
        let r = self.populations.len() as f64;
        (0..self.times.len())
            .map(|k| {
                let mut acc = vec![0.0; self.populations[0][k].sites()];
                for realization in &self.populations {
                    for (a, p) in acc.iter_mut().zip(realization[k].values()) {
                        *a += p;
                    }
                }
                SitePopulations(acc.into_iter().map(|a| a / r).collect())
            })
            .collect()
    }
}

/// Runs a bloch, dynloc or aah config without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> RunResult<Simulation> {
    if config.experiment == ExperimentKind::ShotsStudy {
        return Err(ConfigErrors::single("experiment", "shots_study configs run through shots_study()").into());
    }
    let times = config.grid.times();
    let realizations: Vec<(Vec<SitePopulations>, Option<Vec<SampleSet>>)> = (0..config.model.realizations())
        .into_par_iter()
        .map(|r| {
            let dists = exact_distributions(config, r)?;
            let per_step: Vec<(SitePopulations, Option<SampleSet>)> = dists
                .par_iter()
                .enumerate()
                .map(|(k, dist)| match config.backend {
                    Backend::ExactProbs => Ok((checked_populations(dist, r, k)?, None)),
                    Backend::Shots { shots, seed } => {
                        let samples = draw(dist, shots, timestep_seed(seed, r, k))?;
                        Ok((checked_populations(&empirical(&samples), r, k)?, Some(samples)))
                    }
                })
                .collect::<RunResult<_>>()?;
            let (pops, samples): (Vec<_>, Vec<_>) = per_step.into_iter().unzip();
            let samples = samples.into_iter().collect::<Option<Vec<_>>>();
            Ok((pops, samples))
        })
        .collect::<RunResult<_>>()?;

    let photons = config.initial_state.photons();
    let max_identity_residual = realizations
        .iter()
        .flat_map(|(pops, _)| pops.iter().map(entropy_identity_residual))
        .fold(0.0, f64::max);
    let mut series = Vec::with_capacity(config.observables.len());
    for kind in &config.observables {
        let per_realization = realizations
            .iter()
            .map(|(pops, _)| {
                let values = pops.iter().map(|p| kind.evaluate(p, photons)).collect();
                ObservableSeries::new(kind.name(), times.clone(), values)
            })
            .collect::<Result<Vec<_>, _>>()?;
        series.push(disorder_average(&per_realization)?);
    }
    let (populations, samples): (Vec<_>, Vec<_>) = realizations.into_iter().unzip();
    let samples = match config.backend {
        Backend::Shots { .. } => Some(samples.into_iter().map(|s| s.expect("shots backend")).collect()),
        Backend::ExactProbs => None,
    };
    Ok(Simulation {
        times,
        populations,
        samples,
        series,
        max_identity_residual,
    })
}

/// Error of one shot count in a shots study.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotCountOutcome {
    pub shots: u64,
    /// Populations of repetition 0.
    pub populations: Vec<SitePopulations>,
    /// `[timestep][site]` mean of `|P_exact − P_shots|` over repetitions.
    pub delta: Vec<Vec<f64>>,
    /// `delta` averaged over timesteps and sites.
    pub mean_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotsStudyOutcome {
    pub times: Vec<f64>,
    pub exact: Vec<SitePopulations>,
    pub by_shots: Vec<ShotCountOutcome>,
}

/// Runs a shots_study config without touching the filesystem.
pub fn simulate_shots_study(config: &ExperimentConfig) -> RunResult<ShotsStudyOutcome> {
    let study = config
        .shots_study
        .as_ref()
        .ok_or_else(|| ConfigErrors::single("experiment", "shots study requires experiment = shots_study"))?;
    let dists = exact_distributions(config, 0)?;
    let exact = dists
        .iter()
        .enumerate()
        .map(|(k, d)| checked_populations(d, 0, k))
        .collect::<RunResult<Vec<_>>>()?;
    let sites = config.model.sites;

    let by_shots = study
        .shot_counts
        .iter()
        .map(|&shots| {
            let reps: Vec<Vec<SitePopulations>> = (0..study.repetitions)
                .into_par_iter()
                .map(|rep| {
                    dists
                        .par_iter()
                        .enumerate()
                        .map(|(k, d)| {
                            let samples = draw(d, shots, study_seed(study.seed, shots, rep, k))?;
                            checked_populations(&empirical(&samples), rep, k)
                        })
                        .collect::<RunResult<Vec<_>>>()
                })
                .collect::<RunResult<_>>()?;
            let n = study.repetitions as f64;
            let delta: Vec<Vec<f64>> = (0..dists.len())
                .map(|k| {
                    (0..sites)
                        .map(|i| reps.iter().map(|pops| (exact[k].0[i] - pops[k].0[i]).abs()).sum::<f64>() / n)
                        .collect()
                })
                .collect();
            let mean_delta = delta.iter().flatten().sum::<f64>() / (delta.len() * sites) as f64;
            Ok(ShotCountOutcome {
                shots,
                populations: reps.into_iter().next().unwrap_or_default(),
                delta,
                mean_delta,
            })
        })
        .collect::<RunResult<Vec<_>>>()?;

    Ok(ShotsStudyOutcome {
        times: config.grid.times(),
        exact,
        by_shots,
    })
}

/// One emitted artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// File name relative to the manifest.
    pub path: String,
    /// `populations`, `series`, `delta` or `samples`.
    pub kind: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// Fully defaulted config; re-running it reproduces every CSV.
    pub config: Value,
    pub code_version: String,
    pub seeds: BTreeMap<String, u64>,
    pub seed_derivation: String,
    pub started_at_unix: u64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub warnings: Vec<String>,
    pub files: Vec<ManifestFile>,
}

impl RunManifest {
    pub fn read(path: &Path) -> RunResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text)
            .map_err(|e| RunError::io(format!("parsing {}", path.display()), io::Error::other(e)))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialized writer: every artifact passes through here in a fixed order.
struct Emitter {
    dir: PathBuf,
    files: Vec<ManifestFile>,
}

impl Emitter {
    fn new(dir: PathBuf) -> RunResult<Self> {
        fs::create_dir_all(&dir)
            .map_err(|e| RunError::from(ConfigErrors::single("output_dir", format!("{}: {e}", dir.display()))))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn emit(&mut self, name: &str, kind: &str, bytes: &[u8]) -> RunResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::io(format!("writing {}", path.display()), e))?;
        self.files.push(ManifestFile {
            path: name.to_string(),
            kind: kind.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

fn populations_csv(pops: &[SitePopulations]) -> String {
    let mut out = String::new();
    writeln!(out, "{POPULATIONS_CSV_HEADER}").unwrap();
    for (k, p) in pops.iter().enumerate() {
        for (site, v) in p.values().iter().enumerate() {
            writeln!(out, "{k},{site},{v}").unwrap();
        }
    }
    out
}

fn samples_csv(sets: &[SampleSet]) -> Vec<u8> {
    let mut out = Vec::new();
    io::Write::write_all(&mut out, format!("{SAMPLE_CSV_HEADER}\n").as_bytes()).unwrap();
    for (k, s) in sets.iter().enumerate() {
        s.write_csv_rows(&mut out, k).unwrap();
    }
    out
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> RunResult<T> + Send) -> RunResult<(T, usize)> {
    match threads {
        None => Ok((f()?, rayon::current_num_threads())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Threads(e.to_string()))?;
            let used = pool.current_num_threads();
            Ok((pool.install(f)?, used))
        }
    }
}

/// Runs any experiment, writes its artifacts and returns the manifest.
pub fn run(validated: &ValidatedConfig, options: &RunOptions) -> RunResult<RunManifest> {
    let config = &validated.config;
    let started = Instant::now();
    let started_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let dir = options.out_dir.clone().unwrap_or_else(|| config.output_dir.clone());
    for w in &validated.warnings {
        log::warn!("{w}");
    }
    log::info!("running {} into {}", config.experiment.name(), dir.display());

    let mut emitter = Emitter::new(dir.clone())?;
    let (seed_derivation, threads) = if config.experiment == ExperimentKind::ShotsStudy {
        let (outcome, threads) = with_pool(options.threads, || simulate_shots_study(config))?;
        emit_shots_study(&mut emitter, &outcome)?;
        ("sub_seed(sub_seed(sub_seed(seed, shots), repetition), timestep)", threads)
    } else {
        let (sim, threads) = with_pool(options.threads, || simulate(config))?;
        emit_simulation(&mut emitter, &sim)?;
        ("sub_seed(sub_seed(seed, realization), timestep)", threads)
    };

    let mut echoed = config.to_json();
    echoed["output_dir"] = Value::String(dir.to_string_lossy().into_owned());
    let manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        config: echoed,
        code_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        seeds: config.seeds().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        seed_derivation: seed_derivation.to_string(),
        started_at_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        threads,
        warnings: validated.warnings.clone(),
        files: emitter.files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text + "\n").map_err(|e| RunError::io(format!("writing {}", path.display()), e))?;
    log::info!("wrote {} files in {:.2}s", manifest.files.len(), manifest.wall_clock_seconds);
    Ok(manifest)
}

fn emit_simulation(emitter: &mut Emitter, sim: &Simulation) -> RunResult<()> {
    emitter.emit("populations.csv", "populations", populations_csv(&sim.mean_populations()).as_bytes())?;
    for series in &sim.series {
        let mut buf = Vec::new();
        series.write_csv(&mut buf).expect("in-memory write");
        emitter.emit(&format!("observables_{}.csv", series.label), "series", &buf)?;
    }
    if let Some(samples) = &sim.samples {
        if samples.len() == 1 {
            emitter.emit("samples.csv", "samples", &samples_csv(&samples[0]))?;
        } else {
            for (r, sets) in samples.iter().enumerate() {
                emitter.emit(&format!("samples_r{r:02}.csv"), "samples", &samples_csv(sets))?;
            }
        }
    }
    Ok(())
}

fn emit_shots_study(emitter: &mut Emitter, outcome: &ShotsStudyOutcome) -> RunResult<()> {
    for run in &outcome.by_shots {
        emitter.emit(
            &format!("populations_shots_{}.csv", run.shots),
            "populations",
            populations_csv(&run.populations).as_bytes(),
        )?;
    }
    emitter.emit("populations.csv", "populations", populations_csv(&outcome.exact).as_bytes())?;
    let mut delta = String::new();
    writeln!(delta, "{DELTA_CSV_HEADER}").unwrap();
    for run in &outcome.by_shots {
        for (t, row) in outcome.times.iter().zip(&run.delta) {
            for (site, d) in row.iter().enumerate() {
                writeln!(delta, "{t},{site},{},{d}", run.shots).unwrap();
            }
        }
    }
    emitter.emit("delta.csv", "delta", delta.as_bytes())
}
