//! Localization diagnostics computed from per-timestep site populations.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{configuration_count, FockDistribution};

/// Tolerance on `Σ P_i = 1`.
pub const POPULATION_SUM_TOL: f64 = 1e-9;
/// Tolerance on `exp(−S₂) = IPR`, checked as `|S₂ + log IPR|`.
pub const ENTROPY_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("Rényi order must be positive and different from 1, got {0}")]
    InvalidOrder(f64),

    #[error("series {index} differs from the first in its time grid")]
    GridMismatch { index: usize },

    #[error("no series to average")]
    Empty,

    #[error("populations sum to {0}, not 1")]
    Unnormalized(f64),

    #[error("series has {times} times but {values} values")]
    LengthMismatch { times: usize, values: usize },
}

pub type ObservableResult<T> = Result<T, ObservableError>;

/// Per-site occupation probabilities at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SitePopulations(pub Vec<f64>);

impl SitePopulations {
    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn check_normalized(&self) -> ObservableResult<()> {
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > POPULATION_SUM_TOL {
            return Err(ObservableError::Unnormalized(total));
        }
        Ok(())
    }

    /// Populations of the mirrored chain `i → M−1−i`.
    pub fn reflected(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

/// `P_i = Σ_F P_F · n_i^{(F)} / N`; equals `|ψ_i|²` for one photon.
pub fn site_populations(dist: &FockDistribution) -> SitePopulations {
    let mut p = vec![0.0; dist.modes()];
    let n = dist.photons().max(1) as f64;
    for (state, prob) in dist.entries() {
        for (site, &occ) in state.occupations().iter().enumerate() {
            if occ > 0 {
                p[site] += prob * occ as f64 / n;
            }
        }
    }
    SitePopulations(p)
}

/// Mean squared displacement `Σ i² P_i − (Σ i P_i)²`, sites indexed from 0.
pub fn msd(p: &SitePopulations) -> f64 {
    let (mut first, mut second) = (0.0, 0.0);
    for (i, &pi) in p.0.iter().enumerate() {
        let x = i as f64;
        first += x * pi;
        second += x * x * pi;
    }
    (second - first * first).max(0.0)
}

/// `√msd / M`.
pub fn rmsd_normalized(p: &SitePopulations, sites: usize) -> f64 {
    msd(p).sqrt() / sites as f64
}

/// Participation (Rényi) entropy `log(Σ P_i^q) / (1 − q)`.
pub fn renyi_entropy(p: &SitePopulations, q: f64) -> ObservableResult<f64> {
    if !(q > 0.0) || q == 1.0 || !q.is_finite() {
        return Err(ObservableError::InvalidOrder(q));
    }
    let sum: f64 = if q == 2.0 {
        p.0.iter().map(|x| x * x).sum()
    } else {
        p.0.iter().map(|x| x.max(0.0).powf(q)).sum()
    };
    Ok(sum.ln() / (1.0 - q))
}

/// Second-order participation entropy `−log Σ P_i²`.
pub fn participation_entropy(p: &SitePopulations) -> f64 {
    renyi_entropy(p, 2.0).expect("order 2 is valid")
}

/// Inverse participation ratio `Σ P_i²`.
pub fn ipr(p: &SitePopulations) -> f64 {
    p.0.iter().map(|x| x * x).sum()
}

/// `log 𝒩` with `𝒩 = C(M+N−1, N)`; `log M` for one photon.
pub fn log_configuration_space(modes: usize, photons: usize) -> f64 {
    (configuration_count(modes, photons) as f64).ln()
}

/// Named observables the runner can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Msd,
    /// `√msd / M`.
    Rmsd,
    /// `S₂`.
    S2,
    /// `S₂ / log 𝒩`.
    S2Norm,
    Ipr,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 5] = [
        ObservableKind::Msd,
        ObservableKind::Rmsd,
        ObservableKind::S2,
        ObservableKind::S2Norm,
        ObservableKind::Ipr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Msd => "msd",
            ObservableKind::Rmsd => "rmsd",
            ObservableKind::S2 => "s2",
            ObservableKind::S2Norm => "s2_norm",
            ObservableKind::Ipr => "ipr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn evaluate(&self, p: &SitePopulations, photons: usize) -> f64 {
        match self {
            ObservableKind::Msd => msd(p),
            ObservableKind::Rmsd => rmsd_normalized(p, p.sites()),
            ObservableKind::S2 => participation_entropy(p),
            ObservableKind::S2Norm => participation_entropy(p) / log_configuration_space(p.sites(), photons),
            ObservableKind::Ipr => ipr(p),
        }
    }
}

/// `|S₂ + log IPR|` for one population vector.
pub fn entropy_identity_residual(p: &SitePopulations) -> f64 {
    (participation_entropy(p) + ipr(p).ln()).abs()
}

/// Time-indexed observable values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard error of the disorder mean, when more than one realization.
    pub stderr: Option<Vec<f64>>,
    pub realizations: usize,
    pub normalization: Option<String>,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> ObservableResult<Self> {
        if times.len() != values.len() {
            return Err(ObservableError::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        Ok(Self {
            label: label.into(),
            times,
            values,
            stderr: None,
            realizations: 1,
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean of the values whose time falls in `[from, to]`.
    pub fn window_mean(&self, from: f64, to: f64) -> Option<f64> {
        let picked: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| (from..=to).contains(*t))
            .map(|(_, v)| *v)
            .collect();
        if picked.is_empty() {
            None
        } else {
            Some(picked.iter().sum::<f64>() / picked.len() as f64)
        }
    }

    /// CSV `time,value,stderr` with an empty stderr column when absent.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{SERIES_CSV_HEADER}")?;
        for (i, (t, v)) in self.times.iter().zip(&self.values).enumerate() {
            match &self.stderr {
                Some(se) => writeln!(out, "{t},{v},{}", se[i])?,
                None => writeln!(out, "{t},{v},")?,
            }
        }
        Ok(())
    }
}

pub const SERIES_CSV_HEADER: &str = "time,value,stderr";

/// Pointwise mean over disorder realizations sharing one time grid.
pub fn disorder_average(series: &[ObservableSeries]) -> ObservableResult<ObservableSeries> {
    let first = series.first().ok_or(ObservableError::Empty)?;
    for (index, s) in series.iter().enumerate().skip(1) {
        if s.times != first.times {
            return Err(ObservableError::GridMismatch { index });
        }
    }
    let r = series.len() as f64;
    let len = first.len();
    let mut mean = vec![0.0; len];
    for s in series {
        for (m, v) in mean.iter_mut().zip(&s.values) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= r);
    let stderr = (series.len() > 1).then(|| {
        (0..len)
            .map(|i| {
                let var = series.iter().map(|s| (s.values[i] - mean[i]).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            })
            .collect()
    });
    Ok(ObservableSeries {
        label: first.label.clone(),
        times: first.times.clone(),
        values: mean,
        stderr,
        realizations: series.iter().map(|s| s.realizations).sum(),
        normalization: first.normalization.clone(),
    })
}
