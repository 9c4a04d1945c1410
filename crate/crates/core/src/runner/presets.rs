//! Named parameter sets for the standard runs.

use std::f64::consts::PI;

use serde_json::{json, Value};

use super::config::{validate_value, ConfigErrors, ValidatedConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub config: Value,
}

fn preset(name: &str, description: String, mut config: Value) -> Preset {
    config["output_dir"] = json!(format!("out/{name}"));
    Preset {
        name: name.to_string(),
        description,
        config,
    }
}

fn center(sites: usize) -> Vec<usize> {
    let mut v = vec![0; sites];
    v[sites / 2] = 1;
    v
}

fn bloch(field: f64) -> Value {
    json!({
        "experiment": "bloch",
        "model": {"sites": 7, "hopping": 1.0, "field": field},
        "grid": {"t_start": 0.0, "t_end": 3.0 * 2.0 * PI / field, "steps": 300},
        "initial_state": center(7),
        "observables": ["msd"],
    })
}

fn dynloc(amplitude: f64, initial: Vec<usize>) -> Value {
    json!({
        "experiment": "dynloc",
        "model": {"sites": 7, "hopping": 0.5, "amplitude": amplitude, "omega": 1.0},
        "grid": {"t_start": 0.0, "t_end": 50.0, "steps": 2000},
        "initial_state": initial,
        "observables": ["msd"],
    })
}

fn aah(lambda: f64, sites: usize, t_end: f64, steps: usize, observables: &[&str]) -> Value {
    json!({
        "experiment": "aah",
        "model": {"sites": sites, "hopping": 1.0, "lambda": lambda, "phases": {"count": 50}},
        "grid": {"t_start": 0.0, "t_end": t_end, "steps": steps},
        "initial_state": center(sites),
        "observables": observables,
    })
}

fn shots_study() -> Value {
    json!({
        "experiment": "shots_study",
        "model": {"sites": 7, "hopping": 1.0, "lambda": 2.0, "phases": [0.0]},
        "grid": {"t_start": 0.0, "t_end": 25.0, "steps": 100},
        "initial_state": center(7),
        "shots_study": {"shot_counts": [10, 100, 1000, 5000], "repetitions": 1, "seed": 2024},
    })
}

/// Every shipped preset, numbered sets first, then the per-experiment
/// aliases.
pub fn presets() -> Vec<Preset> {
    let mut out = Vec::new();
    for (fig, what) in [("fig3", "population heatmap"), ("fig4", "MSD")] {
        for field in [1.0, 2.0] {
            out.push(preset(
                &format!("{fig}_f{field}"),
                format!("static field F={field}, {what} over 3 Bloch periods"),
                bloch(field),
            ));
        }
    }
    out.push(preset(
        "fig5a_a3",
        "driven chain A/ω=3 from the edge site, delocalized".into(),
        dynloc(3.0, vec![1, 0, 0, 0, 0, 0, 0]),
    ));
    out.push(preset(
        "fig5a_a2.405",
        "driven chain at the first Bessel zero A/ω=2.405".into(),
        dynloc(2.405, center(7)),
    ));
    out.push(preset(
        "fig5b_a5.52",
        "driven chain at the second Bessel zero A/ω=5.52".into(),
        dynloc(5.52, center(7)),
    ));
    for lambda in [0.5, 2.0, 5.0] {
        out.push(preset(
            &format!("fig6_lambda{lambda}"),
            format!("AAH λ={lambda}: S2/log M and IPR to t=40, 50 phases"),
            aah(lambda, 7, 40.0, 100, &["s2_norm", "ipr"]),
        ));
    }
    for (tag, t_end, steps) in [("t10", 10.0, 100), ("t2", 2.0, 30)] {
        for lambda in [0.5, 1.0, 2.0, 5.0] {
            out.push(preset(
                &format!("fig7a_lambda{lambda}_{tag}"),
                format!("AAH λ={lambda}: RMSD/M to t={t_end}"),
                aah(lambda, 7, t_end, steps, &["rmsd"]),
            ));
        }
        for sites in [5, 7, 9, 11] {
            out.push(preset(
                &format!("fig7b_m{sites}_{tag}"),
                format!("AAH λ=2, M={sites}: RMSD/M to t={t_end}"),
                aah(2.0, sites, t_end, steps, &["rmsd"]),
            ));
        }
    }
    for lambda in [0.5, 2.0, 5.0] {
        out.push(preset(
            &format!("fig8_lambda{lambda}"),
            format!("AAH λ={lambda}: population heatmap to t=75, 50 phases"),
            aah(lambda, 7, 75.0, 100, &["s2_norm", "ipr", "rmsd"]),
        ));
    }
    for fig in ["fig9", "fig10"] {
        out.push(preset(
            fig,
            "shots study: AAH λ=2, δ=0 at 10, 100, 1000, 5000 shots and exact".into(),
            shots_study(),
        ));
    }
    for (alias, target) in [
        ("bloch", "fig4_f2"),
        ("dynloc", "fig5a_a2.405"),
        ("aah", "fig8_lambda2"),
        ("shots_study", "fig9"),
    ] {
        let base = out.iter().find(|p| p.name == target).expect("alias target").clone();
        out.push(preset(alias, format!("alias of {target}: {}", base.description), base.config));
    }
    out
}

pub fn preset_names() -> Vec<String> {
    presets().into_iter().map(|p| p.name).collect()
}

pub fn find_preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Validated config of a preset.
pub fn load_preset(name: &str) -> Result<ValidatedConfig, ConfigErrors> {
    let preset = find_preset(name).ok_or_else(|| {
        ConfigErrors::single("preset", format!("unknown preset {name:?}; available: {}", preset_names().join(", ")))
    })?;
    validate_value(&preset.config)
}
