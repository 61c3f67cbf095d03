//! Experiment configuration: a single JSON document per run.

use std::collections::BTreeSet;
use std::path::{Component, Path};

use arcflow::{FlowConfig, FlowMode, InitialSpec, ProbeSpec, RunOptions, SupportSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// File names of the artifacts, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub diagnostics: String,
    pub trajectory: String,
    pub admissibility: String,
    pub summary: String,
    pub frames: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            diagnostics: "diagnostics.csv".into(),
            trajectory: "trajectory.jsonl".into(),
            admissibility: "admissibility.json".into(),
            summary: "summary.json".into(),
            frames: "frames".into(),
        }
    }
}

impl OutputPaths {
    fn entries(&self) -> [(&'static str, &str); 5] {
        [
            ("outputs.diagnostics", &self.diagnostics),
            ("outputs.trajectory", &self.trajectory),
            ("outputs.admissibility", &self.admissibility),
            ("outputs.summary", &self.summary),
            ("outputs.frames", &self.frames),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub precision: Precision,
    pub support: SupportSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub mode: FlowMode,
    /// Recording cadence, snapshot cadence and density probes.
    #[serde(default)]
    pub run: RunOptions,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    /// Seed of the initial datum; zero for deterministic data.
    pub fn seed(&self) -> u64 {
        match self.initial {
            InitialSpec::PerturbedArc { seed, .. } => seed,
            _ => 0,
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("configuration serializes");
        let digest = Sha256::digest(&canonical);
        format!("{digest:x}")[..16].to_string()
    }

    pub fn validate(&self) -> Result<()> {
        self.flow
            .validate()
            .map_err(|e| CliError::Invalid(format!("flow: {e}")))?;
        if !(self.run.sample_interval >= 0.0 && self.run.snapshot_interval >= 0.0) {
            return Err(CliError::Invalid(
                "run: sample_interval and snapshot_interval must be non-negative".into(),
            ));
        }
        if !(self.run.blowup_factor > 1.0 && self.run.snapshot_growth > 1.0) {
            return Err(CliError::Invalid(
                "run: blowup_factor and snapshot_growth must exceed 1".into(),
            ));
        }
        for (i, p) in self.run.probes.iter().enumerate() {
            if !(p.t_probe > 0.0 && p.x0_param.is_finite()) {
                return Err(CliError::Invalid(format!(
                    "run.probes[{i}]: T_probe must be positive and x0_param_on_sigma finite"
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for (field, path) in self.outputs.entries() {
            let p = Path::new(path);
            let escapes = p
                .components()
                .any(|c| !matches!(c, Component::Normal(_) | Component::CurDir));
            if path.is_empty() || escapes {
                return Err(CliError::Invalid(format!(
                    "{field}: `{path}` must be a relative path inside the output directory"
                )));
            }
            if !seen.insert(path) {
                return Err(CliError::Invalid(format!(
                    "{field}: `{path}` is used twice"
                )));
            }
        }
        Ok(())
    }
}

/// Parses and validates a configuration; `origin` names the source in
/// error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            origin: origin.to_string(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Same as [`parse_config`] for an already parsed JSON value.
pub fn config_from_value(value: serde_json::Value, origin: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        CliError::Config {
            origin: origin.to_string(),
            line: 0,
            column: 0,
            field,
            message: e.into_inner().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub const PRESETS: [&str; 2] = ["stationary", "main-theorem"];

/// Built-in configurations.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        // orthogonal arc of radius 1 on the unit circle: a fixed point
        "stationary" => Some(ExperimentConfig {
            name: name.into(),
            precision: Precision::F64,
            support: SupportSpec::circle(1.0),
            initial: InitialSpec::OrthogonalArc {
                rho: 1.0,
                center_angle: 0.0,
            },
            flow: FlowConfig {
                n_nodes: 200,
                t_end: 1e3,
                stop_tolerance: 1e-300,
                max_steps: Some(10_000),
                ..FlowConfig::default()
            },
            mode: FlowMode::AreaPreserving,
            run: RunOptions {
                sample_interval: 1e-2,
                snapshot_interval: 0.1,
                ..RunOptions::default()
            },
            outputs: OutputPaths::default(),
        }),
        "main-theorem" => {
            let rho: f64 = 0.03;
            // the contact points of the unperturbed arc, as probe centers
            let half_span = rho.atan();
            let probe = |x0_param| ProbeSpec {
                x0_param,
                t_probe: 4e-3,
            };
            Some(ExperimentConfig {
                name: name.into(),
                precision: Precision::F64,
                support: SupportSpec::circle(1.0),
                initial: InitialSpec::PerturbedArc {
                    rho,
                    center_angle: 0.0,
                    amplitude: 0.05,
                    frequency: 3,
                    seed: 7,
                    skew: 0.2,
                },
                flow: FlowConfig {
                    n_nodes: 200,
                    stop_tolerance: 1e-8,
                    ..FlowConfig::default()
                },
                mode: FlowMode::AreaPreserving,
                run: RunOptions {
                    sample_interval: 1e-5,
                    snapshot_interval: 1e-4,
                    probes: vec![probe(-half_span), probe(half_span)],
                    ..RunOptions::default()
                },
                outputs: OutputPaths::default(),
            })
        }
        _ => None,
    }
}
