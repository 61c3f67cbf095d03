//! Single runs: simulate, summarize, persist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use arcflow::{
    check_admissibility, classify_singularity, fit_circular_arc, run, AdmissibilityReport,
    CircleFit, Classification, FlowState, Scalar, SupportCurve, Termination, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Precision};
use crate::error::{CliError, Result};
use crate::output::{self, Stamp, TrajectoryHeader, TRAJECTORY_FORMAT};

pub struct Outcome<T> {
    pub sigma: SupportCurve<T>,
    pub admissibility: Option<AdmissibilityReport>,
    pub trajectory: Trajectory<T>,
}

/// Builds the support and the initial state.
pub fn prepare<T: Scalar>(config: &ExperimentConfig) -> Result<(SupportCurve<T>, FlowState<T>)> {
    let sigma = SupportCurve::from_spec(&config.support)?;
    let initial = config.initial.build(&sigma, config.flow.n_nodes)?;
    Ok((sigma, initial))
}

/// Admissibility of the initial datum; `None` when it does not attach to
/// the support.
pub fn admissibility<T: Scalar>(
    sigma: &SupportCurve<T>,
    initial: &FlowState<T>,
) -> Result<Option<AdmissibilityReport>> {
    if initial.lift().is_none() {
        return Ok(None);
    }
    Ok(Some(check_admissibility(&initial.curve, sigma)?))
}

pub fn simulate<T: Scalar>(config: &ExperimentConfig) -> Result<Outcome<T>> {
    let (sigma, initial) = prepare::<T>(config)?;
    let admissibility = admissibility(&sigma, &initial)?;
    let trajectory = run(initial, &sigma, &config.flow, config.mode, &config.run)?;
    Ok(Outcome {
        sigma,
        admissibility,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub termination: Termination,
    pub final_t: f64,
    pub steps: usize,
    pub final_fit: CircleFit,
    /// `final_fit.rms / final_fit.radius`.
    pub final_fit_relative_rms: f64,
    pub invariant_violation_count: usize,
    pub violations_by_check: BTreeMap<String, usize>,
    pub records: usize,
    pub admissible: Option<bool>,
    pub singularity: Option<Classification>,
}

pub fn summarize<T: Scalar>(config: &ExperimentConfig, outcome: &Outcome<T>) -> Summary {
    let tr = &outcome.trajectory;
    let mut violations_by_check = BTreeMap::new();
    let mut invariant_violation_count = 0;
    for r in &tr.records {
        let v = r.flags.violations();
        if !v.is_empty() {
            invariant_violation_count += 1;
        }
        for name in v {
            *violations_by_check.entry(name.to_string()).or_insert(0) += 1;
        }
    }
    let final_fit = fit_circular_arc(&tr.final_state.curve);
    let singularity = matches!(tr.termination, Termination::BlowupDetected { .. })
        .then(|| classify_singularity(&tr.history, None));
    Summary {
        name: config.name.clone(),
        termination: tr.termination.clone(),
        final_t: tr.final_state.t.to_f64_lossy(),
        steps: tr.final_state.step_index,
        final_fit_relative_rms: final_fit.rms / final_fit.radius,
        final_fit,
        invariant_violation_count,
        violations_by_check,
        records: tr.records.len(),
        admissible: outcome.admissibility.as_ref().map(|a| a.admissible()),
        singularity,
    }
}

pub fn stamp(config: &ExperimentConfig) -> Stamp {
    Stamp {
        config_hash: config.hash(),
        seed: config.seed(),
    }
}

/// Writes every artifact of `outcome` below `out_dir`; returns the paths.
pub fn write_outputs<T: Scalar>(
    config: &ExperimentConfig,
    outcome: &Outcome<T>,
    summary: &Summary,
    out_dir: &Path,
    frames: bool,
) -> Result<Vec<PathBuf>> {
    let stamp = stamp(config);
    let tr = &outcome.trajectory;
    let paths = &config.outputs;
    let mut written = Vec::new();

    let p = out_dir.join(&paths.diagnostics);
    output::write_diagnostics(&p, &stamp, &tr.records)?;
    written.push(p);

    let mut states: Vec<&FlowState<T>> = tr.snapshots.iter().collect();
    if states.last().is_none_or(|s| s.t < tr.final_state.t) {
        states.push(&tr.final_state);
    }
    let header = TrajectoryHeader {
        format: TRAJECTORY_FORMAT.into(),
        config_hash: stamp.config_hash.clone(),
        seed: stamp.seed,
        precision: config.precision,
        mode: config.mode,
        support: config.support.clone(),
    };
    let p = out_dir.join(&paths.trajectory);
    output::write_trajectory(&p, &header, &states)?;
    written.push(p);

    let p = out_dir.join(&paths.admissibility);
    output::write_json(
        &p,
        &stamp,
        &AdmissibilityArtifact::new(outcome.admissibility.as_ref()),
    )?;
    written.push(p);

    let p = out_dir.join(&paths.summary);
    output::write_json(&p, &stamp, summary)?;
    written.push(p);

    if frames {
        let dir = out_dir.join(&paths.frames);
        for (i, s) in states.iter().enumerate() {
            let p = dir.join(format!("frame_{i:05}.svg"));
            output::write_text(&p, &output::svg_frame(s, &outcome.sigma, &stamp))?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Admissibility file body; data not attached to the support are reported
/// as not applicable.
#[derive(Debug, Serialize)]
pub struct AdmissibilityArtifact<'a> {
    pub applicable: bool,
    pub admissible: Option<bool>,
    pub report: Option<&'a AdmissibilityReport>,
}

impl<'a> AdmissibilityArtifact<'a> {
    pub fn new(report: Option<&'a AdmissibilityReport>) -> Self {
        Self {
            applicable: report.is_some(),
            admissible: report.map(|r| r.admissible()),
            report,
        }
    }
}

fn execute<T: Scalar>(config: &ExperimentConfig, out_dir: &Path, frames: bool) -> Result<Summary> {
    let outcome = simulate::<T>(config)?;
    let summary = summarize(config, &outcome);
    write_outputs(config, &outcome, &summary, out_dir, frames)?;
    if summary.termination.is_failure() {
        let reason = match &summary.termination {
            Termination::Failure { reason } => format!("failure: {reason}"),
            t => t.label().to_string(),
        };
        return Err(CliError::RunFailed(reason));
    }
    Ok(summary)
}

/// Runs one experiment and writes its artifacts. Abnormal terminations
/// still write everything before returning [`CliError::RunFailed`].
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, frames: bool) -> Result<Summary> {
    match config.precision {
        Precision::F64 => execute::<f64>(config, out_dir, frames),
        Precision::F32 => execute::<f32>(config, out_dir, frames),
    }
}

/// Admissibility of the configured datum, without running the flow.
pub fn check(config: &ExperimentConfig) -> Result<Option<AdmissibilityReport>> {
    fn go<T: Scalar>(config: &ExperimentConfig) -> Result<Option<AdmissibilityReport>> {
        let (sigma, initial) = prepare::<T>(config)?;
        admissibility(&sigma, &initial)
    }
    match config.precision {
        Precision::F64 => go::<f64>(config),
        Precision::F32 => go::<f32>(config),
    }
}
