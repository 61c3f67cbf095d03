//! Blow-up lab on a stored trajectory: classification plus Hamilton and
//! parabolic frames.

use std::path::{Path, PathBuf};

use arcflow::flow::flow_curvature;
use arcflow::rescaling::PARABOLIC_TAU;
use arcflow::{
    classify_singularity, estimate_blowup_time, hamilton_rescale, parabolic_rescale,
    self_shrinker_residual, Classification, Curve64, Point64, State64, Support64,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{self, Stamp};

/// Ladder exponents: `j = 2^k`.
const LADDER_EXPONENTS: std::ops::RangeInclusive<u32> = 1..=40;
/// Number of trailing snapshots rescaled parabolically.
const PARABOLIC_FRAMES: usize = 4;

/// Rescaling data stored next to each frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    /// Dilation factor applied about `origin`.
    #[serde(rename = "Q")]
    pub q: f64,
    /// Rescaled time of the frame: `0` on a Hamilton rung, `-log(T - t) / 2`
    /// in the parabolic frame.
    pub tau: f64,
    pub origin: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub t: f64,
    pub curve: Curve64,
    pub sidecar: Sidecar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonEntry {
    pub j: usize,
    pub snapshot: usize,
    pub t: f64,
    pub lambda: f64,
    pub max_past_ratio: f64,
    pub center_kappa: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicEntry {
    pub snapshot: usize,
    pub t: f64,
    pub q: f64,
    /// L2 norm of the shrinker residual in the parabolic frame.
    pub shrinker_l2: Option<f64>,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleReport {
    pub snapshots: usize,
    pub classification: Classification,
    pub hamilton: Vec<HamiltonEntry>,
    pub parabolic: Vec<ParabolicEntry>,
}

fn xy(p: Point64) -> [f64; 2] {
    [p.x, p.y]
}

/// Point the parabolic frames are centred on: the centroid of a closed
/// curve, the node of largest curvature otherwise.
fn blowup_point(state: &State64, sigma: &Support64) -> Point64 {
    if state.curve.is_closed() {
        return state.curve.centroid();
    }
    let k = flow_curvature(state, sigma).values;
    let i = (0..k.len())
        .max_by(|&a, &b| k[a].abs().total_cmp(&k[b].abs()))
        .unwrap_or(0);
    state.curve.nodes()[i]
}

/// Classifies the trajectory in `path` and writes the frames under
/// `out_dir`, followed by `rescale.json`.
pub fn rescale_trajectory(path: &Path, out_dir: &Path) -> Result<(RescaleReport, Vec<PathBuf>)> {
    let (header, states) = output::read_trajectory(path)?;
    if states.is_empty() {
        return Err(CliError::Invalid(format!("{}: no states", path.display())));
    }
    let stamp = Stamp {
        config_hash: header.config_hash.clone(),
        seed: header.seed,
    };
    let sigma = Support64::from_spec(&header.support)?;
    let history: Vec<(f64, f64)> = states
        .iter()
        .map(|s| (s.t, flow_curvature(s, &sigma).max_abs()))
        .collect();
    let t_est = estimate_blowup_time(&history);
    let classification = classify_singularity(&history, t_est);
    let mut report = RescaleReport {
        snapshots: states.len(),
        classification,
        hamilton: Vec::new(),
        parabolic: Vec::new(),
    };
    let mut written = Vec::new();

    if let Some(t_blow) = t_est {
        let ladder: Vec<usize> = LADDER_EXPONENTS.map(|k| 1usize << k).collect();
        let mut previous = None;
        for f in hamilton_rescale(&states, &sigma, t_blow, &ladder) {
            // once 1/j drops below T - t_last every rung repeats the same point
            if previous == Some((f.snapshot, f.node)) {
                continue;
            }
            previous = Some((f.snapshot, f.node));
            let file = format!("hamilton_j{:010}.json", f.j);
            let body = FrameFile {
                t: f.frame.t,
                curve: f.frame.curve,
                sidecar: Sidecar {
                    q: f.frame.q,
                    tau: 0.0,
                    origin: xy(f.frame.origin),
                },
            };
            let p = out_dir.join(&file);
            output::write_json(&p, &stamp, &body)?;
            written.push(p);
            report.hamilton.push(HamiltonEntry {
                j: f.j,
                snapshot: f.snapshot,
                t: f.frame.t,
                lambda: f.lambda,
                max_past_ratio: f.max_past_ratio,
                center_kappa: f.center_kappa,
                file,
            });
        }

        let before: Vec<usize> = (0..states.len())
            .filter(|&i| states[i].t < t_blow)
            .collect();
        if let Some(&last) = before.last() {
            let origin = blowup_point(&states[last], &sigma);
            for &i in &before[before.len().saturating_sub(PARABOLIC_FRAMES)..] {
                let s = &states[i];
                let frame = parabolic_rescale(&s.curve, origin, s.t, t_blow)?;
                let shrinker_l2 = self_shrinker_residual(&frame.curve, PARABOLIC_TAU)
                    .ok()
                    .map(|r| r.l2);
                let file = format!("parabolic_{i:05}.json");
                let body = FrameFile {
                    t: s.t,
                    curve: frame.curve,
                    sidecar: Sidecar {
                        q: frame.q,
                        tau: -0.5 * (t_blow - s.t).ln(),
                        origin: xy(origin),
                    },
                };
                let p = out_dir.join(&file);
                output::write_json(&p, &stamp, &body)?;
                written.push(p);
                report.parabolic.push(ParabolicEntry {
                    snapshot: i,
                    t: s.t,
                    q: frame.q,
                    shrinker_l2,
                    file,
                });
            }
        }
    }

    let p = out_dir.join("rescale.json");
    output::write_json(&p, &stamp, &report)?;
    written.push(p);
    Ok((report, written))
}
