//! Artifact writers. Every file carries the configuration hash and seed.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use arcflow::{DiagnosticsRecord, FlowMode, FlowState, Scalar, SupportCurve, SupportSpec};
use serde::{Deserialize, Serialize};

use crate::config::Precision;
use crate::error::{CliError, Result};

pub const TRAJECTORY_FORMAT: &str = "arcflow-trajectory";

/// Provenance shared by all artifacts of one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn comment(&self) -> String {
        format!(
            "arcflow config_hash={} seed={}",
            self.config_hash, self.seed
        )
    }
}

/// First line of a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub format: String,
    pub config_hash: String,
    pub seed: u64,
    pub precision: Precision,
    pub mode: FlowMode,
    pub support: SupportSpec,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Pretty JSON object with `config_hash` and `seed` merged in front.
pub fn write_json(path: &Path, stamp: &Stamp, body: &impl Serialize) -> Result<()> {
    let mut value = serde_json::to_value(stamp).expect("stamp serializes");
    let map = value.as_object_mut().expect("stamp is an object");
    match serde_json::to_value(body).expect("artifact serializes") {
        serde_json::Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(&value).expect("value serializes");
    writeln!(w, "{text}").map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}

/// CSV with a leading `# arcflow ...` comment line.
pub fn write_csv(
    path: &Path,
    stamp: &Stamp,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {}", stamp.comment()).map_err(|e| CliError::io(path, e))?;
    let mut csv = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| CliError::io(path, e.into());
    csv.write_record(header).map_err(to_io)?;
    for row in rows {
        csv.write_record(row).map_err(to_io)?;
    }
    let w = csv
        .into_inner()
        .map_err(|e| CliError::io(path, e.into_error()))?;
    finish(w, path)
}

pub fn write_diagnostics(path: &Path, stamp: &Stamp, records: &[DiagnosticsRecord]) -> Result<()> {
    let header: Vec<String> = DiagnosticsRecord::CSV_HEADER
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = records.iter().map(|r| r.csv_row().to_vec()).collect();
    write_csv(path, stamp, &header, &rows)
}

pub fn write_trajectory<T: Scalar>(
    path: &Path,
    header: &TrajectoryHeader,
    states: &[&FlowState<T>],
) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(
        w,
        "{}",
        serde_json::to_string(header).expect("header serializes")
    )
    .map_err(io)?;
    for s in states {
        writeln!(w, "{}", serde_json::to_string(s).expect("state serializes")).map_err(io)?;
    }
    finish(w, path)
}

/// Reads a trajectory file; states are widened to `f64`.
pub fn read_trajectory(path: &Path) -> Result<(TrajectoryHeader, Vec<FlowState<f64>>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let origin = path.display().to_string();
    let mut lines = BufReader::new(file).lines();
    let parse_err = |line: usize, e: serde_json::Error| CliError::Config {
        origin: origin.clone(),
        line,
        column: e.column(),
        field: String::new(),
        message: e.to_string(),
    };
    let first = lines
        .next()
        .ok_or_else(|| CliError::Invalid(format!("{origin}: empty trajectory file")))?
        .map_err(|e| CliError::io(path, e))?;
    let header: TrajectoryHeader = serde_json::from_str(&first).map_err(|e| parse_err(1, e))?;
    if header.format != TRAJECTORY_FORMAT {
        return Err(CliError::Invalid(format!(
            "{origin}: not an arcflow trajectory (format `{}`)",
            header.format
        )));
    }
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        states.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 2, e))?);
    }
    Ok((header, states))
}

const SIGMA_SAMPLES: usize = 1024;
const SVG_WIDTH: f64 = 800.0;

fn polyline(points: impl Iterator<Item = [f64; 2]>) -> String {
    let mut s = String::new();
    for p in points {
        let _ = write!(s, "{},{} ", p[0], p[1]);
    }
    s.pop();
    s
}

/// Frame of one state: curve in black, `Sigma` in gray, chord dashed. The
/// view is fitted to the curve with a margin, `y` pointing up.
pub fn svg_frame<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    stamp: &Stamp,
) -> String {
    let nodes: Vec<[f64; 2]> = state
        .curve
        .nodes()
        .iter()
        .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy()])
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &nodes {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let size = (x1 - x0).max(y1 - y0).max(1e-12);
    let pad = 0.25 * size;
    let (vx, vy) = (x0 - pad, y0 - pad);
    let (vw, vh) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let height = (SVG_WIDTH * vh / vw).round();

    let l = sigma.total_length();
    let support = polyline((0..=SIGMA_SAMPLES).map(|i| {
        let p = sigma.point(l * T::from_usize_lossy(i) / T::from_usize_lossy(SIGMA_SAMPLES));
        [p.x.to_f64_lossy(), p.y.to_f64_lossy()]
    }));

    let stroke = "fill=\"none\" vector-effect=\"non-scaling-stroke\"";
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{height}\" \
         viewBox=\"{vx} {} {vw} {vh}\">",
        -(vy + vh)
    );
    let _ = writeln!(
        svg,
        "<!-- {} t={} -->",
        stamp.comment(),
        state.t.to_f64_lossy()
    );
    let _ = writeln!(svg, "<g transform=\"scale(1,-1)\">");
    let _ = writeln!(
        svg,
        "<polyline points=\"{support}\" stroke=\"#999999\" stroke-width=\"1.5\" {stroke}/>"
    );
    if !state.curve.is_closed() {
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\" \
             stroke-dasharray=\"6 4\" {stroke}/>",
            a[0], a[1], b[0], b[1]
        );
    }
    let mut curve = nodes.clone();
    if state.curve.is_closed() {
        curve.push(nodes[0]);
    }
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" stroke=\"#000000\" stroke-width=\"2\" {stroke}/>",
        polyline(curve.into_iter())
    );
    svg.push_str("</g>\n</svg>\n");
    svg
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use arcflow::{InitialSpec, State64, Support64};

    #[test]
    fn svg_frame_has_stamp_and_layers() {
        let sigma = Support64::circle(1.0).unwrap();
        let state: State64 = InitialSpec::OrthogonalArc {
            rho: 0.5,
            center_angle: 0.0,
        }
        .build(&sigma, 20)
        .unwrap();
        let stamp = Stamp {
            config_hash: "abc".into(),
            seed: 4,
        };
        let svg = svg_frame(&state, &sigma, &stamp);
        assert!(svg.contains("config_hash=abc seed=4"));
        assert!(svg.contains("#999999"));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
