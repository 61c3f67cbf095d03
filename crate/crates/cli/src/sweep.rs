//! Parameter sweeps: the cartesian product of a grid applied to a template.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{config_from_value, ExperimentConfig, Precision};
use crate::error::{CliError, Result};
use crate::experiment::{simulate, summarize, Outcome};
use crate::output::{self, Stamp};

pub const THREADS_ENV: &str = "ARCFLOW_THREADS";

/// Dotted configuration paths mapped to the values they take, e.g.
/// `{"parameters": {"initial.rho": [0.02, 0.03]}}`. Numeric segments index
/// arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub parameters: BTreeMap<String, Vec<Value>>,
}

impl Grid {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let grid: Grid = serde_path_to_error::deserialize(&mut de).map_err(|e| {
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
        if grid.parameters.is_empty() {
            return Err(CliError::Usage("empty grid: no parameters".into()));
        }
        if let Some((k, _)) = grid.parameters.iter().find(|(_, v)| v.is_empty()) {
            return Err(CliError::Usage(format!("empty grid: `{k}` has no values")));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.parameters.values().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Assignment number `index`, last parameter varying fastest.
    pub fn point(&self, mut index: usize) -> Vec<(&str, &Value)> {
        let mut out: Vec<(&str, &Value)> = Vec::with_capacity(self.parameters.len());
        for (k, values) in self.parameters.iter().rev() {
            out.push((k, &values[index % values.len()]));
            index /= values.len();
        }
        out.reverse();
        out
    }
}

fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(root, |v, seg| match v {
        Value::Object(m) => m.get(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

fn assign(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let (parent, last) = match path.rsplit_once('.') {
        Some((p, l)) => (Some(p), l),
        None => (None, path),
    };
    let mut target = root;
    if let Some(parent) = parent {
        for seg in parent.split('.') {
            target = match target {
                Value::Object(m) => m.get_mut(seg),
                Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "grid parameter `{path}`: no `{seg}` in the template"
                ))
            })?;
        }
    }
    match target {
        Value::Object(m) => {
            m.insert(last.to_string(), value);
        }
        Value::Array(a) => {
            let slot = last
                .parse::<usize>()
                .ok()
                .and_then(|i| a.get_mut(i))
                .ok_or_else(|| {
                    CliError::Usage(format!("grid parameter `{path}`: bad index `{last}`"))
                })?;
            *slot = value;
        }
        _ => {
            return Err(CliError::Usage(format!(
                "grid parameter `{path}`: parent is not a container"
            )))
        }
    }
    Ok(())
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        _ => a == b,
    }
}

/// The template with one grid point applied. Assignments the configuration
/// silently drops (a field of another initial-curve kind, say) are errors.
pub fn instantiate(
    template: &ExperimentConfig,
    point: &[(&str, &Value)],
    origin: &str,
) -> Result<ExperimentConfig> {
    let mut value = serde_json::to_value(template).expect("configuration serializes");
    for (path, v) in point {
        assign(&mut value, path, (*v).clone())?;
    }
    let config = config_from_value(value, origin)?;
    let back = serde_json::to_value(&config).expect("configuration serializes");
    for (path, v) in point {
        if !lookup(&back, path).is_some_and(|w| same(v, w)) {
            return Err(CliError::Invalid(format!(
                "grid parameter `{path}` has no effect"
            )));
        }
    }
    Ok(config)
}

/// Outcome columns of one sweep row.
#[derive(Debug, Clone, Default)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<String>,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub admissibility: Option<[bool; 8]>,
    pub termination: String,
    pub final_t: Option<f64>,
    pub steps: Option<usize>,
    pub fit_relative_rms: Option<f64>,
    pub violations: Option<usize>,
    pub error: String,
}

pub const ADMISSIBILITY_COLUMNS: [&str; 8] = [
    "admissible",
    "kappa_positive",
    "embedded",
    "outside_support",
    "length_below_width",
    "length_below_curvature_scale",
    "length_below_c",
    "isoperimetric_ratio_ok",
];

impl SweepRow {
    pub fn header(grid: &Grid) -> Vec<String> {
        let mut h = vec!["index".to_string()];
        h.extend(grid.parameters.keys().cloned());
        h.extend(["config_hash", "seed"].map(String::from));
        h.extend(ADMISSIBILITY_COLUMNS.map(String::from));
        h.extend(
            [
                "termination",
                "final_t",
                "steps",
                "final_fit_relative_rms",
                "invariant_violation_count",
                "error",
            ]
            .map(String::from),
        );
        h
    }

    pub fn record(&self) -> Vec<String> {
        fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
            v.map(f).unwrap_or_default()
        }
        let num = |v: f64| format!("{v:.17e}");
        let mut r = vec![self.index.to_string()];
        r.extend(self.values.iter().cloned());
        r.push(self.config_hash.clone());
        r.push(opt(self.seed, |s| s.to_string()));
        match self.admissibility {
            Some(flags) => r.extend(flags.map(|b| b.to_string())),
            None => r.extend(std::iter::repeat_n(
                String::new(),
                ADMISSIBILITY_COLUMNS.len(),
            )),
        }
        r.push(self.termination.clone());
        r.push(opt(self.final_t, num));
        r.push(opt(self.steps, |s| s.to_string()));
        r.push(opt(self.fit_relative_rms, num));
        r.push(opt(self.violations, |v| v.to_string()));
        r.push(self.error.clone());
        r
    }
}

fn fill<T: arcflow::Scalar>(row: &mut SweepRow, config: &ExperimentConfig) -> Result<()> {
    let outcome: Outcome<T> = simulate(config)?;
    let s = summarize(config, &outcome);
    row.admissibility = outcome.admissibility.as_ref().map(|a| {
        [
            a.admissible(),
            a.kappa_positive,
            a.embedded,
            a.outside_support,
            a.length_below_width,
            a.length_below_curvature_scale,
            a.length_below_c,
            a.isoperimetric_ratio_ok,
        ]
    });
    row.termination = s.termination.label().to_string();
    row.final_t = Some(s.final_t);
    row.steps = Some(s.steps);
    row.fit_relative_rms = Some(s.final_fit_relative_rms);
    row.violations = Some(s.invariant_violation_count);
    if let arcflow::Termination::Failure { reason } = &s.termination {
        row.error = reason.clone();
    }
    Ok(())
}

fn run_point(template: &ExperimentConfig, grid: &Grid, index: usize) -> SweepRow {
    let point = grid.point(index);
    let mut row = SweepRow {
        index,
        values: point.iter().map(|(_, v)| v.to_string()).collect(),
        ..SweepRow::default()
    };
    let result = instantiate(template, &point, &format!("grid point {index}")).and_then(|config| {
        row.config_hash = config.hash();
        row.seed = Some(config.seed());
        match config.precision {
            Precision::F64 => fill::<f64>(&mut row, &config),
            Precision::F32 => fill::<f32>(&mut row, &config),
        }
    });
    if let Err(e) = result {
        row.termination = "error".into();
        row.error = e.to_string();
    }
    row
}

/// Thread cap from [`THREADS_ENV`]; `None` leaves the choice to rayon.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a thread count, got `{s}`"
            ))),
        },
    }
}

/// Runs every grid point in parallel; failures land in their row.
pub fn sweep(
    template: &ExperimentConfig,
    grid: &Grid,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads:?} threads: {e}")))?;
    Ok(pool.install(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| run_point(template, grid, i))
            .collect()
    }))
}

/// Provenance of a sweep: hash over the template hash and the grid.
pub fn sweep_stamp(template: &ExperimentConfig, grid: &Grid) -> Stamp {
    let mut h = Sha256::new();
    h.update(template.hash().as_bytes());
    h.update(serde_json::to_vec(grid).expect("grid serializes"));
    Stamp {
        config_hash: format!("{:x}", h.finalize())[..16].to_string(),
        seed: template.seed(),
    }
}

pub fn write_sweep(
    path: &Path,
    template: &ExperimentConfig,
    grid: &Grid,
    rows: &[SweepRow],
) -> Result<()> {
    let records: Vec<Vec<String>> = rows.iter().map(SweepRow::record).collect();
    output::write_csv(
        path,
        &sweep_stamp(template, grid),
        &SweepRow::header(grid),
        &records,
    )
}
