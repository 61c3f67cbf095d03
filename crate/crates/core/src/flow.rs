//! Explicit time stepping of `d/dt c = (kappa - kappa_bar) nu` with endpoints
//! sliding along `Sigma`, plus the plain curve shortening mode used by the
//! reference solutions.

use serde::{Deserialize, Serialize};

use crate::curve::{menger, CurvatureSamples, DiscreteCurve};
use crate::diagnostics::{assemble_record, DensityProbe, DiagnosticsRecord, RecordContext};
use crate::error::{FlowError, Result};
use crate::point::PlanarPoint;
use crate::scalar::Scalar;
use crate::support::{BoundaryLift, SupportCurve};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    AreaPreserving,
    /// Curve shortening: the velocity drops the average curvature.
    Csf,
}

/// Missing fields take their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub dt_safety: f64,
    pub resample_every: usize,
    pub n_nodes: usize,
    pub t_end: f64,
    /// Threshold on `L int (kappa - kappa_bar)^2 ds`.
    pub stop_tolerance: f64,
    pub max_kappa_abort: f64,
    pub max_steps: Option<usize>,
    /// Resampling only happens when the longest segment exceeds the shortest
    /// by this factor.
    pub resample_ratio: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_safety: 0.4,
            resample_every: 50,
            n_nodes: 200,
            t_end: 1.0,
            stop_tolerance: 1e-8,
            max_kappa_abort: 1e4,
            max_steps: None,
            resample_ratio: 1.05,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Err(FlowError::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )))
        };
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(FlowError::InvalidInput(format!(
                "dt_safety must lie in (0, 1], got {}",
                self.dt_safety
            )));
        }
        if self.resample_every == 0 {
            return bad("resample_every", 0.0);
        }
        if self.n_nodes < 4 {
            return Err(FlowError::InvalidInput(format!(
                "n_nodes must be at least 4, got {}",
                self.n_nodes
            )));
        }
        for (name, v) in [
            ("t_end", self.t_end),
            ("stop_tolerance", self.stop_tolerance),
            ("max_kappa_abort", self.max_kappa_abort),
        ] {
            if !(v > 0.0) {
                return bad(name, v);
            }
        }
        if !(self.resample_ratio >= 1.0) {
            return Err(FlowError::InvalidInput(format!(
                "resample_ratio must be at least 1, got {}",
                self.resample_ratio
            )));
        }
        Ok(())
    }
}

/// How the ends of the curve move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Boundary<T> {
    /// Endpoints at `Sigma f(a)` and `Sigma f(b)`, meeting `Sigma` at right
    /// angles.
    Support { a: T, b: T },
    /// Closed curve.
    Closed,
    /// Endpoints translated with a fixed velocity.
    Driven { velocity: PlanarPoint<T> },
}

impl<T: Scalar> Boundary<T> {
    pub fn on_support(lift: BoundaryLift<T>) -> Self {
        Self::Support {
            a: lift.a,
            b: lift.b,
        }
    }

    pub fn lift(&self) -> Option<BoundaryLift<T>> {
        match *self {
            Self::Support { a, b } => Some(BoundaryLift::new(a, b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FlowState<T> {
    pub t: T,
    pub step_index: usize,
    pub boundary: Boundary<T>,
    pub curve: DiscreteCurve<T>,
}

impl<T: Scalar> FlowState<T> {
    pub fn new(curve: DiscreteCurve<T>, boundary: Boundary<T>) -> Self {
        Self {
            t: T::zero(),
            step_index: 0,
            boundary,
            curve,
        }
    }

    pub fn lift(&self) -> Option<BoundaryLift<T>> {
        self.boundary.lift()
    }
}

/// Average curvature `sum kappa_i w_i / sum w_i`.
pub fn kappa_bar<T: Scalar>(samples: &CurvatureSamples<T>) -> T {
    let total = samples.total_weight();
    if total > T::zero() {
        samples.integrate(|k| k) / total
    } else {
        T::zero()
    }
}

/// Node velocities `(kappa_i - kappa_bar) nu_i`, or `kappa_i nu_i` in
/// curve shortening mode, from the curve's own curvature estimate.
pub fn velocity<T: Scalar>(curve: &DiscreteCurve<T>, mode: FlowMode) -> Vec<PlanarPoint<T>> {
    let samples = curve.curvature();
    let drive = match mode {
        FlowMode::AreaPreserving => kappa_bar(&samples),
        FlowMode::Csf => T::zero(),
    };
    curve
        .normals()
        .into_iter()
        .zip(samples.values)
        .map(|(nu, k)| nu * (k - drive))
        .collect()
}

/// Curvature used by the stepper. At a support endpoint the neighbouring
/// node is mirrored across the tangent line of `Sigma`, which encodes the
/// right-angle contact; other nodes use the curve's own estimate.
pub fn flow_curvature<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
) -> CurvatureSamples<T> {
    let mut samples = state.curve.curvature();
    if let Some(lift) = state.lift() {
        let nodes = state.curve.nodes();
        let n = nodes.len();
        let ghost = |end: PlanarPoint<T>, next: PlanarPoint<T>, s: T| {
            let nu = sigma.eval(s).normal;
            next - nu * ((next - end).dot(nu) * T::lit(2.0))
        };
        let g0 = ghost(nodes[0], nodes[1], lift.a);
        samples.values[0] = menger(g0, nodes[0], nodes[1]);
        let g1 = ghost(nodes[n - 1], nodes[n - 2], lift.b);
        samples.values[n - 1] = menger(nodes[n - 2], nodes[n - 1], g1);
    }
    samples
}

/// Everything the stepper and the monitors need from one time slice.
#[derive(Debug, Clone)]
pub struct Measure<T> {
    pub samples: CurvatureSamples<T>,
    /// Mean curvature of the slice.
    pub kappa_bar: T,
    /// Value subtracted in the velocity: `kappa_bar`, or zero in curve
    /// shortening mode.
    pub drive: T,
    pub length: T,
    /// `int (kappa - kappa_bar)^2 ds`.
    pub residual: T,
    pub max_abs_kappa: T,
    pub min_segment: T,
}

pub fn measure<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    mode: FlowMode,
) -> Measure<T> {
    let samples = flow_curvature(state, sigma);
    let kb = kappa_bar(&samples);
    let residual = samples.integrate(|k| (k - kb) * (k - kb));
    Measure {
        kappa_bar: kb,
        drive: match mode {
            FlowMode::AreaPreserving => kb,
            FlowMode::Csf => T::zero(),
        },
        length: samples.total_weight(),
        residual,
        max_abs_kappa: samples.max_abs(),
        min_segment: state.curve.min_segment(),
        samples,
    }
}

/// Time step `dt_safety h^2 / 2` for the shortest segment `h`.
pub fn time_step<T: Scalar>(m: &Measure<T>, config: &FlowConfig) -> T {
    T::lit(config.dt_safety) * m.min_segment * m.min_segment * T::lit(0.5)
}

/// Moves the state by `dt` using the slice data `m`, then resamples on the
/// configured cadence.
pub fn advance<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    config: &FlowConfig,
    m: &Measure<T>,
    dt: T,
) -> Result<FlowState<T>> {
    let nodes = state.curve.nodes();
    let n = nodes.len();
    let closed = state.curve.is_closed();
    let mut next = nodes.to_vec();
    let speed = |i: usize| m.samples.values[i] - m.drive;
    let range = if closed { 0..n } else { 1..n - 1 };
    for i in range {
        let prev = nodes[(i + n - 1) % n];
        let succ = nodes[(i + 1) % n];
        let nu = (succ - prev).unit().perp();
        next[i] = nodes[i] + nu * (dt * speed(i));
    }
    let t_next = state.t + dt;
    let boundary = match state.boundary {
        Boundary::Support { a, b } => {
            let upd = BoundaryLift::new(a, b).advance(
                speed(0) + m.drive,
                speed(n - 1) + m.drive,
                m.drive,
                dt,
            );
            if upd.collision {
                return Err(FlowError::BoundaryCollision {
                    t: t_next.to_f64_lossy(),
                });
            }
            next[0] = sigma.point(upd.lift.a);
            next[n - 1] = sigma.point(upd.lift.b);
            Boundary::on_support(upd.lift)
        }
        Boundary::Driven { velocity } => {
            next[0] = nodes[0] + velocity * dt;
            next[n - 1] = nodes[n - 1] + velocity * dt;
            state.boundary
        }
        Boundary::Closed => Boundary::Closed,
    };
    let step_index = state.step_index + 1;
    let fail = |reason: String| FlowError::IntegrationFailure {
        step: step_index,
        reason,
    };
    if let Some(i) = next.iter().position(|p| !p.is_finite()) {
        return Err(fail(format!("node {i} is not finite")));
    }
    let mut curve = DiscreteCurve::new(next, closed).map_err(|e| fail(e.to_string()))?;
    if step_index.is_multiple_of(config.resample_every) {
        let lo = curve.min_segment();
        let hi = curve.max_segment();
        if hi > lo * T::lit(config.resample_ratio) || curve.len() != config.n_nodes {
            curve = curve
                .resample_smooth(config.n_nodes)
                .map_err(|e| fail(e.to_string()))?;
        }
        if let Boundary::Support { .. } = boundary {
            let tol = T::tolerance(1e-9) * sigma.diameter();
            let inner = &curve.nodes()[1..curve.len() - 1];
            if let Some(i) = inner.iter().position(|&p| sigma.signed_distance(p) < -tol) {
                return Err(fail(format!(
                    "interior node {} crossed the support curve",
                    i + 1
                )));
            }
        }
    }
    Ok(FlowState {
        t: t_next,
        step_index,
        boundary,
        curve,
    })
}

/// Outcome of [`step`].
#[derive(Debug, Clone)]
pub enum StepOutcome<T> {
    Advanced {
        state: FlowState<T>,
        dt: T,
    },
    /// Curvature exceeded `max_kappa_abort`; the state is left untouched.
    Blowup {
        max_kappa: T,
    },
}

/// One explicit Euler step.
pub fn step<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    config: &FlowConfig,
    mode: FlowMode,
) -> Result<StepOutcome<T>> {
    let m = measure(state, sigma, mode);
    if m.max_abs_kappa > T::lit(config.max_kappa_abort) {
        return Ok(StepOutcome::Blowup {
            max_kappa: m.max_abs_kappa,
        });
    }
    if !(m.max_abs_kappa.is_finite() && m.min_segment > T::zero()) {
        return Err(FlowError::IntegrationFailure {
            step: state.step_index,
            reason: "degenerate geometry".into(),
        });
    }
    let dt = time_step(&m, config);
    let state = advance(state, sigma, config, &m, dt)?;
    Ok(StepOutcome::Advanced { state, dt })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    TEnd,
    MaxSteps,
    BlowupDetected { max_kappa: f64 },
    BoundaryCollision,
    Failure { reason: String },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::TEnd => "t_end",
            Self::MaxSteps => "max_steps",
            Self::BlowupDetected { .. } => "blowup-detected",
            Self::BoundaryCollision => "boundary-collision",
            Self::Failure { .. } => "failure",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Self::BoundaryCollision | Self::Failure { .. })
    }
}

/// Density probe placement: a point of `Sigma` and the probe time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Arclength parameter of `x0` on `Sigma`.
    #[serde(rename = "x0_param_on_sigma", alias = "x0_param")]
    pub x0_param: f64,
    #[serde(rename = "T_probe", alias = "t_probe")]
    pub t_probe: f64,
}

/// Recording cadence of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Time between diagnostics records; zero records every step.
    pub sample_interval: f64,
    /// Time between stored snapshots; zero disables time-based snapshots.
    pub snapshot_interval: f64,
    pub probes: Vec<ProbeSpec>,
    /// Once `max |kappa|` exceeds this multiple of its initial value, a
    /// snapshot is stored every time it grows by `snapshot_growth`.
    pub blowup_factor: f64,
    pub snapshot_growth: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            sample_interval: 1e-3,
            snapshot_interval: 0.0,
            probes: Vec::new(),
            blowup_factor: 10.0,
            snapshot_growth: 1.05,
        }
    }
}

/// Per-step view handed to a run observer, taken before the step is applied.
pub struct StepView<'a, T> {
    pub state: &'a FlowState<T>,
    pub measure: &'a Measure<T>,
    /// `exp(-1/2 int_0^t drive^2)` at `state.t`.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub termination: Termination,
    pub final_state: FlowState<T>,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<FlowState<T>>,
    /// `(t, max |kappa|)` at every record and snapshot.
    pub history: Vec<(f64, f64)>,
    pub reference: RecordContext,
}

/// Runs to termination, recording diagnostics and snapshots.
pub fn run<T: Scalar>(
    initial: FlowState<T>,
    sigma: &SupportCurve<T>,
    config: &FlowConfig,
    mode: FlowMode,
    options: &RunOptions,
) -> Result<Trajectory<T>> {
    run_observed(initial, sigma, config, mode, options, |_| {})
}

/// [`run`] with a callback invoked before every step.
pub fn run_observed<T: Scalar>(
    initial: FlowState<T>,
    sigma: &SupportCurve<T>,
    config: &FlowConfig,
    mode: FlowMode,
    options: &RunOptions,
    mut observer: impl FnMut(&StepView<'_, T>),
) -> Result<Trajectory<T>> {
    config.validate()?;
    let context = RecordContext::from_initial(&initial, sigma, mode)?;
    let mut probes: Vec<DensityProbe> = options
        .probes
        .iter()
        .map(|p| DensityProbe::on_support(sigma, p.x0_param, p.t_probe))
        .collect();
    let mut state = initial;
    let mut records = Vec::new();
    let mut snapshots = vec![state.clone()];
    let mut history = Vec::new();
    let mut log_weight = 0.0f64;
    let mut next_sample = 0.0f64;
    let mut next_snapshot = options.snapshot_interval;
    let first = measure(&state, sigma, mode);
    let kappa_0 = first.max_abs_kappa.to_f64_lossy();
    let mut last_snapshot_kappa = kappa_0;
    let t_end = T::lit(config.t_end);
    let mut pending = Some(first);

    let termination = loop {
        let m = pending
            .take()
            .unwrap_or_else(|| measure(&state, sigma, mode));
        let t = state.t.to_f64_lossy();
        let drive = m.drive.to_f64_lossy();
        let weight = log_weight.exp();
        for p in probes.iter_mut() {
            p.f_accumulator = weight;
        }
        let max_k = m.max_abs_kappa.to_f64_lossy();
        let record_now = t >= next_sample;
        let sample = |records: &mut Vec<DiagnosticsRecord>, history: &mut Vec<(f64, f64)>| {
            records.push(assemble_record(&state, sigma, &m, &probes, &context));
            history.push((t, max_k));
        };
        if max_k > config.max_kappa_abort {
            sample(&mut records, &mut history);
            snapshots.push(state.clone());
            break Termination::BlowupDetected { max_kappa: max_k };
        }
        if !(max_k.is_finite() && m.min_segment > T::zero() && m.residual.is_finite()) {
            break Termination::Failure {
                reason: format!("non-finite curvature at step {}", state.step_index),
            };
        }
        let converged = mode == FlowMode::AreaPreserving
            && state.lift().is_some()
            && (m.residual * m.length).to_f64_lossy() < config.stop_tolerance;
        let at_end = state.t >= t_end;
        let capped = config.max_steps.is_some_and(|cap| state.step_index >= cap);
        if record_now || converged || at_end || capped {
            sample(&mut records, &mut history);
            while next_sample <= t {
                next_sample += options.sample_interval.max(f64::MIN_POSITIVE);
            }
        }
        if converged {
            break Termination::Converged;
        }
        if at_end {
            break Termination::TEnd;
        }
        if capped {
            break Termination::MaxSteps;
        }
        let geometric = max_k > options.blowup_factor * kappa_0
            && max_k >= options.snapshot_growth * last_snapshot_kappa;
        let timed = options.snapshot_interval > 0.0 && t >= next_snapshot;
        if state.step_index > 0 && (geometric || timed) {
            snapshots.push(state.clone());
            history.push((t, max_k));
            last_snapshot_kappa = max_k;
            while options.snapshot_interval > 0.0 && next_snapshot <= t {
                next_snapshot += options.snapshot_interval;
            }
        }
        observer(&StepView {
            state: &state,
            measure: &m,
            weight,
        });
        let mut dt = time_step(&m, config);
        if state.t + dt > t_end {
            dt = t_end - state.t;
        }
        match advance(&state, sigma, config, &m, dt) {
            Ok(next) => {
                // trapezoid rule for the exponent of the density weight
                let next_m = measure(&next, sigma, mode);
                let d1 = next_m.drive.to_f64_lossy();
                log_weight -= 0.25 * dt.to_f64_lossy() * (drive * drive + d1 * d1);
                pending = Some(next_m);
                state = next;
            }
            Err(FlowError::BoundaryCollision { .. }) => break Termination::BoundaryCollision,
            Err(e) => {
                break Termination::Failure {
                    reason: e.to_string(),
                }
            }
        }
    };
    if snapshots
        .last()
        .is_none_or(|s| s.step_index != state.step_index)
    {
        snapshots.push(state.clone());
    }
    Ok(Trajectory {
        termination,
        final_state: state,
        records,
        snapshots,
        history,
        reference: context,
    })
}
