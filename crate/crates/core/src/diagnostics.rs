//! Monitored quantities of a time slice: enclosed area, index, Gaussian
//! density, convexity of the chord-closed region and the a priori windows.

use serde::{Deserialize, Serialize};

use crate::curve::{exterior_angle, DiscreteCurve, End};
use crate::error::{FlowError, Result};
use crate::flow::{measure, Boundary, FlowMode, FlowState, Measure};
use crate::scalar::Scalar;
use crate::support::{BoundaryLift, SupportCurve};

/// Relative slack applied to the curvature-average and length windows.
pub const WINDOW_SLACK: f64 = 0.05;
/// Lower turning bound is relaxed by this many radians.
pub const TURNING_SLACK: f64 = 0.05;
/// Index values farther than this from an integer are flagged.
pub const INDEX_WARN: f64 = 0.2;

/// Signed area between the open curve and the arc of `Sigma` from
/// `Sigma f(a)` to `Sigma f(b)`:
/// `1/2 int_c (x dy - y dx) - 1/2 int_gamma (x dy - y dx)`.
pub fn enclosed_area<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
    lift: BoundaryLift<T>,
) -> Result<T> {
    check_endpoints(curve, sigma, lift)?;
    Ok(curve.shoelace() - sigma.arc_area_integral(lift.a, lift.b))
}

fn check_endpoints<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
    lift: BoundaryLift<T>,
) -> Result<()> {
    if curve.is_closed() {
        return Err(FlowError::InvalidInput("curve must be open".into()));
    }
    let tol = T::lit(1e-6) * sigma.diameter();
    let da = curve.first().dist(sigma.point(lift.a));
    let db = curve.last().dist(sigma.point(lift.b));
    if da > tol || db > tol {
        return Err(FlowError::InvalidInput(format!(
            "endpoints are {da} and {db} away from the lifted support points"
        )));
    }
    Ok(())
}

/// Turning number of the curve closed up by the reversed support arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub value: i64,
    /// Value before rounding.
    pub raw: f64,
    /// Raised when `raw` is farther than [`INDEX_WARN`] from an integer.
    pub warning: bool,
}

impl IndexReport {
    pub fn from_raw(raw: f64) -> Self {
        let value = raw.round();
        Self {
            value: value as i64,
            raw,
            warning: !((raw - value).abs() <= INDEX_WARN),
        }
    }
}

/// `(turning - int_a^b Sigma-kappa ds) / 2 pi + 1/2`: the two right-angle
/// corners contribute `pi / 2` each.
pub fn index_from_turning(turning: f64, sigma_turning: f64) -> IndexReport {
    IndexReport::from_raw((turning - sigma_turning) / std::f64::consts::TAU + 0.5)
}

pub fn index<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
    lift: BoundaryLift<T>,
) -> Result<IndexReport> {
    if !(lift.b > lift.a) {
        return Err(FlowError::InvalidInput("lift requires b > a".into()));
    }
    Ok(index_from_turning(
        curve.total_turning().to_f64_lossy(),
        sigma.arc_turning(lift.a, lift.b).to_f64_lossy(),
    ))
}

/// Backward heat kernel centered at `x0 in Sigma` with singular time
/// `t_probe`, and the running weight `exp(-1/2 int_0^t kappa_bar^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityProbe {
    pub x0: [f64; 2],
    pub t_probe: f64,
    pub f_accumulator: f64,
}

impl DensityProbe {
    pub fn new(x0: [f64; 2], t_probe: f64) -> Self {
        Self {
            x0,
            t_probe,
            f_accumulator: 1.0,
        }
    }

    pub fn on_support<T: Scalar>(sigma: &SupportCurve<T>, s: f64, t_probe: f64) -> Self {
        let p = sigma.point(T::lit(s));
        Self::new([p.x.to_f64_lossy(), p.y.to_f64_lossy()], t_probe)
    }

    /// `rho(x, t) = (4 pi (T - t))^(-1/2) exp(-|x - x0|^2 / (4 (T - t)))`.
    pub fn kernel(&self, x: [f64; 2], t: f64) -> f64 {
        let tau = self.t_probe - t;
        let d2 = (x[0] - self.x0[0]).powi(2) + (x[1] - self.x0[1]).powi(2);
        (-d2 / (4.0 * tau)).exp() / (4.0 * std::f64::consts::PI * tau).sqrt()
    }
}

/// Closed form of the weight for a constant average curvature.
pub fn constant_weight(kappa_bar: f64, t: f64) -> f64 {
    (-0.5 * kappa_bar * kappa_bar * t).exp()
}

/// `f(t) sum_i rho(x_i, t) w_i`.
pub fn gaussian_density<T: Scalar>(
    curve: &DiscreteCurve<T>,
    probe: &DensityProbe,
    t: f64,
) -> Result<f64> {
    if !(t < probe.t_probe) {
        return Err(FlowError::Domain(format!(
            "density needs t < T_probe, got t = {t}, T_probe = {}",
            probe.t_probe
        )));
    }
    let w = curve.arclength_weights();
    let sum: f64 = curve
        .nodes()
        .iter()
        .zip(w)
        .map(|(p, w)| probe.kernel([p.x.to_f64_lossy(), p.y.to_f64_lossy()], t) * w.to_f64_lossy())
        .sum();
    Ok(probe.f_accumulator * sum)
}

/// Tolerance on the sine of the turning angle between consecutive edges.
const CONVEX_EPS: f64 = 1e-9;
/// Upper bound on the two corner angles where the chord meets the curve.
const JUNCTION_MAX: f64 = std::f64::consts::FRAC_PI_2 + 0.05;

/// Whether the polygon formed by the nodes and the chord from the last node
/// back to the first is convex.
pub fn chord_region_convex<T: Scalar>(curve: &DiscreteCurve<T>) -> bool {
    let nodes = curve.nodes();
    let n = nodes.len();
    if n < 3 {
        return true;
    }
    // edges of the closed polygon: curve segments, then the chord
    let edge = |i: usize| nodes[(i + 1) % n] - nodes[i];
    let m = n;
    let angles: Vec<f64> = (0..m)
        .map(|i| exterior_angle(edge(i), edge((i + 1) % m)).to_f64_lossy())
        .collect();
    let total: f64 = angles.iter().sum();
    let sign = if total >= 0.0 { 1.0 } else { -1.0 };
    let sines_ok = (0..m).all(|i| {
        let (u, v) = (edge(i), edge((i + 1) % m));
        let s = u.cross(v) / (u.norm() * v.norm());
        sign * s.to_f64_lossy() >= -CONVEX_EPS
    });
    // corner at the last node (segment -> chord) and at the first (chord -> segment)
    let junctions = [angles[n - 2], angles[n - 1]];
    let junctions_ok = junctions
        .iter()
        .all(|&a| sign * a >= -CONVEX_EPS && sign * a <= JUNCTION_MAX);
    sines_ok && junctions_ok && sign * total <= std::f64::consts::TAU + 1e-9
}

/// Angles in degrees between the endpoint tangents and the support tangent;
/// right-angle contact gives 90.
pub fn contact_angles<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
    lift: BoundaryLift<T>,
) -> (f64, f64) {
    let angle = |end: End, s: T| {
        let t = curve.endpoint_frame(end).tangent;
        let st = sigma.eval(s).tangent;
        t.dot(st)
            .abs()
            .min(T::one())
            .acos()
            .to_f64_lossy()
            .to_degrees()
    };
    (angle(End::Start, lift.a), angle(End::Finish, lift.b))
}

/// Reference values from the initial datum, used for the window checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordContext {
    pub length_0: f64,
    pub area_0: f64,
    pub diameter: f64,
    pub mode: FlowMode,
    /// Window flags only apply to area-preserving runs attached to `Sigma`.
    pub windows_apply: bool,
}

impl RecordContext {
    pub fn from_initial<T: Scalar>(
        state: &FlowState<T>,
        sigma: &SupportCurve<T>,
        mode: FlowMode,
    ) -> Result<Self> {
        let area_0 = slice_area(state, sigma)?;
        Ok(Self {
            length_0: state.curve.length().to_f64_lossy(),
            area_0,
            diameter: sigma.diameter().to_f64_lossy(),
            mode,
            windows_apply: mode == FlowMode::AreaPreserving && state.lift().is_some(),
        })
    }

    /// `[pi / L0, (L0 + 2 diam) pi / (2 A0)]`.
    pub fn kappa_bar_window(&self) -> (f64, f64) {
        let pi = std::f64::consts::PI;
        (
            pi / self.length_0,
            (self.length_0 + 2.0 * self.diameter) * pi / (2.0 * self.area_0),
        )
    }

    /// `4 A0 / (L0 + 2 diam)`.
    pub fn length_lower_bound(&self) -> f64 {
        4.0 * self.area_0 / (self.length_0 + 2.0 * self.diameter)
    }
}

/// Area of a slice: enclosed area for support runs, shoelace otherwise.
pub fn slice_area<T: Scalar>(state: &FlowState<T>, sigma: &SupportCurve<T>) -> Result<f64> {
    Ok(match state.lift() {
        Some(lift) => enclosed_area(&state.curve, sigma, lift)?.to_f64_lossy(),
        None => state.curve.shoelace().to_f64_lossy(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFlags {
    pub embedded: bool,
    pub chord_region_convex: bool,
    /// `None` when the window does not apply to the run.
    pub contained_in_d: Option<bool>,
    pub kappa_bar_in_window: Option<bool>,
    pub turning_in_window: Option<bool>,
    pub length_above_bound: Option<bool>,
    pub index_consistent: bool,
}

impl RecordFlags {
    pub fn all_ok(&self) -> bool {
        let opt = |f: Option<bool>| f.unwrap_or(true);
        self.embedded
            && self.chord_region_convex
            && self.index_consistent
            && opt(self.contained_in_d)
            && opt(self.kappa_bar_in_window)
            && opt(self.turning_in_window)
            && opt(self.length_above_bound)
    }

    /// Names of the failed checks.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut push = |ok: bool, name| {
            if !ok {
                v.push(name)
            }
        };
        push(self.embedded, "embedded");
        push(self.chord_region_convex, "chord_region_convex");
        push(self.index_consistent, "index_consistent");
        push(self.contained_in_d.unwrap_or(true), "contained_in_d");
        push(
            self.kappa_bar_in_window.unwrap_or(true),
            "kappa_bar_in_window",
        );
        push(self.turning_in_window.unwrap_or(true), "turning_in_window");
        push(
            self.length_above_bound.unwrap_or(true),
            "length_above_bound",
        );
        v
    }
}

/// One time slice of every monitored quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub length: f64,
    pub area: f64,
    pub kappa_bar: f64,
    pub turning: f64,
    pub index: i64,
    pub index_raw: f64,
    pub min_kappa: f64,
    pub max_kappa: f64,
    pub residual_l2: f64,
    /// Density of the first probe, zero without probes.
    pub density: f64,
    pub densities: Vec<f64>,
    /// Largest distance of a node from `Sigma`, for support runs.
    pub max_support_distance: Option<f64>,
    pub flags: RecordFlags,
}

impl DiagnosticsRecord {
    /// Fixed column order of the diagnostics CSV.
    pub const CSV_HEADER: [&'static str; 10] = [
        "t",
        "length",
        "area",
        "kappa_bar",
        "turning",
        "min_kappa",
        "max_kappa",
        "index",
        "residual_l2",
        "density",
    ];

    pub fn csv_row(&self) -> [String; 10] {
        let f = |v: f64| format!("{v:.17e}");
        [
            f(self.t),
            f(self.length),
            f(self.area),
            f(self.kappa_bar),
            f(self.turning),
            f(self.min_kappa),
            f(self.max_kappa),
            self.index.to_string(),
            f(self.residual_l2),
            f(self.density),
        ]
    }
}

/// Builds the record of one slice; `m` must be the measure of `state`.
pub fn assemble_record<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    m: &Measure<T>,
    probes: &[DensityProbe],
    ctx: &RecordContext,
) -> DiagnosticsRecord {
    let curve = &state.curve;
    let t = state.t.to_f64_lossy();
    let turning = curve.total_turning().to_f64_lossy();
    let area = slice_area(state, sigma).unwrap_or(f64::NAN);
    let index = match state.boundary {
        Boundary::Support { a, b } => index(curve, sigma, BoundaryLift::new(a, b))
            .unwrap_or_else(|_| IndexReport::from_raw(f64::NAN)),
        Boundary::Closed => IndexReport::from_raw(turning / std::f64::consts::TAU),
        Boundary::Driven { .. } => IndexReport::from_raw(turning / std::f64::consts::TAU + 0.5),
    };
    let densities: Vec<f64> = probes
        .iter()
        .map(|p| gaussian_density(curve, p, t).unwrap_or(f64::NAN))
        .collect();
    let length = m.length.to_f64_lossy();
    let kappa_bar = m.kappa_bar.to_f64_lossy();
    let h = curve.max_segment().to_f64_lossy();
    let max_support_distance = state.lift().map(|_| {
        curve
            .nodes()
            .iter()
            .map(|&p| sigma.signed_distance(p).to_f64_lossy())
            .fold(0.0, f64::max)
    });
    let windows = ctx.windows_apply.then_some(());
    let (kb_lo, kb_hi) = ctx.kappa_bar_window();
    let flags = RecordFlags {
        embedded: !curve.self_intersects(),
        chord_region_convex: curve.is_closed() || chord_region_convex(curve),
        contained_in_d: windows
            .map(|_| max_support_distance.unwrap_or(0.0) <= ctx.length_0 / 2.0 + h),
        kappa_bar_in_window: windows.map(|_| {
            kappa_bar >= kb_lo * (1.0 - WINDOW_SLACK) && kappa_bar <= kb_hi * (1.0 + WINDOW_SLACK)
        }),
        turning_in_window: windows.map(|_| {
            (std::f64::consts::PI - TURNING_SLACK..std::f64::consts::TAU).contains(&turning)
        }),
        length_above_bound: windows
            .map(|_| length >= ctx.length_lower_bound() * (1.0 - WINDOW_SLACK)),
        index_consistent: !index.warning,
    };
    DiagnosticsRecord {
        t,
        step: state.step_index,
        length,
        area,
        kappa_bar,
        turning,
        index: index.value,
        index_raw: index.raw,
        min_kappa: m.samples.min().to_f64_lossy(),
        max_kappa: m.samples.max().to_f64_lossy(),
        residual_l2: m.residual.to_f64_lossy(),
        density: densities.first().copied().unwrap_or(0.0),
        densities,
        max_support_distance,
        flags,
    }
}

/// Convenience wrapper measuring the slice first.
pub fn record_for<T: Scalar>(
    state: &FlowState<T>,
    sigma: &SupportCurve<T>,
    probes: &[DensityProbe],
    ctx: &RecordContext,
) -> DiagnosticsRecord {
    let m = measure(state, sigma, ctx.mode);
    assemble_record(state, sigma, &m, probes, ctx)
}

/// Admissibility of an initial curve for the convergence theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub kappa_positive: bool,
    pub embedded: bool,
    pub outside_support: bool,
    pub length_below_width: bool,
    pub length_below_curvature_scale: bool,
    pub length_below_c: bool,
    pub isoperimetric_ratio_ok: bool,
    pub length_0: f64,
    pub area_0: f64,
    /// `A0 / L0^2`.
    pub c_i: f64,
    /// `4 / (5 kappa_max) arcsin(A0 / L0^2)`.
    pub c: f64,
    pub sigma_d: f64,
    pub kappa_max: f64,
    pub min_kappa: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.kappa_positive
            && self.embedded
            && self.outside_support
            && self.length_below_width
            && self.length_below_curvature_scale
            && self.length_below_c
            && self.isoperimetric_ratio_ok
    }
}

/// Relative tolerance for "outside `Sigma`" on `<node - projection, Sigma nu>`.
const OUTSIDE_TOL: f64 = 1e-9;

pub fn check_admissibility<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
) -> Result<AdmissibilityReport> {
    if curve.is_closed() {
        return Err(FlowError::InvalidInput(
            "admissibility needs an open curve".into(),
        ));
    }
    let lift = crate::initial::lift_from_endpoints(curve, sigma)?;
    let state = FlowState::new(curve.clone(), Boundary::on_support(lift));
    let samples = crate::flow::flow_curvature(&state, sigma);
    let min_kappa = samples.min().to_f64_lossy();
    let length_0 = curve.length().to_f64_lossy();
    let area_0 = enclosed_area(curve, sigma, lift)?.to_f64_lossy();
    let metrics = sigma.metrics();
    let kappa_max = metrics.kappa_max.to_f64_lossy();
    let sigma_d = metrics.sigma_d.to_f64_lossy();
    let c_i = area_0 / (length_0 * length_0);
    let c = if (-1.0..=1.0).contains(&c_i) {
        4.0 / (5.0 * kappa_max) * c_i.asin()
    } else {
        f64::NAN
    };
    let tol = T::tolerance(OUTSIDE_TOL) * (T::one() + sigma.diameter());
    let outside_support = curve.nodes().iter().all(|&p| {
        let (s, off) = sigma.nearest(p);
        off.dot(sigma.eval(s).normal) <= tol
    });
    Ok(AdmissibilityReport {
        kappa_positive: min_kappa > 0.0,
        embedded: !curve.self_intersects(),
        outside_support,
        length_below_width: length_0 < sigma_d,
        length_below_curvature_scale: length_0 < 1.0 / (2.0 * kappa_max),
        length_below_c: length_0 < c,
        isoperimetric_ratio_ok: c_i <= 1.0 / std::f64::consts::TAU + 1e-9,
        length_0,
        area_0,
        c_i,
        c,
        sigma_d,
        kappa_max,
        min_kappa,
    })
}
