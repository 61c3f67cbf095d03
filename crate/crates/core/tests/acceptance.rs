//! Acceptance criteria 1-9. Each test prints one `criterion N ... PASS|FAIL`
//! line and then asserts.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use arcflow::diagnostics::{contact_angles, enclosed_area};
use arcflow::flow::{advance, flow_curvature, measure, time_step};
use arcflow::*;

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, ok: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        ok,
        detail: detail.into(),
    }
}

fn verdict(id: u32, title: &str, checks: &[Check]) {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.ok)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    let status = if failed.is_empty() { "PASS" } else { "FAIL" };
    let summary: Vec<String> = checks
        .iter()
        .map(|c| format!("{}={}", c.name, c.detail))
        .collect();
    // written past the harness capture so the verdict shows in every run
    let _ = writeln!(
        std::io::stdout().lock(),
        "criterion {id} [{title}]: {status} | {}",
        summary.join("; ")
    );
    assert!(
        failed.is_empty(),
        "criterion {id} failed: {}",
        failed.join(", ")
    );
}

fn unit_sigma() -> Support64 {
    Support64::circle(1.0).unwrap()
}

const RUN2_RHO: f64 = 0.03;
const RUN2_AMPLITUDE: f64 = 0.05;
const RUN2_FREQUENCY: u32 = 3;
const RUN2_SEED: u64 = 7;
const RUN2_SKEW: f64 = 0.2;

fn run2_spec() -> InitialSpec {
    InitialSpec::PerturbedArc {
        rho: RUN2_RHO,
        center_angle: 0.0,
        amplitude: RUN2_AMPLITUDE,
        frequency: RUN2_FREQUENCY,
        seed: RUN2_SEED,
        skew: RUN2_SKEW,
    }
}

fn run2_config(n: usize) -> FlowConfig {
    FlowConfig {
        n_nodes: n,
        stop_tolerance: 1e-8,
        ..FlowConfig::default()
    }
}

/// Per-step log of run 2, taken before each step.
#[derive(Clone, Copy)]
struct StepLog {
    t: f64,
    length: f64,
    residual: f64,
    kappa_bar: f64,
    kappa_a: f64,
    kappa_b: f64,
    /// Parameters of the projections of the end nodes onto `Sigma`.
    proj_a: f64,
    proj_b: f64,
}

struct Run2 {
    initial: State64,
    trajectory: Trajectory64,
    steps: Vec<StepLog>,
    elapsed: Duration,
}

/// Representative of `s` mod `2 pi` closest to `near`.
fn unwrap_near(s: f64, near: f64) -> f64 {
    s - ((s - near) / TAU).round() * TAU
}

fn run2() -> &'static Run2 {
    static RUN: OnceLock<Run2> = OnceLock::new();
    RUN.get_or_init(|| {
        let sigma = unit_sigma();
        let initial: State64 = run2_spec().build(&sigma, 200).unwrap();
        let options = RunOptions {
            sample_interval: 1e-5,
            ..RunOptions::default()
        };
        let mut steps = Vec::new();
        let start = Instant::now();
        let trajectory = run_observed(
            initial.clone(),
            &sigma,
            &run2_config(200),
            FlowMode::AreaPreserving,
            &options,
            |v| {
                let lift = v.state.lift().unwrap();
                let n = v.state.curve.len();
                steps.push(StepLog {
                    t: v.state.t,
                    length: v.measure.length,
                    residual: v.measure.residual,
                    kappa_bar: v.measure.kappa_bar,
                    kappa_a: v.measure.samples.values[0],
                    kappa_b: v.measure.samples.values[n - 1],
                    proj_a: unwrap_near(sigma.nearest(v.state.curve.first()).0, lift.a),
                    proj_b: unwrap_near(sigma.nearest(v.state.curve.last()).0, lift.b),
                });
            },
        )
        .unwrap();
        Run2 {
            initial,
            trajectory,
            steps,
            elapsed: start.elapsed(),
        }
    })
}

struct CircleRun {
    trajectory: Trajectory64,
    elapsed: Duration,
}

/// Closed unit circle under curve shortening, run until the curvature
/// reaches `1e3`.
fn circle_blowup() -> &'static CircleRun {
    static RUN: OnceLock<CircleRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let sigma = unit_sigma();
        let initial: State64 = InitialSpec::Circle {
            radius: 1.0,
            center: [0.0, 0.0],
        }
        .build(&sigma, 256)
        .unwrap();
        let config = FlowConfig {
            n_nodes: 256,
            t_end: 1.0,
            max_kappa_abort: 1e3,
            ..FlowConfig::default()
        };
        let start = Instant::now();
        let trajectory = run(
            initial,
            &sigma,
            &config,
            FlowMode::Csf,
            &RunOptions::default(),
        )
        .unwrap();
        CircleRun {
            trajectory,
            elapsed: start.elapsed(),
        }
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.3e}")
}

#[test]
fn criterion_1_stationary_fixed_point() {
    let sigma = unit_sigma();
    let initial: State64 = InitialSpec::OrthogonalArc {
        rho: 1.0,
        center_angle: 0.0,
    }
    .build(&sigma, 200)
    .unwrap();
    let a0 = enclosed_area(&initial.curve, &sigma, initial.lift().unwrap()).unwrap();
    let config = FlowConfig {
        n_nodes: 200,
        t_end: 1e6,
        stop_tolerance: f64::MIN_POSITIVE,
        max_steps: Some(10_000),
        ..FlowConfig::default()
    };
    let start = Instant::now();
    let tr = run(
        initial.clone(),
        &sigma,
        &config,
        FlowMode::AreaPreserving,
        &RunOptions::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let last = &tr.final_state;
    let drift = last.curve.hausdorff(&initial.curve);
    let area = enclosed_area(&last.curve, &sigma, last.lift().unwrap()).unwrap();
    let residual = measure(last, &sigma, FlowMode::AreaPreserving).residual;
    verdict(
        1,
        "stationary arc",
        &[
            check(
                "steps",
                last.step_index == 10_000,
                last.step_index.to_string(),
            ),
            check("hausdorff<=1e-3", drift <= 1e-3, fmt(drift)),
            check(
                "area_drift<=1e-4*A0",
                (area - a0).abs() <= 1e-4 * a0,
                fmt((area - a0).abs() / a0),
            ),
            check("residual<=1e-6", residual <= 1e-6, fmt(residual)),
            check(
                "runtime<10s",
                elapsed < Duration::from_secs(10),
                format!("{elapsed:.2?}"),
            ),
        ],
    );
}

#[test]
fn criterion_2_main_theorem_convergence() {
    let sigma = unit_sigma();
    let r = run2();
    let last = &r.trajectory.final_state;
    let lift = last.lift().unwrap();
    let kappa = flow_curvature(last, &sigma);
    let kb = flow::kappa_bar(&kappa);
    let spread = kappa
        .values
        .iter()
        .map(|k| (k - kb).abs())
        .fold(0.0, f64::max)
        / kb;
    let fit = fit_circular_arc(&last.curve);
    let (ca, cb) = contact_angles(&last.curve, &sigma, lift);
    let a0 = enclosed_area(&r.initial.curve, &sigma, r.initial.lift().unwrap()).unwrap();
    let a1 = enclosed_area(&last.curve, &sigma, lift).unwrap();
    let turning = last.curve.total_turning();
    verdict(
        2,
        "main-theorem convergence",
        &[
            check(
                "converged",
                r.trajectory.termination == Termination::Converged,
                r.trajectory.termination.label(),
            ),
            check("max|k-kbar|/kbar<1e-2", spread < 1e-2, fmt(spread)),
            check(
                "fit_rms<1e-2*r",
                !fit.is_line && fit.rms < 1e-2 * fit.radius,
                fmt(fit.rms / fit.radius),
            ),
            check(
                "contact_within_1deg",
                (ca - 90.0).abs() <= 1.0 && (cb - 90.0).abs() <= 1.0,
                format!("{ca:.4},{cb:.4}"),
            ),
            check(
                "area<=5e-3*A0",
                (a1 - a0).abs() <= 5e-3 * a0,
                fmt((a1 - a0).abs() / a0),
            ),
            check(
                "turning_in_[pi,2pi)",
                (PI..TAU).contains(&turning),
                format!("{turning:.6}"),
            ),
            check(
                "runtime<60s",
                r.elapsed < Duration::from_secs(60),
                format!("{:.2?}", r.elapsed),
            ),
        ],
    );
}

/// Windows of `WINDOW` steps over which the length or lift changes by more
/// than the floating-point floor.
const WINDOW: usize = 100;

#[test]
fn criterion_3_conservation_suite() {
    let r = run2();
    let steps = &r.steps;
    let l0 = steps[0].length;
    let worst_increase = steps
        .windows(2)
        .map(|w| w[1].length - w[0].length)
        .fold(f64::NEG_INFINITY, f64::max);
    // dL/dt against -int (kappa - kappa_bar)^2 ds, both averaged per window
    let mut worst_rate = 0.0f64;
    let mut windows = 0usize;
    for k in (0..steps.len().saturating_sub(WINDOW)).step_by(WINDOW) {
        let w = &steps[k..=k + WINDOW];
        let dl = w[WINDOW].length - w[0].length;
        if dl.abs() <= 1e-9 * l0 {
            continue;
        }
        let dt = w[WINDOW].t - w[0].t;
        let integral: f64 = w
            .windows(2)
            .map(|p| 0.5 * (p[0].residual + p[1].residual) * (p[1].t - p[0].t))
            .sum();
        worst_rate = worst_rate.max(((dl / dt) + integral / dt).abs() / (integral / dt));
        windows += 1;
    }
    let recs = &r.trajectory.records;
    let all = |f: &dyn Fn(&DiagnosticsRecord) -> bool| recs.iter().all(f);
    let index_drift = recs
        .iter()
        .map(|x| (x.index_raw - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        3,
        "conservation and monotonicity",
        &[
            check(
                "length_nonincreasing",
                worst_increase <= 1e-9 * l0,
                fmt(worst_increase / l0),
            ),
            check(
                "dL/dt_within_5%",
                windows > 0 && worst_rate <= 0.05,
                format!("{} over {windows} windows", fmt(worst_rate)),
            ),
            check(
                "kappa_bar_window",
                all(&|x| x.flags.kappa_bar_in_window == Some(true)),
                format!("{} records", recs.len()),
            ),
            check(
                "contained_in_D",
                all(&|x| x.flags.contained_in_d == Some(true)),
                fmt(recs
                    .iter()
                    .filter_map(|x| x.max_support_distance)
                    .fold(0.0, f64::max)),
            ),
            check(
                "index==1",
                all(&|x| x.index == 1) && index_drift < 0.1,
                fmt(index_drift),
            ),
            check(
                "chord_region_convex",
                all(&|x| x.flags.chord_region_convex),
                "",
            ),
        ],
    );
}

#[test]
fn criterion_4_monotonicity_formula() {
    let sigma = unit_sigma();
    let r = run2();
    let t_conv = r.trajectory.final_state.t;
    let lift = r.initial.lift().unwrap();
    let options = RunOptions {
        sample_interval: 1e-5,
        probes: vec![
            ProbeSpec {
                x0_param: lift.a,
                t_probe: 2.0 * t_conv,
            },
            ProbeSpec {
                x0_param: lift.b,
                t_probe: 2.0 * t_conv,
            },
        ],
        ..RunOptions::default()
    };
    let start = Instant::now();
    let tr = run(
        r.initial.clone(),
        &sigma,
        &run2_config(200),
        FlowMode::AreaPreserving,
        &options,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let mut checks = Vec::new();
    for (p, name) in [
        (0usize, "probe_a_nonincreasing"),
        (1, "probe_b_nonincreasing"),
    ] {
        let d: Vec<f64> = tr.records.iter().map(|x| x.densities[p]).collect();
        let rise = d
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(check(
            name,
            d.iter().all(|v| v.is_finite()) && rise <= 1e-4,
            format!("max rise {} over {} samples", fmt(rise), d.len()),
        ));
    }
    checks.push(check("runtime", true, format!("{elapsed:.2?}")));
    verdict(4, "monotonicity formula", &checks);
}

/// `x` where the polyline crosses `y = 0`.
fn vertex_x(curve: &Curve64) -> f64 {
    for w in curve.nodes().windows(2) {
        if (w[0].y >= 0.0) != (w[1].y >= 0.0) {
            let s = w[0].y / (w[0].y - w[1].y);
            return w[0].x + s * (w[1].x - w[0].x);
        }
    }
    f64::NAN
}

#[test]
fn criterion_5_curve_shortening_oracles() {
    let sigma = unit_sigma();
    let start = Instant::now();
    // shrinking circle against R(t) = sqrt(1 - 2t)
    let circle: State64 = InitialSpec::Circle {
        radius: 1.0,
        center: [0.0, 0.0],
    }
    .build(&sigma, 256)
    .unwrap();
    let config = FlowConfig {
        n_nodes: 256,
        t_end: 0.3,
        ..FlowConfig::default()
    };
    let mut radius_err = 0.0f64;
    let tr = run_observed(
        circle,
        &sigma,
        &config,
        FlowMode::Csf,
        &RunOptions::default(),
        |v| {
            let nodes = v.state.curve.nodes();
            let mean = nodes.iter().map(|p| p.norm()).sum::<f64>() / nodes.len() as f64;
            radius_err = radius_err.max((mean - (1.0 - 2.0 * v.state.t).sqrt()).abs());
        },
    )
    .unwrap();
    let end = &tr.final_state;
    let mean = end.curve.nodes().iter().map(|p| p.norm()).sum::<f64>() / end.curve.len() as f64;
    radius_err = radius_err.max((mean - (1.0 - 2.0 * end.t).sqrt()).abs());

    // grim reaper translating with unit speed
    let reaper: State64 = InitialSpec::GrimReaper {
        tau: 0.0,
        y_min: -1.2,
        y_max: 1.2,
    }
    .build(&sigma, 200)
    .unwrap();
    let x0 = vertex_x(&reaper.curve);
    let config = FlowConfig {
        n_nodes: 200,
        t_end: 0.5,
        ..FlowConfig::default()
    };
    let moved = run(
        reaper,
        &sigma,
        &config,
        FlowMode::Csf,
        &RunOptions::default(),
    )
    .unwrap();
    let speed = (vertex_x(&moved.final_state.curve) - x0) / moved.final_state.t;

    // blow-up of the circle
    let blow = circle_blowup();
    let class = classify_singularity(&blow.trajectory.history, None);
    let sup = class.sup_product.unwrap_or(f64::NAN);
    let elapsed = start.elapsed();
    verdict(
        5,
        "curve shortening oracles",
        &[
            check(
                "circle_reached_t=0.3",
                tr.termination == Termination::TEnd && (end.t - 0.3).abs() < 1e-12,
                tr.termination.label(),
            ),
            check("circle_radius<=1e-3", radius_err <= 1e-3, fmt(radius_err)),
            check(
                "reaper_speed_1+-1e-2",
                moved.termination == Termination::TEnd && (speed - 1.0).abs() <= 1e-2,
                format!("{speed:.5}"),
            ),
            check(
                "type_I",
                class.kind == SingularityType::TypeI,
                format!("{:?}", class.kind),
            ),
            check(
                "sup_k2(T-t)=0.5+-0.05",
                (sup - 0.5).abs() <= 0.05,
                format!("{sup:.5}"),
            ),
            check(
                "runtime<30s",
                elapsed + blow.elapsed < Duration::from_secs(30),
                format!("{:.2?}", elapsed),
            ),
        ],
    );
}

#[test]
fn criterion_6_rescaling_lab() {
    let sigma = unit_sigma();
    let blow = circle_blowup();
    let tr = &blow.trajectory;
    let t_blow = estimate_blowup_time(&tr.history).unwrap();
    let ladder: Vec<usize> = (2..=10).map(|k| 1usize << k).collect();
    let frames = hamilton_rescale(&tr.snapshots, &sigma, t_blow, &ladder);
    let worst_past = frames.iter().map(|f| f.max_past_ratio).fold(0.0, f64::max);
    let worst_center = frames
        .iter()
        .map(|f| (f.center_kappa - 1.0).abs())
        .fold(0.0, f64::max);
    // parabolic frame of the last snapshot before the singular time
    let last = tr.snapshots.iter().rfind(|s| s.t < t_blow).unwrap();
    let frame = parabolic_rescale(&last.curve, last.curve.centroid(), last.t, t_blow).unwrap();
    let shrinker = self_shrinker_residual(&frame.curve, rescaling::PARABOLIC_TAU).unwrap();
    verdict(
        6,
        "rescaling lab",
        &[
            check(
                "frames",
                frames.len() == ladder.len(),
                frames.len().to_string(),
            ),
            check(
                "max|k~|<=1.05",
                worst_past <= 1.05,
                format!("{worst_past:.6}"),
            ),
            check("center_k~=1+-1e-3", worst_center <= 1e-3, fmt(worst_center)),
            check("shrinker_L2<=5e-2", shrinker.l2 <= 5e-2, fmt(shrinker.l2)),
        ],
    );
}

const REFINEMENT: [usize; 3] = [100, 200, 400];

/// `log2(e_n / e_2n)` for consecutive refinements.
fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Second arclength derivative of nodal values on a nonuniform polyline.
fn second_derivative(values: &[f64], seg: &[f64], i: usize) -> f64 {
    let (h0, h1) = (seg[i - 1], seg[i]);
    2.0 * (h0 * values[i + 1] - (h0 + h1) * values[i] + h1 * values[i - 1]) / (h0 * h1 * (h0 + h1))
}

/// Largest gap between the forward difference in time of the nodal
/// curvature over one step and `rhs(i, kappa, kappa_bar)` on `nodes`.
fn kappa_dot_gap(
    state: &State64,
    sigma: &Support64,
    nodes: std::ops::Range<usize>,
    rhs: impl Fn(usize, &[f64], f64) -> f64,
) -> f64 {
    let config = FlowConfig {
        n_nodes: state.curve.len(),
        resample_every: usize::MAX,
        ..FlowConfig::default()
    };
    let m0 = measure(state, sigma, FlowMode::AreaPreserving);
    let dt = time_step(&m0, &config);
    let next = advance(state, sigma, &config, &m0, dt).unwrap();
    let m1 = measure(&next, sigma, FlowMode::AreaPreserving);
    nodes
        .map(|i| {
            let lhs = (m1.samples.values[i] - m0.samples.values[i]) / dt;
            (lhs - rhs(i, &m0.samples.values, m0.kappa_bar)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_7_evolution_equation() {
    // closed ellipse, compared with the exact curvature profile
    let ellipse = Support64::ellipse(1.5, 1.0).unwrap();
    let total = ellipse.total_length();
    let mut ellipse_err = Vec::new();
    for &n in &REFINEMENT {
        let s: Vec<f64> = (0..n).map(|i| total * i as f64 / n as f64).collect();
        let curve = Curve64::new(s.iter().map(|&s| ellipse.point(s)).collect(), true).unwrap();
        let state = State64::new(curve, Boundary::Closed);
        let kbar = TAU / total;
        let d = 1e-3;
        let k = |s: f64| ellipse.eval(s).curvature;
        ellipse_err.push(kappa_dot_gap(&state, &ellipse, 0..n, |i, _, _| {
            let ks = k(s[i]);
            let kss = (k(s[i] + d) - 2.0 * ks + k(s[i] - d)) / (d * d);
            kss + ks * ks * (ks - kbar)
        }));
    }
    // early step of run 2, against the discrete right-hand side away from the ends
    let sigma = unit_sigma();
    let mut run2_err = Vec::new();
    for &n in &REFINEMENT {
        let state: State64 = run2_spec().build(&sigma, n).unwrap();
        let seg = state.curve.segment_lengths();
        let margin = n / 10;
        run2_err.push(kappa_dot_gap(
            &state,
            &sigma,
            margin..n - margin,
            |i, k, kbar| second_derivative(k, &seg, i) + k[i] * k[i] * (k[i] - kbar),
        ));
    }
    let eo = orders(&ellipse_err);
    let ro = orders(&run2_err);
    let show = |e: &[f64], o: &[f64]| {
        format!(
            "err {} order {}",
            e.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join("/"),
            o.iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>()
                .join("/")
        )
    };
    verdict(
        7,
        "evolution equation",
        &[
            check(
                "ellipse_order>=1",
                eo.iter().all(|&o| o >= 1.0),
                show(&ellipse_err, &eo),
            ),
            check(
                "run2_order>=1",
                ro.iter().all(|&o| o >= 1.0),
                show(&run2_err, &ro),
            ),
        ],
    );
}

/// Time at which the boundary formula is probed in run 2.
const BOUNDARY_PROBE_T: f64 = 2e-4;

#[test]
fn criterion_8_boundary_formulas() {
    let sigma = unit_sigma();
    let mut err_a = Vec::new();
    let mut err_b = Vec::new();
    for &n in &REFINEMENT {
        let initial: State64 = run2_spec().build(&sigma, n).unwrap();
        let config = FlowConfig {
            t_end: BOUNDARY_PROBE_T,
            ..run2_config(n)
        };
        let tr = run(
            initial,
            &sigma,
            &config,
            FlowMode::AreaPreserving,
            &RunOptions::default(),
        )
        .unwrap();
        let st = &tr.final_state;
        let k = flow_curvature(st, &sigma);
        let kb = flow::kappa_bar(&k);
        let seg = st.curve.segment_lengths();
        let lift = st.lift().unwrap();
        let last = n - 1;
        let ds_a = (k.values[1] - k.values[0]) / seg[0];
        let ds_b = (k.values[last] - k.values[last - 1]) / seg[last - 1];
        let sk_a = sigma.eval(lift.a).curvature;
        let sk_b = sigma.eval(lift.b).curvature;
        err_a.push((ds_a - (k.values[0] - kb) * sk_a).abs());
        err_b.push((ds_b + (k.values[last] - kb) * sk_b).abs());
    }
    let oa = orders(&err_a);
    let ob = orders(&err_b);

    // endpoint velocity of run 2 from projections, against kappa - kappa_bar
    let steps = &run2().steps;
    let mut worst = (0.0f64, 0.0f64);
    let mut windows = 0usize;
    for k in (0..steps.len().saturating_sub(WINDOW)).step_by(WINDOW) {
        let w = &steps[k..=k + WINDOW];
        let dt = w[WINDOW].t - w[0].t;
        let avg = |f: &dyn Fn(&StepLog) -> f64| {
            w.windows(2)
                .map(|p| 0.5 * (f(&p[0]) + f(&p[1])) * (p[1].t - p[0].t))
                .sum::<f64>()
                / dt
        };
        let va = avg(&|s| s.kappa_a - s.kappa_bar);
        let vb = avg(&|s| -(s.kappa_b - s.kappa_bar));
        if va.abs().min(vb.abs()) <= 1e-3 * w[0].kappa_bar {
            continue;
        }
        let ma = (w[WINDOW].proj_a - w[0].proj_a) / dt;
        let mb = (w[WINDOW].proj_b - w[0].proj_b) / dt;
        worst.0 = worst.0.max((ma - va).abs() / va.abs());
        worst.1 = worst.1.max((mb - vb).abs() / vb.abs());
        windows += 1;
    }
    let show = |e: &[f64], o: &[f64]| {
        format!(
            "err {} order {}",
            e.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join("/"),
            o.iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>()
                .join("/")
        )
    };
    verdict(
        8,
        "boundary formulas",
        &[
            check(
                "ds_kappa(a)_O(h)",
                oa.iter().all(|&o| o >= 0.9),
                show(&err_a, &oa),
            ),
            check(
                "ds_kappa(b)_O(h)",
                ob.iter().all(|&o| o >= 0.9),
                show(&err_b, &ob),
            ),
            check(
                "da/dt_within_5%",
                windows > 0 && worst.0 <= 0.05,
                format!("{} over {windows} windows", fmt(worst.0)),
            ),
            check(
                "db/dt_within_5%",
                windows > 0 && worst.1 <= 0.05,
                fmt(worst.1),
            ),
        ],
    );
}

/// Composite Simpson rule on `[0, 1]`.
fn simpson(f: impl Fn(f64) -> f64, intervals: usize) -> f64 {
    let h = 1.0 / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(0.0) + inner + f(1.0)) * h / 3.0
}

#[test]
fn criterion_9_admissibility_arithmetic() {
    let sigma = unit_sigma();
    let state: State64 = run2_spec().build(&sigma, 200).unwrap();
    let report = check_admissibility(&state.curve, &sigma).unwrap();

    // orthogonal circle about P = (d, 0), d^2 = 1 + rho^2, meeting the unit
    // circle at polar angles -atan(rho) and atan(rho)
    let rho = RUN2_RHO;
    let d = (1.0 + rho * rho).sqrt();
    let (a, b) = (-rho.atan(), rho.atan());
    let start = (a.sin()).atan2(a.cos() - d);
    let sweep = (b.sin()).atan2(b.cos() - d) - start;
    let phase =
        initial::RadialBump::from_seed(RUN2_AMPLITUDE, RUN2_FREQUENCY, RUN2_SKEW, RUN2_SEED)
            .unwrap()
            .phase;
    let m = RUN2_FREQUENCY as f64;
    let beta = RUN2_SKEW;
    let p = |u: f64| {
        let s = (m * PI * u).sin();
        s * s * (1.0 - beta + beta * (TAU * (u - phase)).cos())
    };
    let dp = |u: f64| {
        let s = (m * PI * u).sin();
        let c = (m * PI * u).cos();
        2.0 * s * c * m * PI * (1.0 - beta + beta * (TAU * (u - phase)).cos())
            - s * s * beta * TAU * (TAU * (u - phase)).sin()
    };
    let r = |u: f64| rho * (1.0 + RUN2_AMPLITUDE * p(u));
    let dr = |u: f64| rho * RUN2_AMPLITUDE * dp(u);
    let intervals = 200_000;
    let length = simpson(
        |u| (dr(u).powi(2) + (r(u) * sweep).powi(2)).sqrt(),
        intervals,
    );
    // 1/2 int x dy - y dx along X(u) = P + r(u) e(theta(u))
    let shoelace = simpson(
        |u| {
            let th = start + sweep * u;
            let (x, y) = (d + r(u) * th.cos(), r(u) * th.sin());
            let dx = dr(u) * th.cos() - r(u) * sweep * th.sin();
            let dy = dr(u) * th.sin() + r(u) * sweep * th.cos();
            0.5 * (x * dy - y * dx)
        },
        intervals,
    );
    let area = shoelace - 0.5 * (b - a);
    let c_i = area / (length * length);
    let c = 4.0 / 5.0 * c_i.asin();
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    verdict(
        9,
        "admissibility arithmetic",
        &[
            check(
                "L0_vs_oracle<=1e-4",
                rel(report.length_0, length) <= 1e-4,
                fmt(rel(report.length_0, length)),
            ),
            check(
                "A0_vs_oracle<=1e-4",
                rel(report.area_0, area) <= 1e-4,
                fmt(rel(report.area_0, area)),
            ),
            check(
                "C_vs_oracle<=1e-4",
                rel(report.c, c) <= 1e-4,
                format!("C={c:.6} rel {}", fmt(rel(report.c, c))),
            ),
            check(
                "L0<C",
                report.length_below_c && length < c,
                format!("L0={length:.6}"),
            ),
            check(
                "A0/L0^2<=1/(2pi)+1e-9",
                report.isoperimetric_ratio_ok && c_i <= 1.0 / TAU + 1e-9,
                format!("{c_i:.6}"),
            ),
            check("admissible", report.admissible(), ""),
        ],
    );
}
