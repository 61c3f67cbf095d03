//! Initial curves: arcs meeting the support curve orthogonally, their seeded
//! radial perturbations, explicit node lists and the closed or translating
//! reference shapes used by the curve shortening oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{FlowError, Result};
use crate::flow::{Boundary, FlowState};
use crate::point::PlanarPoint;
use crate::rescaling::grim_reaper;
use crate::scalar::Scalar;
use crate::support::{BoundaryLift, SupportCurve};

/// Initial-curve description as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialSpec {
    /// Circular arc of radius `rho` meeting `Sigma` at right angles, centered
    /// in direction `center_angle` from the support's center.
    OrthogonalArc {
        rho: f64,
        #[serde(default)]
        center_angle: f64,
    },
    /// Orthogonal arc with radius `rho (1 + amplitude p(u))`, where `p`
    /// vanishes to second order at both ends, oscillates `frequency` times
    /// and carries a phase drawn from `seed`.
    PerturbedArc {
        rho: f64,
        #[serde(default)]
        center_angle: f64,
        amplitude: f64,
        frequency: u32,
        seed: u64,
        #[serde(default = "default_skew")]
        skew: f64,
    },
    /// Explicit nodes; open curves must start and end on `Sigma`.
    Nodes {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        closed: bool,
    },
    /// Closed circle, for the curve shortening oracles.
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Grim reaper window whose ends translate with unit speed in `+x`.
    GrimReaper {
        #[serde(default)]
        tau: f64,
        y_min: f64,
        y_max: f64,
    },
}

fn default_skew() -> f64 {
    0.2
}

impl InitialSpec {
    /// Whether the datum attaches to `Sigma`.
    pub fn uses_support(&self) -> bool {
        match self {
            Self::OrthogonalArc { .. } | Self::PerturbedArc { .. } => true,
            Self::Nodes { closed, .. } => !closed,
            Self::Circle { .. } | Self::GrimReaper { .. } => false,
        }
    }

    /// Builds the flow state at `t = 0` with `n` nodes (explicit node lists
    /// keep their own count).
    pub fn build<T: Scalar>(&self, sigma: &SupportCurve<T>, n: usize) -> Result<FlowState<T>> {
        match self {
            Self::OrthogonalArc { rho, center_angle } => {
                let arc = OrthogonalArc::solve(sigma, T::lit(*rho), T::lit(*center_angle))?;
                Ok(FlowState::new(
                    arc.sample(n)?,
                    Boundary::on_support(arc.lift),
                ))
            }
            Self::PerturbedArc {
                rho,
                center_angle,
                amplitude,
                frequency,
                seed,
                skew,
            } => {
                let arc = OrthogonalArc::solve(sigma, T::lit(*rho), T::lit(*center_angle))?;
                let bump = RadialBump::from_seed(*amplitude, *frequency, *skew, *seed)?;
                Ok(FlowState::new(
                    arc.sample_perturbed(n, &bump)?,
                    Boundary::on_support(arc.lift),
                ))
            }
            Self::Nodes { points, closed } => {
                let nodes = points
                    .iter()
                    .map(|p| PlanarPoint::new(T::lit(p[0]), T::lit(p[1])))
                    .collect();
                let curve = DiscreteCurve::new(nodes, *closed)?;
                if *closed {
                    return Ok(FlowState::new(curve, Boundary::Closed));
                }
                let lift = lift_from_endpoints(&curve, sigma)?;
                Ok(FlowState::new(curve, Boundary::on_support(lift)))
            }
            Self::Circle { radius, center } => {
                if !(*radius > 0.0) {
                    return Err(FlowError::InvalidInput(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
                let c = PlanarPoint::new(T::lit(center[0]), T::lit(center[1]));
                Ok(FlowState::new(
                    closed_circle(c, T::lit(*radius), n)?,
                    Boundary::Closed,
                ))
            }
            Self::GrimReaper { tau, y_min, y_max } => {
                let curve = grim_reaper(T::lit(*tau), (T::lit(*y_min), T::lit(*y_max)), n)?;
                Ok(FlowState::new(
                    curve,
                    Boundary::Driven {
                        velocity: PlanarPoint::new(T::one(), T::zero()),
                    },
                ))
            }
        }
    }
}

/// Positively oriented circle sampled at `n` equally spaced nodes.
pub fn closed_circle<T: Scalar>(
    center: PlanarPoint<T>,
    radius: T,
    n: usize,
) -> Result<DiscreteCurve<T>> {
    let nodes = (0..n)
        .map(|i| {
            let th = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            center + PlanarPoint::polar(th) * radius
        })
        .collect();
    DiscreteCurve::new(nodes, true)
}

/// Lift of an open curve whose endpoints lie on `Sigma`.
pub fn lift_from_endpoints<T: Scalar>(
    curve: &DiscreteCurve<T>,
    sigma: &SupportCurve<T>,
) -> Result<BoundaryLift<T>> {
    let tol = T::lit(1e-6) * sigma.diameter();
    let mut params = [T::zero(); 2];
    for (slot, (name, p)) in params
        .iter_mut()
        .zip([("first", curve.first()), ("last", curve.last())])
    {
        let (s, off) = sigma.nearest(p);
        if off.norm() > tol {
            return Err(FlowError::InvalidInput(format!(
                "{name} node is {} away from the support curve",
                off.norm()
            )));
        }
        *slot = s;
    }
    let l = sigma.total_length();
    let mut span = (params[1] - params[0]) % l;
    if span <= T::zero() {
        span = span + l;
    }
    Ok(BoundaryLift::new(params[0], params[0] + span).normalized(l))
}

/// A circle of radius `rho` cutting `Sigma` orthogonally at `Sigma f(a)` and
/// `Sigma f(b)`; the initial curve is its arc outside `Sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalArc<T> {
    pub center: PlanarPoint<T>,
    pub rho: T,
    pub lift: BoundaryLift<T>,
    /// Polar angle (about `center`) of the first endpoint.
    pub start_angle: T,
    /// Angle swept counter-clockwise from the first to the last endpoint.
    pub sweep: T,
}

impl<T: Scalar> OrthogonalArc<T> {
    /// Orthogonality at `a` means `P = Sigma f(a) + rho Sigma tau(a)`, and at
    /// `b` it means `P = Sigma f(b) - rho Sigma tau(b)`. Both are solved on
    /// the ray from the support's center, then jointly by Newton.
    pub fn solve(sigma: &SupportCurve<T>, rho: T, center_angle: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(FlowError::InvalidInput(format!(
                "rho must be positive, got {rho}"
            )));
        }
        let origin = sigma.center_point();
        let dir = PlanarPoint::polar(center_angle);
        let plus = |s: T| {
            let f = sigma.eval(s);
            f.point + f.tangent * rho
        };
        let minus = |s: T| {
            let f = sigma.eval(s);
            f.point - f.tangent * rho
        };
        let a0 = ray_root(sigma, origin, dir, &plus)?;
        let b0 = ray_root(sigma, origin, dir, &minus)?;
        let (mut a, mut b) = (a0, b0);
        for _ in 0..50 {
            let fa = sigma.eval(a);
            let fb = sigma.eval(b);
            let r = (fa.point + fa.tangent * rho) - (fb.point - fb.tangent * rho);
            // on a circle the solutions form a family and the Jacobian is
            // singular; stop before stepping along it
            if r.norm() <= T::epsilon() * T::lit(16.0) * (T::one() + sigma.diameter()) {
                break;
            }
            let da = fa.tangent + fa.normal * (rho * fa.curvature);
            let db = -(fb.tangent - fb.normal * (rho * fb.curvature));
            let det = da.cross(db);
            if det.abs() <= T::epsilon() {
                break;
            }
            // solve [da db] (x, y) = -r
            let x = -r.cross(db) / det;
            let y = -da.cross(r) / det;
            a = a + x;
            b = b + y;
            if x.abs().max(y.abs()) <= T::epsilon() * (T::one() + sigma.total_length()) {
                break;
            }
        }
        let fa = sigma.eval(a);
        let fb = sigma.eval(b);
        let center = fa.point + fa.tangent * rho;
        let mismatch = center.dist(fb.point - fb.tangent * rho);
        if !(mismatch <= T::tolerance(1e-9) * (T::one() + sigma.diameter())) {
            return Err(FlowError::InvalidInput(format!(
                "no orthogonal circle of radius {rho} found in direction {center_angle}"
            )));
        }
        let l = sigma.total_length();
        let mut span = (b - a) % l;
        if span <= T::zero() {
            span = span + l;
        }
        let start_angle = (fa.point - center).angle();
        let mut sweep = ((fb.point - center).angle() - start_angle) % T::TAU();
        if sweep <= T::zero() {
            sweep = sweep + T::TAU();
        }
        Ok(Self {
            center,
            rho,
            lift: BoundaryLift::new(a, a + span).normalized(l),
            start_angle,
            sweep,
        })
    }

    pub fn length(&self) -> T {
        self.rho * self.sweep
    }

    pub fn sample(&self, n: usize) -> Result<DiscreteCurve<T>> {
        if n < 4 {
            return Err(FlowError::InvalidInput(format!(
                "need at least 4 nodes, got {n}"
            )));
        }
        let nodes = (0..n)
            .map(|i| {
                let u = T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
                self.center + PlanarPoint::polar(self.start_angle + self.sweep * u) * self.rho
            })
            .collect();
        DiscreteCurve::new(nodes, false)
    }

    /// The perturbed arc, sampled densely and resampled to `n` nodes at equal
    /// spacing.
    pub fn sample_perturbed(&self, n: usize, bump: &RadialBump) -> Result<DiscreteCurve<T>> {
        if n < 4 {
            return Err(FlowError::InvalidInput(format!(
                "need at least 4 nodes, got {n}"
            )));
        }
        let dense = 8 * n;
        let mut nodes: Vec<PlanarPoint<T>> = (0..dense)
            .map(|i| {
                let u = T::from_usize_lossy(i) / T::from_usize_lossy(dense - 1);
                let r = self.rho * (T::one() + T::lit(bump.amplitude) * bump.profile(u));
                self.center + PlanarPoint::polar(self.start_angle + self.sweep * u) * r
            })
            .collect();
        // the bump vanishes at the ends, so the endpoints sit exactly on the arc
        nodes[0] = self.center + PlanarPoint::polar(self.start_angle) * self.rho;
        nodes[dense - 1] =
            self.center + PlanarPoint::polar(self.start_angle + self.sweep) * self.rho;
        DiscreteCurve::new(nodes, false)?.resample_smooth(n)
    }
}

/// First root of `cross(dir, g(s) - origin)` with `g(s)` on the positive side
/// of the ray.
fn ray_root<T: Scalar>(
    sigma: &SupportCurve<T>,
    origin: PlanarPoint<T>,
    dir: PlanarPoint<T>,
    g: &impl Fn(T) -> PlanarPoint<T>,
) -> Result<T> {
    let scan = 720usize;
    let step = sigma.total_length() / T::from_usize_lossy(scan);
    let h = |s: T| dir.cross(g(s) - origin);
    let mut best: Option<(T, T)> = None;
    for k in 0..scan {
        let lo = step * T::from_usize_lossy(k);
        let hi = lo + step;
        let (hl, hh) = (h(lo), h(hi));
        if hl == T::zero() || hl * hh < T::zero() {
            let (mut l, mut r) = (lo, hi);
            for _ in 0..80 {
                let m = (l + r) * T::lit(0.5);
                if h(l) * h(m) <= T::zero() {
                    r = m;
                } else {
                    l = m;
                }
            }
            let s = (l + r) * T::lit(0.5);
            let along = dir.dot(g(s) - origin);
            if along > T::zero() && best.is_none_or(|(_, d)| along < d) {
                best = Some((s, along));
            }
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| {
        FlowError::InvalidInput("no orthogonal contact point along the requested direction".into())
    })
}

/// Radial profile `p(u) = sin^2(m pi u) (1 - beta + beta cos(2 pi (u - phase)))`
/// on `u in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub amplitude: f64,
    pub frequency: u32,
    pub skew: f64,
    pub phase: f64,
}

impl RadialBump {
    pub fn from_seed(amplitude: f64, frequency: u32, skew: f64, seed: u64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude.abs() < 1.0) || frequency == 0 {
            return Err(FlowError::InvalidInput(format!(
                "perturbation needs |amplitude| < 1 and frequency >= 1, got {amplitude}, {frequency}"
            )));
        }
        if !(0.0..=1.0).contains(&skew) {
            return Err(FlowError::InvalidInput(format!(
                "skew must lie in [0, 1], got {skew}"
            )));
        }
        let phase = ChaCha8Rng::seed_from_u64(seed).gen::<f64>();
        Ok(Self {
            amplitude,
            frequency,
            skew,
            phase,
        })
    }

    pub fn profile<T: Scalar>(&self, u: T) -> T {
        let m = T::from_u32(self.frequency).unwrap_or_else(T::one);
        let s = (m * T::PI() * u).sin();
        let beta = T::lit(self.skew);
        s * s * (T::one() - beta + beta * (T::TAU() * (u - T::lit(self.phase))).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support::SupportSpec;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    type P = PlanarPoint<f64>;

    #[test]
    fn stationary_arc_on_unit_circle() {
        let sigma = SupportCurve::<f64>::circle(1.0).unwrap();
        let arc = OrthogonalArc::solve(&sigma, 1.0, 0.0).unwrap();
        assert!(arc.center.dist(P::new(SQRT_2, 0.0)) < 1e-12);
        assert!((arc.lift.a + FRAC_PI_4).abs() < 1e-12);
        assert!((arc.lift.b - FRAC_PI_4).abs() < 1e-12);
        assert!((arc.length() - 1.5 * PI).abs() < 1e-12);
        let c = arc.sample(201).unwrap();
        assert!(c.first().dist(sigma.point(arc.lift.a)) < 1e-14);
        assert!(c.last().dist(sigma.point(arc.lift.b)) < 1e-14);
        // the middle node is the outermost point of the arc
        assert!(c.nodes()[100].dist(P::new(SQRT_2 + 1.0, 0.0)) < 1e-12);
        let st = FlowState::new(c, Boundary::on_support(arc.lift));
        let k = crate::flow::flow_curvature(&st, &sigma).values;
        assert!(k.iter().all(|k| (k - 1.0).abs() < 1e-10));
    }

    #[test]
    fn small_arc_closed_forms() {
        // L = rho (2 pi - 2 atan(R / rho)) and d = sqrt(R^2 + rho^2)
        let sigma = SupportCurve::<f64>::circle(1.0).unwrap();
        for &rho in &[0.03, 0.1, 0.5] {
            let arc = OrthogonalArc::solve(&sigma, rho, 0.7).unwrap();
            let len = rho * (2.0 * PI - 2.0 * (1.0 / rho).atan());
            assert!((arc.length() - len).abs() < 1e-12);
            assert!((arc.center.norm() - (1.0 + rho * rho).sqrt()).abs() < 1e-12);
            assert!((arc.center.angle() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_arc_meets_support_orthogonally() {
        let sigma = SupportCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        for &angle in &[0.0, 1.2, 2.5] {
            let arc = OrthogonalArc::solve(&sigma, 0.3, angle).unwrap();
            for s in [arc.lift.a, arc.lift.b] {
                let f = sigma.eval(s);
                assert!(((f.point - arc.center).norm() - 0.3).abs() < 1e-12);
                // radius along the support tangent <=> circles cross at right angles
                assert!((f.point - arc.center).cross(f.tangent).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn perturbation_keeps_ends_and_contact() {
        let sigma = SupportCurve::<f64>::circle(1.0).unwrap();
        let spec = InitialSpec::PerturbedArc {
            rho: 0.03,
            center_angle: 0.0,
            amplitude: 0.05,
            frequency: 3,
            seed: 7,
            skew: 0.2,
        };
        let st = spec.build(&sigma, 200).unwrap();
        let lift = st.lift().unwrap();
        assert!(st.curve.first().dist(sigma.point(lift.a)) < 1e-14);
        assert!(st.curve.last().dist(sigma.point(lift.b)) < 1e-14);
        let k = st.curve.curvature();
        assert!(k.min() > 0.0, "min curvature {}", k.min());
        let segs = st.curve.segment_lengths();
        let ratio = segs.iter().cloned().fold(0.0, f64::max)
            / segs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(ratio < 1.01);
        // same seed, same curve; different seed, different curve
        assert_eq!(spec.build(&sigma, 200).unwrap().curve, st.curve);
        let other = InitialSpec::PerturbedArc {
            rho: 0.03,
            center_angle: 0.0,
            amplitude: 0.05,
            frequency: 3,
            seed: 8,
            skew: 0.2,
        };
        assert_ne!(other.build(&sigma, 200).unwrap().curve, st.curve);
    }

    #[test]
    fn bump_profile_vanishes_to_second_order_at_ends() {
        let b = RadialBump::from_seed(0.05, 3, 0.2, 1).unwrap();
        for u in [0.0f64, 1.0] {
            assert!(b.profile(u).abs() < 1e-28);
            let h = 1e-6;
            let d = (b.profile(u + h) - b.profile(u - h)) / (2.0 * h);
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn explicit_nodes_get_a_lift() {
        let sigma = SupportCurve::<f64>::circle(1.0).unwrap();
        let pts: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let t = -0.3 + 0.6 * i as f64 / 19.0;
                let r = 1.0 + 0.2 * (PI * i as f64 / 19.0).sin();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let st = InitialSpec::Nodes {
            points: pts,
            closed: false,
        }
        .build(&sigma, 0)
        .unwrap();
        let lift = st.lift().unwrap();
        assert!((lift.a + 0.3).abs() < 1e-12 && (lift.b - 0.3).abs() < 1e-12);
        let bad = InitialSpec::Nodes {
            points: vec![[2.0, 0.0], [2.0, 1.0], [1.5, 1.5], [0.0, 1.0]],
            closed: false,
        };
        assert!(matches!(
            bad.build(&sigma, 0),
            Err(FlowError::InvalidInput(_))
        ));
    }

    #[test]
    fn initial_json_shapes() {
        let s: InitialSpec = serde_json::from_str(
            r#"{"kind":"perturbed-arc","rho":0.03,"amplitude":0.05,"frequency":3,"seed":1}"#,
        )
        .unwrap();
        assert!(matches!(s, InitialSpec::PerturbedArc { skew, .. } if skew == 0.2));
        assert!(serde_json::from_str::<InitialSpec>(r#"{"kind":"spiral"}"#).is_err());
        let _ = SupportSpec::circle(1.0);
    }
}
