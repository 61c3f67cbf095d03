//! The fixed convex support curve `Sigma` on which the endpoints slide.
//!
//! `Sigma` is positively oriented and parametrized by arclength `s`, taken on
//! its periodic extension. Its normal `J tau` therefore points into the region
//! it bounds.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::point::PlanarPoint;
use crate::scalar::Scalar;
use crate::spline::{gauss_legendre, PeriodicSpline};

/// Samples used for metrics, convexity checks and projection seeds.
const DENSE: usize = 4096;
/// Eccentric-angle intervals of the ellipse arclength table.
const ELLIPSE_TABLE: usize = 1024;
const CONVEXITY_TOL: f64 = -1e-8;

/// Shape description as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SupportShape {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Closed, positively oriented point list; smoothed by a periodic spline
    /// and resampled by arclength.
    Table {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        resolution: Option<usize>,
    },
}

/// A shape with an optional rigid placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    #[serde(flatten)]
    pub shape: SupportShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
}

impl SupportSpec {
    pub fn circle(radius: f64) -> Self {
        Self {
            shape: SupportShape::Circle { radius },
            center: None,
            rotation: None,
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self {
            shape: SupportShape::Ellipse { a, b },
            center: None,
            rotation: None,
        }
    }

    pub fn table(points: Vec<[f64; 2]>) -> Self {
        Self {
            shape: SupportShape::Table {
                points,
                resolution: None,
            },
            center: None,
            rotation: None,
        }
    }

    pub fn placed(mut self, center: [f64; 2], rotation: f64) -> Self {
        self.center = Some(center);
        self.rotation = Some(rotation);
        self
    }
}

/// Point, unit tangent, inward normal and curvature of `Sigma` at one
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportFrame<T> {
    pub point: PlanarPoint<T>,
    pub tangent: PlanarPoint<T>,
    pub normal: PlanarPoint<T>,
    pub curvature: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SupportMetrics<T> {
    pub kappa_max: T,
    /// Least distance between two points with opposite tangents.
    pub sigma_d: T,
    pub diameter: T,
}

#[derive(Debug, Clone)]
enum Evaluator<T> {
    Circle { radius: T },
    Ellipse(EllipseArc<T>),
    Table(PeriodicSpline<T>),
}

#[derive(Debug, Clone)]
struct EllipseArc<T> {
    a: T,
    b: T,
    /// Arclength at eccentric angles `2 pi k / ELLIPSE_TABLE`.
    table: Vec<T>,
}

impl<T: Scalar> EllipseArc<T> {
    fn new(a: T, b: T) -> Self {
        let step = T::TAU() / T::from_usize_lossy(ELLIPSE_TABLE);
        let mut table = Vec::with_capacity(ELLIPSE_TABLE + 1);
        let mut acc = T::zero();
        table.push(acc);
        for k in 0..ELLIPSE_TABLE {
            let lo = step * T::from_usize_lossy(k);
            acc = acc + gauss_legendre(lo, lo + step, |th| Self::speed_at(a, b, th));
            table.push(acc);
        }
        Self { a, b, table }
    }

    fn speed_at(a: T, b: T, th: T) -> T {
        (a * th.sin()).hypot(b * th.cos())
    }

    fn length(&self) -> T {
        self.table[ELLIPSE_TABLE]
    }

    /// Eccentric angle at arclength `s` in `[0, length)`.
    fn angle_at(&self, s: T) -> T {
        let k = match self
            .table
            .binary_search_by(|v| v.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(ELLIPSE_TABLE - 1),
            Err(i) => i.saturating_sub(1).min(ELLIPSE_TABLE - 1),
        };
        let step = T::TAU() / T::from_usize_lossy(ELLIPSE_TABLE);
        let lo = step * T::from_usize_lossy(k);
        let mut th =
            lo + (s - self.table[k]) / Self::speed_at(self.a, self.b, lo + step * T::lit(0.5));
        for _ in 0..8 {
            let arc = self.table[k] + gauss_legendre(lo, th, |u| Self::speed_at(self.a, self.b, u));
            let delta = (arc - s) / Self::speed_at(self.a, self.b, th);
            th = th - delta;
            if delta.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        th
    }
}

/// The support curve with its cached metrics.
#[derive(Debug, Clone)]
pub struct SupportCurve<T> {
    eval: Evaluator<T>,
    center: PlanarPoint<T>,
    rotation: T,
    total_length: T,
    /// Dense sample `(s, point)` used to seed projections.
    seeds: Vec<(T, PlanarPoint<T>)>,
    /// Unwrapped tangent angle at the seed parameters.
    seed_angles: Vec<T>,
    metrics: SupportMetrics<T>,
    spec: SupportSpec,
}

impl<T: Scalar> SupportCurve<T> {
    pub fn from_spec(spec: &SupportSpec) -> Result<Self> {
        let center = spec.center.unwrap_or([0.0, 0.0]);
        let center = PlanarPoint::new(T::lit(center[0]), T::lit(center[1]));
        let rotation = T::lit(spec.rotation.unwrap_or(0.0));
        if !center.is_finite() || !rotation.is_finite() {
            return Err(FlowError::InvalidSupport("non-finite placement".into()));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(T::lit(v))
            } else {
                Err(FlowError::InvalidSupport(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        let (eval, total_length) = match &spec.shape {
            SupportShape::Circle { radius } => {
                let r = positive("radius", *radius)?;
                (Evaluator::Circle { radius: r }, T::TAU() * r)
            }
            SupportShape::Ellipse { a, b } => {
                let e = EllipseArc::new(positive("a", *a)?, positive("b", *b)?);
                let len = e.length();
                (Evaluator::Ellipse(e), len)
            }
            SupportShape::Table { points, resolution } => {
                let spline = table_spline(points, resolution.unwrap_or(DENSE))?;
                let len = spline.period();
                (Evaluator::Table(spline), len)
            }
        };
        let mut curve = Self {
            eval,
            center,
            rotation,
            total_length,
            seeds: Vec::new(),
            seed_angles: Vec::new(),
            metrics: SupportMetrics {
                kappa_max: T::zero(),
                sigma_d: T::zero(),
                diameter: T::zero(),
            },
            spec: spec.clone(),
        };
        curve.build_seeds()?;
        curve.metrics = curve.compute_metrics();
        Ok(curve)
    }

    pub fn circle(radius: T) -> Result<Self> {
        Self::from_spec(&SupportSpec::circle(radius.to_f64_lossy()))
    }

    pub fn ellipse(a: T, b: T) -> Result<Self> {
        Self::from_spec(&SupportSpec::ellipse(a.to_f64_lossy(), b.to_f64_lossy()))
    }

    pub fn spec(&self) -> &SupportSpec {
        &self.spec
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    /// Placement center for circles and ellipses, the mean of the dense
    /// arclength sample for tables.
    pub fn center_point(&self) -> PlanarPoint<T> {
        match self.eval {
            Evaluator::Table(_) => {
                let n = T::from_usize_lossy(self.seeds.len());
                self.seeds
                    .iter()
                    .fold(PlanarPoint::zero(), |acc, &(_, p)| acc + p)
                    * n.recip()
            }
            _ => self.center,
        }
    }

    pub fn metrics(&self) -> SupportMetrics<T> {
        self.metrics
    }

    pub fn diameter(&self) -> T {
        self.metrics.diameter
    }

    fn wrap(&self, s: T) -> T {
        let l = self.total_length;
        let r = s % l;
        if r < T::zero() {
            r + l
        } else {
            r
        }
    }

    /// Local frame before placement: point, velocity, acceleration with
    /// respect to arclength.
    fn local(&self, s: T) -> (PlanarPoint<T>, PlanarPoint<T>, PlanarPoint<T>) {
        match &self.eval {
            Evaluator::Circle { radius } => {
                let phi = s / *radius;
                let u = PlanarPoint::polar(phi);
                (u * *radius, u.perp(), -u * radius.recip())
            }
            Evaluator::Ellipse(e) => {
                let th = e.angle_at(self.wrap(s));
                let (sn, cs) = th.sin_cos();
                let p = PlanarPoint::new(e.a * cs, e.b * sn);
                let dp = PlanarPoint::new(-e.a * sn, e.b * cs);
                let speed = dp.norm();
                let tangent = dp * speed.recip();
                let kappa = e.a * e.b / (speed * speed * speed);
                (p, tangent, tangent.perp() * kappa)
            }
            Evaluator::Table(sp) => {
                let (p, d1, d2) = sp.eval(s);
                let speed = d1.norm();
                let tangent = d1 * speed.recip();
                let kappa = d1.cross(d2) / (speed * speed * speed);
                (p, tangent, tangent.perp() * kappa)
            }
        }
    }

    /// Position and Frenet data at arclength `s` (any real; taken periodically).
    pub fn eval(&self, s: T) -> SupportFrame<T> {
        let (p, tangent, accel) = self.local(s);
        let tangent = tangent.rotate(self.rotation);
        let normal = tangent.perp();
        SupportFrame {
            point: p.rotate(self.rotation) + self.center,
            tangent,
            normal,
            curvature: accel.rotate(self.rotation).dot(normal),
        }
    }

    pub fn point(&self, s: T) -> PlanarPoint<T> {
        self.eval(s).point
    }

    fn build_seeds(&mut self) -> Result<()> {
        let n = DENSE;
        let step = self.total_length / T::from_usize_lossy(n);
        let mut seeds = Vec::with_capacity(n);
        let mut angles = Vec::with_capacity(n);
        let mut prev = T::zero();
        for k in 0..n {
            let s = step * T::from_usize_lossy(k);
            let f = self.eval(s);
            if f.curvature < T::lit(CONVEXITY_TOL) {
                return Err(FlowError::InvalidSupport(format!(
                    "curvature {} < 0 at s = {}: support curve must be convex",
                    f.curvature, s
                )));
            }
            let raw = f.tangent.angle();
            let ang = if k == 0 { raw } else { unwrap_near(raw, prev) };
            seeds.push((s, f.point));
            angles.push(ang);
            prev = ang;
        }
        // a simple closed convex curve turns exactly once
        let turn = unwrap_near(angles[0], prev) - angles[0];
        if (turn - T::TAU()).abs() > T::lit(1e-6) {
            return Err(FlowError::InvalidSupport(format!(
                "tangent turns by {turn}, expected 2 pi"
            )));
        }
        self.seeds = seeds;
        self.seed_angles = angles;
        Ok(())
    }

    /// Tangent angle as a continuous function of `s` on the periodic
    /// extension: `theta(s + L) = theta(s) + 2 pi`.
    pub fn tangent_angle(&self, s: T) -> T {
        let l = self.total_length;
        let turns = (s / l).floor();
        let r = s - turns * l;
        let n = self.seeds.len();
        let step = l / T::from_usize_lossy(n);
        let k = (r / step).to_usize().unwrap_or(0).min(n - 1);
        let raw = self.eval(r).tangent.angle();
        unwrap_near(raw, self.seed_angles[k]) + turns * T::TAU()
    }

    /// `int_a^b Sigma-kappa ds`.
    pub fn arc_turning(&self, a: T, b: T) -> T {
        match &self.eval {
            Evaluator::Circle { radius } => (b - a) / *radius,
            _ => self.tangent_angle(b) - self.tangent_angle(a),
        }
    }

    /// `1/2 int (x dy - y dx)` along `Sigma` from parameter `a` to `b`.
    pub fn arc_area_integral(&self, a: T, b: T) -> T {
        let half = T::lit(0.5);
        // placement only adds the center's cross term; rotations preserve it
        let shift = self.center.cross(self.point(b) - self.point(a)) * half;
        self.local_cumulative(b) - self.local_cumulative(a) + shift
    }

    /// `1/2 int_0^s p x dp` in local coordinates, on the periodic extension.
    fn local_cumulative(&self, s: T) -> T {
        let half = T::lit(0.5);
        let l = self.total_length;
        let turns = (s / l).floor();
        let r = s - turns * l;
        match &self.eval {
            Evaluator::Circle { radius } => half * *radius * s,
            Evaluator::Ellipse(e) => {
                let full = half * e.a * e.b * T::TAU();
                let th = e.angle_at(r);
                full * turns + half * e.a * e.b * th
            }
            Evaluator::Table(sp) => {
                let knots = sp.knots();
                let integrand = |u: T| {
                    let (p, d1, _) = sp.eval(u);
                    p.cross(d1) * half
                };
                let mut acc = T::zero();
                let mut full = T::zero();
                for w in knots.windows(2) {
                    let piece = gauss_legendre(w[0], w[1], integrand);
                    full = full + piece;
                    if w[1] <= r {
                        acc = acc + piece;
                    } else if w[0] < r {
                        acc = acc + gauss_legendre(w[0], r, integrand);
                    }
                }
                full * turns + acc
            }
        }
    }

    /// Signed area of the region bounded by `Sigma`.
    pub fn enclosed_area(&self) -> T {
        self.arc_area_integral(T::zero(), self.total_length)
    }

    /// Nearest-point parameter and the offset `q - Sigma f(s)`, valid on both
    /// sides of `Sigma`.
    pub fn nearest(&self, q: PlanarPoint<T>) -> (T, PlanarPoint<T>) {
        if let Evaluator::Circle { .. } = self.eval {
            let local = (q - self.center).rotate(-self.rotation);
            if local.norm() > T::zero() {
                let s = self.wrap(local.angle() * self.radius_unchecked());
                return (s, q - self.point(s));
            }
        }
        let (mut best, mut best_d) = (0usize, T::infinity());
        for (k, (_, p)) in self.seeds.iter().enumerate() {
            let d = p.dist(q);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        let step = self.total_length / T::from_usize_lossy(self.seeds.len());
        let s0 = self.seeds[best].0;
        let (mut lo, mut hi) = (s0 - step, s0 + step);
        // g(s) = <q - f, tau> is positive left of the minimizer, negative right
        let g = |s: T| {
            let f = self.eval(s);
            ((q - f.point).dot(f.tangent), f)
        };
        let mut s = s0;
        for _ in 0..100 {
            let (gv, f) = g(s);
            if gv > T::zero() {
                lo = s;
            } else {
                hi = s;
            }
            let dg = -T::one() + f.curvature * (q - f.point).dot(f.normal);
            let mut next = if dg < T::zero() { s - gv / dg } else { s };
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            let moved = (next - s).abs();
            s = next;
            if moved <= T::epsilon() * (T::one() + s.abs()) * T::lit(4.0) || hi - lo <= T::epsilon()
            {
                break;
            }
        }
        let s = self.wrap(s);
        (s, q - self.point(s))
    }

    fn radius_unchecked(&self) -> T {
        match self.eval {
            Evaluator::Circle { radius } => radius,
            _ => T::nan(),
        }
    }

    /// Distance to `Sigma`, positive outside the enclosed region, negative
    /// inside.
    pub fn signed_distance(&self, q: PlanarPoint<T>) -> T {
        let (s, off) = self.nearest(q);
        let inward = off.dot(self.eval(s).normal);
        if inward > T::zero() {
            -off.norm()
        } else {
            off.norm()
        }
    }

    /// Arclength parameter of the nearest point of `Sigma` to `q`, which must
    /// lie outside or on `Sigma`.
    pub fn project(&self, q: PlanarPoint<T>) -> Result<T> {
        if !q.is_finite() {
            return Err(FlowError::InvalidInput("non-finite point".into()));
        }
        let (s, off) = self.nearest(q);
        let inward = off.dot(self.eval(s).normal);
        let tol = T::tolerance(1e-12) * (T::one() + self.metrics.diameter);
        if inward > tol {
            return Err(FlowError::Domain(format!(
                "point ({}, {}) lies inside the support curve",
                q.x, q.y
            )));
        }
        Ok(s)
    }

    /// Parameter of the point with tangent angle `angle` (unwrapped), searched
    /// on the periodic extension.
    fn param_at_angle(&self, angle: T) -> T {
        let n = self.seeds.len();
        let l = self.total_length;
        let base = self.seed_angles[0];
        let turns = ((angle - base) / T::TAU()).floor();
        let target = angle - turns * T::TAU();
        let k = self
            .seed_angles
            .partition_point(|&v| v <= target)
            .saturating_sub(1);
        let lo0 = self.seeds[k].0;
        let hi0 = if k + 1 < n { self.seeds[k + 1].0 } else { l };
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..60 {
            let mid = (lo + hi) * T::lit(0.5);
            if self.tangent_angle(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::lit(0.5) + turns * l
    }

    /// Distance from `Sigma f(s)` to the point with opposite tangent.
    pub fn antipodal_width(&self, s: T) -> T {
        let partner = self.param_at_angle(self.tangent_angle(s) + T::PI());
        self.point(s).dist(self.point(partner))
    }

    fn compute_metrics(&self) -> SupportMetrics<T> {
        let kappa_max = match self.eval {
            Evaluator::Circle { radius } => radius.recip(),
            _ => self
                .seeds
                .iter()
                .map(|&(s, _)| self.eval(s).curvature)
                .fold(T::zero(), T::max),
        };
        if let Evaluator::Circle { radius } = self.eval {
            let d = radius * T::lit(2.0);
            return SupportMetrics {
                kappa_max,
                sigma_d: d,
                diameter: d,
            };
        }
        // antipodal widths on a coarse scan, refined by golden section
        let scan = 512usize;
        let step = self.total_length / T::from_usize_lossy(scan);
        let widths: Vec<T> = (0..scan)
            .map(|k| self.antipodal_width(step * T::from_usize_lossy(k)))
            .collect();
        let refine = |k: usize, sign: T| {
            let s = step * T::from_usize_lossy(k);
            let v = golden_section(s - step, s + step, |u| self.antipodal_width(u) * sign);
            v * sign
        };
        let (kmin, _) = argfold(&widths, |a, b| a < b);
        let (kmax, _) = argfold(&widths, |a, b| a > b);
        let sigma_d = refine(kmin, T::one()).min(widths[kmin]);
        let diameter = refine(kmax, -T::one()).max(widths[kmax]);
        SupportMetrics {
            kappa_max,
            sigma_d,
            diameter,
        }
    }
}

fn argfold<T: Scalar>(v: &[T], better: impl Fn(T, T) -> bool) -> (usize, T) {
    v.iter().copied().enumerate().fold(
        (0, v[0]),
        |(bi, bv), (i, x)| if better(x, bv) { (i, x) } else { (bi, bv) },
    )
}

/// Minimum value of a unimodal function on `[lo, hi]`.
fn golden_section<T: Scalar>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let g = T::lit(0.618_033_988_749_894_9);
    let mut x1 = hi - (hi - lo) * g;
    let mut x2 = lo + (hi - lo) * g;
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * g;
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * g;
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// `raw + 2 pi k` closest to `reference`.
fn unwrap_near<T: Scalar>(raw: T, reference: T) -> T {
    let k = ((reference - raw) / T::TAU()).round();
    raw + k * T::TAU()
}

/// Builds the arclength-parametrized spline of a table shape.
fn table_spline<T: Scalar>(points: &[[f64; 2]], resolution: usize) -> Result<PeriodicSpline<T>> {
    let mut pts: Vec<PlanarPoint<T>> = points
        .iter()
        .map(|p| PlanarPoint::new(T::lit(p[0]), T::lit(p[1])))
        .collect();
    if pts.len() > 1 && pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    if pts.len() < 8 {
        return Err(FlowError::InvalidSupport(format!(
            "table needs at least 8 distinct points, got {}",
            pts.len()
        )));
    }
    if resolution < 64 {
        return Err(FlowError::InvalidSupport(format!(
            "table resolution {resolution} below 64"
        )));
    }
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(FlowError::InvalidSupport("non-finite table point".into()));
    }
    let n = pts.len();
    let signed: T = (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<T>() * T::lit(0.5);
    if !(signed > T::zero()) {
        return Err(FlowError::InvalidSupport(
            "table must be positively oriented (counter-clockwise)".into(),
        ));
    }
    let mut knots = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    knots.push(acc);
    for i in 0..n {
        let d = pts[i].dist(pts[(i + 1) % n]);
        if d == T::zero() {
            return Err(FlowError::InvalidSupport(format!(
                "repeated table point at index {i}"
            )));
        }
        acc = acc + d;
        knots.push(acc);
    }
    let chord = PeriodicSpline::new(knots.clone(), pts)?;
    let speed = |u: T| chord.eval(u).1.norm();
    // true arclength at each chord knot
    let mut arc = Vec::with_capacity(n + 1);
    let mut total = T::zero();
    arc.push(total);
    for w in knots.windows(2) {
        total = total + gauss_legendre(w[0], w[1], speed);
        arc.push(total);
    }
    let m = resolution;
    let step = total / T::from_usize_lossy(m);
    let mut values = Vec::with_capacity(m);
    let mut seg = 0usize;
    for k in 0..m {
        let target = step * T::from_usize_lossy(k);
        while seg + 1 < n && arc[seg + 1] <= target {
            seg += 1;
        }
        let (k0, k1) = (knots[seg], knots[seg + 1]);
        let mut u = k0 + (k1 - k0) * (target - arc[seg]) / (arc[seg + 1] - arc[seg]);
        for _ in 0..20 {
            let err = arc[seg] + gauss_legendre(k0, u, speed) - target;
            let du = err / speed(u);
            u = (u - du).max(k0).min(k1);
            if du.abs() <= T::epsilon() * (T::one() + u.abs()) * T::lit(4.0) {
                break;
            }
        }
        values.push(chord.eval(u).0);
    }
    let uniform: Vec<T> = (0..=m).map(|k| step * T::from_usize_lossy(k)).collect();
    let first = PeriodicSpline::new(uniform, values)?;
    // the resampled spline's own length differs from the chord spline's at
    // round-off level; use it so that the parameter is arclength for this curve
    let mut len = T::zero();
    for w in first.knots().windows(2) {
        len = len + gauss_legendre(w[0], w[1], |u| first.eval(u).1.norm());
    }
    let scale = len / total;
    let knots: Vec<T> = first.knots().iter().map(|&k| k * scale).collect();
    let values = (0..m).map(|k| first.eval(first.knots()[k]).0).collect();
    PeriodicSpline::new(knots, values)
}

/// Arclength positions of the two endpoints on the periodic extension of
/// `Sigma`, with `b > a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BoundaryLift<T> {
    pub a: T,
    pub b: T,
}

/// Result of one endpoint update; `collision` is raised when the endpoints
/// merged or crossed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftUpdate<T> {
    pub lift: BoundaryLift<T>,
    pub collision: bool,
}

impl<T: Scalar> BoundaryLift<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    pub fn span(&self) -> T {
        self.b - self.a
    }

    /// Same lift shifted by a multiple of the period `l` so that
    /// `a` lies in `[-l/2, l/2)`.
    pub fn normalized(&self, l: T) -> Self {
        let shift = ((self.a + l * T::lit(0.5)) / l).floor() * l;
        Self {
            a: self.a - shift,
            b: self.b - shift,
        }
    }

    /// Explicit Euler step of `a' = kappa(a) - kappa_bar`,
    /// `b' = -(kappa(b) - kappa_bar)`.
    pub fn advance(&self, kappa_a: T, kappa_b: T, kappa_bar: T, dt: T) -> LiftUpdate<T> {
        let lift = Self {
            a: self.a + dt * (kappa_a - kappa_bar),
            b: self.b - dt * (kappa_b - kappa_bar),
        };
        LiftUpdate {
            collision: !(lift.b - lift.a > T::zero()),
            lift,
        }
    }
}

/// Free-function form of [`BoundaryLift::advance`].
pub fn advance_lift<T: Scalar>(
    lift: BoundaryLift<T>,
    kappa_a: T,
    kappa_b: T,
    kappa_bar: T,
    dt: T,
) -> LiftUpdate<T> {
    lift.advance(kappa_a, kappa_b, kappa_bar, dt)
}
