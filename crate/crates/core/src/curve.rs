//! Discrete planar curves and their purely geometric queries.
//!
//! A [`DiscreteCurve`] is an ordered polyline, open or closed. The normal at a
//! node is `nu = J tau` with `J` the rotation by +pi/2, so curvature is
//! positive where the curve bends to the left of its direction of travel.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::point::PlanarPoint;
use crate::scalar::Scalar;

/// Collinearity tolerance of the segment intersection predicates.
const ORIENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr<T>", into = "CurveRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiscreteCurve<T> {
    nodes: Vec<PlanarPoint<T>>,
    closed: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct CurveRepr<T> {
    points: Vec<PlanarPoint<T>>,
    closed: bool,
}

impl<T: Scalar> TryFrom<CurveRepr<T>> for DiscreteCurve<T> {
    type Error = FlowError;
    fn try_from(r: CurveRepr<T>) -> Result<Self> {
        DiscreteCurve::new(r.points, r.closed)
    }
}

impl<T: Scalar> From<DiscreteCurve<T>> for CurveRepr<T> {
    fn from(c: DiscreteCurve<T>) -> Self {
        CurveRepr {
            points: c.nodes,
            closed: c.closed,
        }
    }
}

/// Signed curvature per node with the matching arclength quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSamples<T> {
    pub values: Vec<T>,
    pub arclength_weights: Vec<T>,
}

impl<T: Scalar> CurvatureSamples<T> {
    /// Quadrature of `f(kappa_i)` against the arclength weights.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.values
            .iter()
            .zip(&self.arclength_weights)
            .map(|(&k, &w)| f(k) * w)
            .sum()
    }

    pub fn total_weight(&self) -> T {
        self.arclength_weights.iter().copied().sum()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, k| m.max(k.abs()))
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Cumulative arclength at every node; for closed curves `total` includes the
/// closing segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ArclengthTable<T> {
    pub values: Vec<T>,
    pub total: T,
}

impl<T: Scalar> DiscreteCurve<T> {
    /// Validates and wraps a node list. Open curves need two nodes, closed
    /// curves three; the flow engine asks for more.
    pub fn new(nodes: Vec<PlanarPoint<T>>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if nodes.len() < min {
            return Err(FlowError::InvalidCurve(format!(
                "{} nodes, need at least {min}",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(FlowError::InvalidCurve(format!("node {i} is not finite")));
        }
        let curve = Self { nodes, closed };
        for i in 0..curve.segment_count() {
            let (p, q) = curve.segment(i);
            if p == q {
                return Err(FlowError::InvalidCurve(format!(
                    "segment {i} has zero length"
                )));
            }
        }
        Ok(curve)
    }

    /// Builds a curve without validation; callers guarantee the invariants.
    pub(crate) fn from_nodes_unchecked(nodes: Vec<PlanarPoint<T>>, closed: bool) -> Self {
        Self { nodes, closed }
    }

    pub fn nodes(&self) -> &[PlanarPoint<T>] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<PlanarPoint<T>> {
        self.nodes
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> PlanarPoint<T> {
        self.nodes[0]
    }

    pub fn last(&self) -> PlanarPoint<T> {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len() - 1
        }
    }

    #[inline]
    pub fn segment(&self, i: usize) -> (PlanarPoint<T>, PlanarPoint<T>) {
        let n = self.nodes.len();
        (self.nodes[i], self.nodes[(i + 1) % n])
    }

    pub fn segment_lengths(&self) -> Vec<T> {
        (0..self.segment_count())
            .map(|i| {
                let (p, q) = self.segment(i);
                p.dist(q)
            })
            .collect()
    }

    pub fn length(&self) -> T {
        self.segment_lengths().into_iter().sum()
    }

    pub fn max_segment(&self) -> T {
        self.segment_lengths().into_iter().fold(T::zero(), T::max)
    }

    pub fn min_segment(&self) -> T {
        self.segment_lengths()
            .into_iter()
            .fold(T::infinity(), T::min)
    }

    pub fn centroid(&self) -> PlanarPoint<T> {
        let n = T::from_usize_lossy(self.nodes.len());
        self.nodes
            .iter()
            .fold(PlanarPoint::zero(), |acc, &p| acc + p)
            * n.recip()
    }

    /// Cumulative arclength, starting at zero.
    pub fn arclength_table(&self) -> Result<ArclengthTable<T>> {
        let mut values = Vec::with_capacity(self.nodes.len());
        let mut acc = T::zero();
        values.push(acc);
        for (i, l) in self.segment_lengths().into_iter().enumerate() {
            if !(l > T::zero()) {
                return Err(FlowError::InvalidCurve(format!(
                    "segment {i} has zero length"
                )));
            }
            acc = acc + l;
            if values.len() < self.nodes.len() {
                values.push(acc);
            }
        }
        Ok(ArclengthTable { values, total: acc })
    }

    /// Per-node arclength weights: half of each adjacent segment.
    pub fn arclength_weights(&self) -> Vec<T> {
        let n = self.nodes.len();
        let seg = self.segment_lengths();
        let half = T::lit(0.5);
        (0..n)
            .map(|i| {
                let prev = if i > 0 {
                    seg[i - 1]
                } else if self.closed {
                    seg[n - 1]
                } else {
                    T::zero()
                };
                let next = if i < seg.len() { seg[i] } else { T::zero() };
                (prev + next) * half
            })
            .collect()
    }

    /// Signed curvature at every node.
    ///
    /// Interior (and all closed-curve) nodes use the circumscribed circle of
    /// three consecutive nodes. Endpoints of open curves use the second
    /// derivative of the cubic through the four nearest nodes, parametrized by
    /// cumulative chord length.
    pub fn curvature(&self) -> CurvatureSamples<T> {
        let n = self.nodes.len();
        let mut values = vec![T::zero(); n];
        for (i, v) in values.iter_mut().enumerate() {
            if self.closed {
                *v = menger(
                    self.nodes[(i + n - 1) % n],
                    self.nodes[i],
                    self.nodes[(i + 1) % n],
                );
            } else if i > 0 && i + 1 < n {
                *v = menger(self.nodes[i - 1], self.nodes[i], self.nodes[i + 1]);
            }
        }
        if !self.closed && n >= 3 {
            values[0] = self.endpoint_frame(End::Start).curvature;
            values[n - 1] = self.endpoint_frame(End::Finish).curvature;
        }
        CurvatureSamples {
            values,
            arclength_weights: self.arclength_weights(),
        }
    }

    /// One-sided tangent and curvature at an endpoint of an open curve.
    pub fn endpoint_frame(&self, end: End) -> EndpointFrame<T> {
        let n = self.nodes.len();
        let k = n.min(4);
        let pts: Vec<PlanarPoint<T>> = match end {
            End::Start => self.nodes[..k].to_vec(),
            End::Finish => self.nodes[n - k..].to_vec(),
        };
        let mut s = vec![T::zero(); k];
        for j in 1..k {
            s[j] = s[j - 1] + pts[j].dist(pts[j - 1]);
        }
        let at = match end {
            End::Start => s[0],
            End::Finish => s[k - 1],
        };
        let (d1, d2) = lagrange_derivative_weights(&s, at);
        let mut v = PlanarPoint::zero();
        let mut a = PlanarPoint::zero();
        for j in 0..k {
            v += pts[j] * d1[j];
            a += pts[j] * d2[j];
        }
        let speed = v.norm();
        let curvature = if k < 3 || speed == T::zero() {
            T::zero()
        } else {
            v.cross(a) / (speed * speed * speed)
        };
        EndpointFrame {
            tangent: v.unit(),
            curvature,
        }
    }

    /// Total signed turning of the tangent.
    ///
    /// For open curves this is the sum of the exterior angles at interior
    /// nodes plus half of the first and last of them, which accounts for the
    /// half segments between each endpoint and its chord; the result is exact
    /// on uniformly sampled circular arcs. For closed curves it is the plain
    /// sum, i.e. `2 pi` times the turning number.
    pub fn total_turning(&self) -> T {
        let n = self.nodes.len();
        let angle = |i: usize| -> T {
            let p = self.nodes[(i + n - 1) % n];
            let q = self.nodes[i];
            let r = self.nodes[(i + 1) % n];
            exterior_angle(q - p, r - q)
        };
        if self.closed {
            return (0..n).map(angle).sum();
        }
        if n < 3 {
            return T::zero();
        }
        let inner: T = (1..n - 1).map(angle).sum();
        inner + (angle(1) + angle(n - 2)) * T::lit(0.5)
    }

    /// Whether any two non-adjacent segments intersect.
    pub fn self_intersects(&self) -> bool {
        let m = self.segment_count();
        let eps = T::lit(ORIENT_EPS);
        for i in 0..m {
            let (p1, p2) = self.segment(i);
            for j in (i + 2)..m {
                if self.closed && i == 0 && j == m - 1 {
                    continue;
                }
                let (q1, q2) = self.segment(j);
                if segments_intersect(p1, p2, q1, q2, eps) {
                    return true;
                }
            }
        }
        false
    }

    /// `n` nodes at equal arclength along the polyline (linear interpolation).
    pub fn resample_uniform(&self, n: usize) -> Result<Self> {
        self.resample_with(n, |_, seg, u| {
            let (p, q) = self.segment(seg);
            p.lerp(q, u)
        })
    }

    /// `n` nodes at equal spacing of the cumulative chord parameter, placed on
    /// the local cubic through the four nearest nodes. Unlike
    /// [`resample_uniform`](Self::resample_uniform) this keeps nodes on the
    /// underlying smooth curve to fourth order, so curvature estimates are not
    /// disturbed by the chord sag.
    pub fn resample_smooth(&self, n: usize) -> Result<Self> {
        let count = self.nodes.len();
        if count < 4 {
            return self.resample_uniform(n);
        }
        self.resample_with(n, |table, seg, u| {
            let s_at = table[seg] + (self.segment_param(table, seg + 1) - table[seg]) * u;
            // four nodes around the segment, clamped inside open curves
            let lo = if self.closed {
                seg as isize - 1
            } else {
                (seg as isize - 1).max(0).min(count as isize - 4)
            };
            let idx = [lo, lo + 1, lo + 2, lo + 3];
            let mut params = [T::zero(); 4];
            let mut pts = [PlanarPoint::zero(); 4];
            for (k, &j) in idx.iter().enumerate() {
                let (pj, sj) = self.wrapped_node(table, j);
                pts[k] = pj;
                params[k] = sj;
            }
            let w = lagrange_weights(&params, s_at);
            let mut out = PlanarPoint::zero();
            for k in 0..4 {
                out += pts[k] * w[k];
            }
            out
        })
    }

    fn segment_param(&self, table: &[T], j: usize) -> T {
        if j < table.len() {
            table[j]
        } else {
            // closing node of a closed curve
            table[j - 1] + self.segment(j - 1).0.dist(self.segment(j - 1).1)
        }
    }

    /// Node `j` (possibly out of range for closed curves) with its unwrapped
    /// chord parameter.
    fn wrapped_node(&self, table: &[T], j: isize) -> (PlanarPoint<T>, T) {
        let n = self.nodes.len() as isize;
        let total = self.length();
        let wraps = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        (
            self.nodes[r],
            table[r] + total * T::from_isize(wraps).unwrap_or_else(T::zero),
        )
    }

    fn resample_with(
        &self,
        n: usize,
        eval: impl Fn(&[T], usize, T) -> PlanarPoint<T>,
    ) -> Result<Self> {
        let min = if self.closed { 3 } else { 2 };
        if n < min {
            return Err(FlowError::InvalidInput(format!(
                "cannot resample to {n} nodes"
            )));
        }
        let table = self.arclength_table()?;
        let seg = self.segment_lengths();
        let total = table.total;
        let intervals = if self.closed { n } else { n - 1 };
        let step = total / T::from_usize_lossy(intervals);
        let mut out = Vec::with_capacity(n);
        out.push(self.nodes[0]);
        let mut j = 0usize;
        for k in 1..n {
            if !self.closed && k == n - 1 {
                out.push(self.last());
                break;
            }
            let target = step * T::from_usize_lossy(k);
            while j + 1 < seg.len() && table.values.get(j + 1).is_some_and(|&v| v <= target) {
                j += 1;
            }
            let u = ((target - table.values[j]) / seg[j])
                .max(T::zero())
                .min(T::one());
            out.push(eval(&table.values, j, u));
        }
        Self::new(out, self.closed)
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self::from_nodes_unchecked(nodes, self.closed)
    }

    /// Rotation by `angle` about the origin followed by a translation.
    pub fn transformed(&self, angle: T, shift: PlanarPoint<T>) -> Self {
        let nodes = self.nodes.iter().map(|p| p.rotate(angle) + shift).collect();
        Self::from_nodes_unchecked(nodes, self.closed)
    }

    /// `scale * (p - origin)` for every node.
    pub fn rescaled(&self, origin: PlanarPoint<T>, scale: T) -> Self {
        let nodes = self.nodes.iter().map(|&p| (p - origin) * scale).collect();
        Self::from_nodes_unchecked(nodes, self.closed)
    }

    /// Unit tangents: central chords at interior nodes, one-sided cubic
    /// tangents at the endpoints of open curves.
    pub fn tangents(&self) -> Vec<PlanarPoint<T>> {
        let n = self.nodes.len();
        let mut out: Vec<PlanarPoint<T>> = (0..n)
            .map(|i| {
                if self.closed {
                    (self.nodes[(i + 1) % n] - self.nodes[(i + n - 1) % n]).unit()
                } else if i == 0 || i + 1 == n {
                    PlanarPoint::zero()
                } else {
                    (self.nodes[i + 1] - self.nodes[i - 1]).unit()
                }
            })
            .collect();
        if !self.closed {
            out[0] = self.endpoint_frame(End::Start).tangent;
            out[n - 1] = self.endpoint_frame(End::Finish).tangent;
        }
        out
    }

    pub fn normals(&self) -> Vec<PlanarPoint<T>> {
        self.tangents().into_iter().map(PlanarPoint::perp).collect()
    }

    /// Shoelace integral `1/2 sum (x_i y_{i+1} - x_{i+1} y_i)` over the
    /// segments; for a closed curve this is the signed enclosed area.
    pub fn shoelace(&self) -> T {
        let half = T::lit(0.5);
        (0..self.segment_count())
            .map(|i| {
                let (p, q) = self.segment(i);
                p.cross(q)
            })
            .sum::<T>()
            * half
    }

    /// Distance from `q` to the polyline.
    pub fn distance_to_point(&self, q: PlanarPoint<T>) -> T {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                point_segment_distance(q, a, b)
            })
            .fold(T::infinity(), T::min)
    }

    /// Symmetric node-to-polyline Hausdorff distance.
    pub fn hausdorff(&self, other: &Self) -> T {
        let one_way = |a: &Self, b: &Self| {
            a.nodes
                .iter()
                .map(|&p| b.distance_to_point(p))
                .fold(T::zero(), T::max)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Start,
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointFrame<T> {
    /// Unit tangent in the direction of increasing node index.
    pub tangent: PlanarPoint<T>,
    pub curvature: T,
}

/// Signed Menger curvature of three points: the reciprocal circumradius,
/// positive for a left turn. Collinear triples give zero.
#[inline]
pub fn menger<T: Scalar>(a: PlanarPoint<T>, b: PlanarPoint<T>, c: PlanarPoint<T>) -> T {
    let ab = b - a;
    let bc = c - b;
    let ca = a - c;
    let denom = ab.norm() * bc.norm() * ca.norm();
    if denom == T::zero() {
        return T::zero();
    }
    T::lit(2.0) * ab.cross(bc) / denom
}

/// Signed angle turning from direction `u` to direction `v`.
#[inline]
pub fn exterior_angle<T: Scalar>(u: PlanarPoint<T>, v: PlanarPoint<T>) -> T {
    u.cross(v).atan2(u.dot(v))
}

pub fn point_segment_distance<T: Scalar>(
    q: PlanarPoint<T>,
    a: PlanarPoint<T>,
    b: PlanarPoint<T>,
) -> T {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == T::zero() {
        return q.dist(a);
    }
    let u = ((q - a).dot(ab) / len2).max(T::zero()).min(T::one());
    q.dist(a + ab * u)
}

fn orient<T: Scalar>(a: PlanarPoint<T>, b: PlanarPoint<T>, c: PlanarPoint<T>, eps: T) -> i8 {
    let v = (b - a).cross(c - a);
    let scale = (b - a).norm() * (c - a).norm();
    if v.abs() <= eps * scale {
        0
    } else if v > T::zero() {
        1
    } else {
        -1
    }
}

fn on_segment<T: Scalar>(a: PlanarPoint<T>, b: PlanarPoint<T>, p: PlanarPoint<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test with a relative collinearity tolerance.
pub fn segments_intersect<T: Scalar>(
    p1: PlanarPoint<T>,
    p2: PlanarPoint<T>,
    q1: PlanarPoint<T>,
    q2: PlanarPoint<T>,
    eps: T,
) -> bool {
    let d1 = orient(q1, q2, p1, eps);
    let d2 = orient(q1, q2, p2, eps);
    let d3 = orient(p1, p2, q1, eps);
    let d4 = orient(p1, p2, q2, eps);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(q1, q2, p1))
        || (d2 == 0 && on_segment(q1, q2, p2))
        || (d3 == 0 && on_segment(p1, p2, q1))
        || (d4 == 0 && on_segment(p1, p2, q2))
}

/// Lagrange basis weights at `at` for the given abscissae.
pub fn lagrange_weights<T: Scalar>(xs: &[T], at: T) -> Vec<T> {
    (0..xs.len())
        .map(|j| {
            xs.iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(T::one(), |acc, (_, &xm)| acc * (at - xm) / (xs[j] - xm))
        })
        .collect()
}

/// First- and second-derivative weights of the Lagrange interpolant at `at`.
pub fn lagrange_derivative_weights<T: Scalar>(xs: &[T], at: T) -> (Vec<T>, Vec<T>) {
    let n = xs.len();
    let mut d1 = vec![T::zero(); n];
    let mut d2 = vec![T::zero(); n];
    for j in 0..n {
        let denom = (0..n)
            .filter(|&m| m != j)
            .fold(T::one(), |acc, m| acc * (xs[j] - xs[m]));
        let mut first = T::zero();
        let mut second = T::zero();
        for k in (0..n).filter(|&k| k != j) {
            let prod = (0..n)
                .filter(|&m| m != j && m != k)
                .fold(T::one(), |acc, m| acc * (at - xs[m]));
            first = first + prod;
            for l in (0..n).filter(|&l| l != j && l != k) {
                let prod2 = (0..n)
                    .filter(|&m| m != j && m != k && m != l)
                    .fold(T::one(), |acc, m| acc * (at - xs[m]));
                second = second + prod2;
            }
        }
        d1[j] = first / denom;
        d2[j] = second / denom;
    }
    (d1, d2)
}
