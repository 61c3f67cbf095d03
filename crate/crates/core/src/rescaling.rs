//! Blow-up analysis: singular-time estimation, type I/II classification,
//! parabolic and Hamilton rescalings, self-shrinker and translator checks,
//! and least-squares circle fits.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{FlowError, Result};
use crate::flow::{flow_curvature, FlowState};
use crate::point::PlanarPoint;
use crate::scalar::Scalar;
use crate::support::SupportCurve;

/// Number of trailing samples used by [`estimate_blowup_time`].
pub const FIT_WINDOW: usize = 20;
/// Minimal number of samples inside the last decade before classifying.
pub const MIN_DECADE_SAMPLES: usize = 10;
/// Relative growth of `kappa^2 (T - t)` across the last decade that marks a
/// type II singularity.
pub const TYPE_II_GROWTH: f64 = 0.1;

/// Singular time from a least-squares line through `1 / kappa^2` over the
/// last [`FIT_WINDOW`] samples of `(t, max |kappa|)`. `None` when the
/// curvature is not growing.
pub fn estimate_blowup_time(history: &[(f64, f64)]) -> Option<f64> {
    let tail = &history[history.len().saturating_sub(FIT_WINDOW)..];
    if tail.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|(_, k)| k.is_finite() && *k > 0.0)
        .map(|&(t, k)| (t, 1.0 / (k * k)))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    let t_est = mt - my / slope;
    let t_last = pts[pts.len() - 1].0;
    (t_est.is_finite() && t_est > t_last).then_some(t_est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityType {
    TypeI,
    TypeII,
    NoSingularity,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: SingularityType,
    pub t_est: Option<f64>,
    /// `sup kappa^2 (T - t)` over the last decade.
    pub sup_product: Option<f64>,
    pub samples_in_decade: usize,
}

/// Classifies from `(t, max |kappa|)`. The last decade is the set of samples
/// with `T - t <= 10 (T - t_last)`; the singularity is type II when
/// `kappa^2 (T - t)` grows by more than [`TYPE_II_GROWTH`] between the two
/// halves of that decade (in `log (T - t)`).
pub fn classify_singularity(history: &[(f64, f64)], t_est: Option<f64>) -> Classification {
    let Some(t_blow) = t_est.or_else(|| estimate_blowup_time(history)) else {
        return Classification {
            kind: SingularityType::NoSingularity,
            t_est: None,
            sup_product: None,
            samples_in_decade: 0,
        };
    };
    let inconclusive = |count| Classification {
        kind: SingularityType::Inconclusive,
        t_est: Some(t_blow),
        sup_product: None,
        samples_in_decade: count,
    };
    let Some(&(t_last, _)) = history.iter().rfind(|(t, _)| *t < t_blow) else {
        return inconclusive(0);
    };
    let gap = t_blow - t_last;
    let decade: Vec<(f64, f64)> = history
        .iter()
        .filter(|(t, k)| *t < t_blow && t_blow - t <= 10.0 * gap && k.is_finite())
        .map(|&(t, k)| ((t_blow - t).ln(), k * k * (t_blow - t)))
        .collect();
    if decade.len() < MIN_DECADE_SAMPLES {
        return inconclusive(decade.len());
    }
    let mid = gap.ln() + 0.5 * 10f64.ln();
    let early = decade
        .iter()
        .filter(|(l, _)| *l > mid)
        .map(|p| p.1)
        .fold(f64::NAN, f64::max);
    let late = decade
        .iter()
        .filter(|(l, _)| *l <= mid)
        .map(|p| p.1)
        .fold(f64::NAN, f64::max);
    let sup = decade.iter().map(|p| p.1).fold(f64::NAN, f64::max);
    if !(early.is_finite() && late.is_finite()) {
        return inconclusive(decade.len());
    }
    let kind = if late > (1.0 + TYPE_II_GROWTH) * early {
        SingularityType::TypeII
    } else {
        SingularityType::TypeI
    };
    Classification {
        kind,
        t_est: Some(t_blow),
        sup_product: Some(sup),
        samples_in_decade: decade.len(),
    }
}

/// A snapshot mapped to `q (x - origin)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RescaledFrame<T> {
    pub t: f64,
    pub q: f64,
    pub origin: PlanarPoint<T>,
    pub curve: DiscreteCurve<T>,
}

/// Time parameter of the shrinker equation in the parabolic frame with
/// `q = 1 / sqrt(2 (T - t))`.
pub const PARABOLIC_TAU: f64 = -0.5;

/// Parabolic blow-up `x -> (x - origin) / sqrt(2 (T - t))`.
pub fn parabolic_rescale<T: Scalar>(
    curve: &DiscreteCurve<T>,
    origin: PlanarPoint<T>,
    t: f64,
    t_blow: f64,
) -> Result<RescaledFrame<T>> {
    if !(t < t_blow) {
        return Err(FlowError::Domain(format!(
            "parabolic rescaling needs t < T, got t = {t}, T = {t_blow}"
        )));
    }
    let q = 1.0 / (2.0 * (t_blow - t)).sqrt();
    Ok(RescaledFrame {
        t,
        q,
        origin,
        curve: curve.rescaled(origin, T::lit(q)),
    })
}

/// One rung of Hamilton's blow-up ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct HamiltonFrame<T> {
    pub j: usize,
    /// Index of the selected snapshot.
    pub snapshot: usize,
    pub node: usize,
    /// `|kappa|` at the selected point; the rescaling factor.
    pub lambda: f64,
    /// `max |kappa|` over snapshots up to the selected one, divided by `lambda`.
    pub max_past_ratio: f64,
    /// Rescaled curvature at the selected point.
    pub center_kappa: f64,
    pub frame: RescaledFrame<T>,
}

/// For each `j` in `ladder`, selects the point maximizing
/// `kappa^2 (T - 1/j - t)` over snapshots with `t < T - 1/j` and rescales
/// the snapshot by its curvature about that point.
pub fn hamilton_rescale<T: Scalar>(
    snapshots: &[FlowState<T>],
    sigma: &SupportCurve<T>,
    t_blow: f64,
    ladder: &[usize],
) -> Vec<HamiltonFrame<T>> {
    let kappas: Vec<Vec<f64>> = snapshots
        .iter()
        .map(|s| {
            flow_curvature(s, sigma)
                .values
                .iter()
                .map(|k| k.to_f64_lossy())
                .collect()
        })
        .collect();
    let maxima: Vec<f64> = kappas
        .iter()
        .map(|k| k.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let mut frames = Vec::new();
    for &j in ladder.iter().filter(|&&j| j > 0) {
        let horizon = t_blow - 1.0 / j as f64;
        let mut best: Option<(f64, usize, usize)> = None;
        for (si, s) in snapshots.iter().enumerate() {
            let t = s.t.to_f64_lossy();
            if !(t < horizon) {
                continue;
            }
            for (ni, k) in kappas[si].iter().enumerate() {
                let v = k * k * (horizon - t);
                if best.is_none_or(|b| v > b.0) {
                    best = Some((v, si, ni));
                }
            }
        }
        let Some((_, si, ni)) = best else { continue };
        let lambda = kappas[si][ni].abs();
        if !(lambda > 0.0) {
            continue;
        }
        let state = &snapshots[si];
        let t_sel = state.t.to_f64_lossy();
        let past = snapshots
            .iter()
            .zip(&maxima)
            .filter(|(s, _)| s.t.to_f64_lossy() <= t_sel)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max);
        let origin = state.curve.nodes()[ni];
        let curve = state.curve.rescaled(origin, T::lit(lambda));
        // end nodes need the support for their ghost stencil, which is not rescaled
        let interior = curve.is_closed() || (ni > 0 && ni + 1 < curve.len());
        let center_kappa = if interior {
            curve.curvature().values[ni].to_f64_lossy()
        } else {
            kappas[si][ni] / lambda
        };
        frames.push(HamiltonFrame {
            j,
            snapshot: si,
            node: ni,
            lambda,
            max_past_ratio: past / lambda,
            center_kappa,
            frame: RescaledFrame {
                t: t_sel,
                q: lambda,
                origin,
                curve,
            },
        });
    }
    frames
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkerResidual {
    pub values: Vec<f64>,
    /// `(int r^2 ds)^(1/2)`.
    pub l2: f64,
}

/// `kappa - <x, nu> / (2 tau)` along the curve; zero on a self-shrinker.
pub fn self_shrinker_residual<T: Scalar>(
    curve: &DiscreteCurve<T>,
    tau: f64,
) -> Result<ShrinkerResidual> {
    if !(tau < 0.0) {
        return Err(FlowError::Domain(format!(
            "shrinker residual needs tau < 0, got {tau}"
        )));
    }
    let samples = curve.curvature();
    let normals = curve.normals();
    let values: Vec<f64> = curve
        .nodes()
        .iter()
        .zip(&normals)
        .zip(&samples.values)
        .map(|((x, nu), k)| k.to_f64_lossy() - x.dot(*nu).to_f64_lossy() / (2.0 * tau))
        .collect();
    let l2 = values
        .iter()
        .zip(&samples.arclength_weights)
        .map(|(r, w)| r * r * w.to_f64_lossy())
        .sum::<f64>()
        .sqrt();
    Ok(ShrinkerResidual { values, l2 })
}

/// Minimal distance of the grim-reaper window from the asymptotes.
pub const REAPER_MARGIN: f64 = 0.05;

/// Grim reaper `x = -log cos y + tau` on `[y_min, y_max]`, sampled uniformly
/// in arclength from `y_max` down to `y_min`, so that `nu` points along `+x`.
pub fn grim_reaper<T: Scalar>(
    tau: T,
    (y_min, y_max): (T, T),
    n: usize,
) -> Result<DiscreteCurve<T>> {
    let limit = T::FRAC_PI_2() - T::lit(REAPER_MARGIN);
    if !(y_min < y_max && y_min >= -limit && y_max <= limit) {
        return Err(FlowError::Domain(format!(
            "grim reaper window [{y_min}, {y_max}] must lie inside (-pi/2 + {REAPER_MARGIN}, pi/2 - {REAPER_MARGIN})"
        )));
    }
    if n < 2 {
        return Err(FlowError::InvalidInput(
            "grim reaper needs at least 2 nodes".into(),
        ));
    }
    // s = asinh(tan y) is arclength from the vertex; y = atan(sinh s)
    let s_hi = y_max.tan().asinh();
    let s_lo = y_min.tan().asinh();
    let last = T::from_usize_lossy(n - 1);
    let nodes = (0..n)
        .map(|i| {
            let s = s_hi + (s_lo - s_hi) * T::from_usize_lossy(i) / last;
            PlanarPoint::new(s.cosh().ln() + tau, s.sinh().atan())
        })
        .collect();
    DiscreteCurve::new(nodes, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// Root mean square of `|x_i - center| - radius`.
    pub rms: f64,
    /// Set when the nodes are too close to collinear for a finite circle.
    pub is_line: bool,
}

/// Radii beyond this multiple of the point spread are reported as lines.
const LINE_RADIUS_FACTOR: f64 = 1e6;

/// Algebraic (Kasa) circle fit refined by Gauss-Newton on the geometric
/// distances.
pub fn fit_circular_arc<T: Scalar>(curve: &DiscreteCurve<T>) -> CircleFit {
    let pts: Vec<[f64; 2]> = curve
        .nodes()
        .iter()
        .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy()])
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p[0]).sum::<f64>() / n,
        pts.iter().map(|p| p[1]).sum::<f64>() / n,
    );
    let spread = pts
        .iter()
        .map(|p| (p[0] - mx).hypot(p[1] - my))
        .fold(0.0, f64::max);
    let line = CircleFit {
        center: [f64::NAN, f64::NAN],
        radius: f64::INFINITY,
        rms: f64::NAN,
        is_line: true,
    };
    // Kasa: minimize sum (u^2 + v^2 - 2 a u - 2 b v - c)^2 in centered coordinates
    let (mut suu, mut suv, mut svv, mut suuu, mut svvv, mut suvv, mut svuu) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &pts {
        let (u, v) = (p[0] - mx, p[1] - my);
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let det = suu * svv - suv * suv;
    if !(det.abs() > 1e-14 * (suu + svv).powi(2)) {
        return line;
    }
    let r1 = 0.5 * (suuu + suvv);
    let r2 = 0.5 * (svvv + svuu);
    let mut a = (r1 * svv - r2 * suv) / det + mx;
    let mut b = (r2 * suu - r1 * suv) / det + my;
    let mut r = pts.iter().map(|p| (p[0] - a).hypot(p[1] - b)).sum::<f64>() / n;
    for _ in 0..50 {
        // normal equations for (a, b, r) on d_i = |p_i - c| - r
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for p in &pts {
            let (dx, dy) = (p[0] - a, p[1] - b);
            let d = dx.hypot(dy);
            if d == 0.0 {
                continue;
            }
            let row = [-dx / d, -dy / d, -1.0];
            let res = d - r;
            for i in 0..3 {
                jtr[i] += row[i] * res;
                for k in 0..3 {
                    jtj[i][k] += row[i] * row[k];
                }
            }
        }
        let Some(delta) = solve3(jtj, jtr.map(|v| -v)) else {
            break;
        };
        a += delta[0];
        b += delta[1];
        r += delta[2];
        if delta.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-15 * (1.0 + r.abs()) {
            break;
        }
    }
    if !(r.is_finite() && r < LINE_RADIUS_FACTOR * spread) {
        return line;
    }
    let rms = (pts
        .iter()
        .map(|p| ((p[0] - a).hypot(p[1] - b) - r).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    CircleFit {
        center: [a, b],
        radius: r,
        rms,
        is_line: false,
    }
}

/// Cramer's rule for a 3x3 system.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    if !(d.abs() > 0.0) || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = rhs[r];
        }
        *o = det3(&mc) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Boundary;
    use crate::initial::closed_circle;

    type P = PlanarPoint<f64>;

    fn circle_history(r0: f64, ts: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        ts.map(|t| (t, 1.0 / (r0 * r0 - 2.0 * t).sqrt())).collect()
    }

    #[test]
    fn blowup_time_of_shrinking_circle() {
        let h = circle_history(1.0, (0..100).map(|i| 0.49 * i as f64 / 99.0));
        let t = estimate_blowup_time(&h).unwrap();
        assert!((t - 0.5).abs() < 1e-12, "{t}");
        let flat: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, 1.0)).collect();
        assert_eq!(estimate_blowup_time(&flat), None);
    }

    #[test]
    fn circle_is_type_one_with_half_product() {
        // geometric sampling towards T = 0.5
        let h = circle_history(1.0, (0..60).map(|i| 0.5 - 0.5 * 0.85f64.powi(i)));
        let c = classify_singularity(&h, None);
        assert_eq!(c.kind, SingularityType::TypeI);
        assert!((c.sup_product.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn power_growth_is_type_two() {
        // kappa^2 (T - t) = (T - t)^(-1/4) grows without bound
        let h: Vec<(f64, f64)> = (0..80)
            .map(|i| {
                let gap = 0.8f64.powi(i) * 0.1;
                (1.0 - gap, gap.powf(-1.25).sqrt())
            })
            .collect();
        assert_eq!(
            classify_singularity(&h, Some(1.0)).kind,
            SingularityType::TypeII
        );
    }

    #[test]
    fn sparse_history_is_inconclusive() {
        let h = circle_history(1.0, (0..5).map(|i| 0.1 * i as f64));
        assert_eq!(
            classify_singularity(&h, Some(0.5)).kind,
            SingularityType::Inconclusive
        );
        assert_eq!(
            classify_singularity(&[], None).kind,
            SingularityType::NoSingularity
        );
    }

    #[test]
    fn unit_circle_is_a_shrinker_at_minus_half() {
        let c = closed_circle::<f64>(P::zero(), 1.0, 512).unwrap();
        let r = self_shrinker_residual(&c, PARABOLIC_TAU).unwrap();
        assert!(r.l2 < 1e-4, "{}", r.l2);
        let off = closed_circle::<f64>(P::zero(), 2.0, 512).unwrap();
        assert!(self_shrinker_residual(&off, PARABOLIC_TAU).unwrap().l2 > 1.0);
        assert!(matches!(
            self_shrinker_residual(&c, 0.0),
            Err(FlowError::Domain(_))
        ));
    }

    #[test]
    fn parabolic_rescale_of_shrinking_circle_is_unit() {
        let t = 0.3;
        let radius = (1.0f64 - 2.0 * t).sqrt();
        let c = closed_circle::<f64>(P::new(0.5, -1.0), radius, 256).unwrap();
        let f = parabolic_rescale(&c, P::new(0.5, -1.0), t, 0.5).unwrap();
        for p in f.curve.nodes() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        assert!(parabolic_rescale(&c, P::zero(), 0.5, 0.5).is_err());
    }

    #[test]
    fn hamilton_frames_for_circle_snapshots() {
        let sigma = SupportCurve::<f64>::circle(1.0).unwrap();
        let snaps: Vec<FlowState<f64>> = (0..40)
            .map(|i| {
                let t = 0.5 - 0.5 * 0.8f64.powi(i);
                let r = (1.0 - 2.0 * t).sqrt();
                let mut s =
                    FlowState::new(closed_circle(P::zero(), r, 128).unwrap(), Boundary::Closed);
                s.t = t;
                s
            })
            .collect();
        let frames = hamilton_rescale(&snaps, &sigma, 0.5, &[4, 16, 64]);
        assert_eq!(frames.len(), 3);
        for f in &frames {
            assert!(f.max_past_ratio <= 1.0 + 1e-12);
            assert!((f.center_kappa - 1.0).abs() < 1e-3, "{}", f.center_kappa);
        }
    }

    #[test]
    fn grim_reaper_is_a_translator() {
        let g = grim_reaper(0.0f64, (-1.2, 1.2), 400).unwrap();
        let k = g.curvature();
        let nu = g.normals();
        // kappa = <nu, e_x> on a unit-speed translator
        for i in 1..g.len() - 1 {
            assert!((k.values[i] - nu[i].x).abs() < 1e-4, "{i}");
        }
        assert!(nu[200].x > 0.99);
        let seg = g.segment_lengths();
        let (lo, hi) = (
            seg.iter().cloned().fold(f64::MAX, f64::min),
            g.max_segment(),
        );
        // uniform in arclength; chords are shorter by kappa^2 h^2 / 24
        assert!(hi / lo < 1.0 + 1e-5);
        assert!(grim_reaper(0.0f64, (-1.55, 1.0), 10).is_err());
    }

    #[test]
    fn circle_fit_recovers_arc_and_flags_lines() {
        let pts: Vec<P> = (0..50)
            .map(|i| P::new(2.0, 3.0) + P::polar(0.3 + 1.5 * i as f64 / 49.0) * 0.7)
            .collect();
        let f = fit_circular_arc(&DiscreteCurve::new(pts, false).unwrap());
        assert!(!f.is_line);
        assert!((f.radius - 0.7).abs() < 1e-10 && f.rms < 1e-10);
        assert!((f.center[0] - 2.0).abs() < 1e-10 && (f.center[1] - 3.0).abs() < 1e-10);
        let line = DiscreteCurve::new(
            (0..10).map(|i| P::new(i as f64, 2.0 * i as f64)).collect(),
            false,
        )
        .unwrap();
        assert!(fit_circular_arc(&line).is_line);
    }
}
