//! Periodic cubic splines, used to turn a table of support points into a
//! smooth closed curve.

use crate::error::{FlowError, Result};
use crate::point::PlanarPoint;
use crate::scalar::Scalar;

/// Interpolating periodic cubic spline `t -> R^2` with period
/// `knots[n] - knots[0]`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline<T> {
    knots: Vec<T>,
    values: Vec<PlanarPoint<T>>,
    second: Vec<PlanarPoint<T>>,
}

impl<T: Scalar> PeriodicSpline<T> {
    /// `knots` holds `n + 1` strictly increasing parameters, the last one
    /// closing the period; `values` holds the `n` node values.
    pub fn new(knots: Vec<T>, values: Vec<PlanarPoint<T>>) -> Result<Self> {
        let n = values.len();
        if n < 3 || knots.len() != n + 1 {
            return Err(FlowError::InvalidSupport(format!(
                "periodic spline needs n >= 3 values and n + 1 knots, got {n} and {}",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FlowError::InvalidSupport(
                "spline knots must be strictly increasing".into(),
            ));
        }
        let h: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let six = T::lit(6.0);
        let two = T::lit(2.0);
        let mut sub = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        let mut sup = vec![T::zero(); n];
        let mut rx = vec![T::zero(); n];
        let mut ry = vec![T::zero(); n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hn = h[i];
            sub[i] = hp;
            diag[i] = two * (hp + hn);
            sup[i] = hn;
            let next = values[(i + 1) % n];
            let prev = values[(i + n - 1) % n];
            let d = (next - values[i]) * (six / hn) - (values[i] - prev) * (six / hp);
            rx[i] = d.x;
            ry[i] = d.y;
        }
        let mx = solve_cyclic(&sub, &diag, &sup, &rx);
        let my = solve_cyclic(&sub, &diag, &sup, &ry);
        let second = mx
            .into_iter()
            .zip(my)
            .map(|(x, y)| PlanarPoint::new(x, y))
            .collect();
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn period(&self) -> T {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    fn locate(&self, t: T) -> (usize, T) {
        let p = self.period();
        let t0 = self.knots[0];
        let mut u = (t - t0) % p;
        if u < T::zero() {
            u = u + p;
        }
        let u = u + t0;
        let n = self.values.len();
        let idx = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&u).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        (idx, u)
    }

    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: T) -> (PlanarPoint<T>, PlanarPoint<T>, PlanarPoint<T>) {
        let (i, u) = self.locate(t);
        let n = self.values.len();
        let j = (i + 1) % n;
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - u) / h;
        let b = (u - self.knots[i]) / h;
        let six = T::lit(6.0);
        let three = T::lit(3.0);
        let (yi, yj) = (self.values[i], self.values[j]);
        let (mi, mj) = (self.second[i], self.second[j]);
        let value = yi * a + yj * b + (mi * (a * a * a - a) + mj * (b * b * b - b)) * (h * h / six);
        let d1 = (yj - yi) * h.recip() - mi * ((three * a * a - T::one()) * h / six)
            + mj * ((three * b * b - T::one()) * h / six);
        let d2 = mi * a + mj * b;
        (value, d1, d2)
    }
}

/// Solves the cyclic tridiagonal system
/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` (indices mod n)
/// with the Sherman-Morrison correction.
pub fn solve_cyclic<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let gamma = -diag[0];
    let alpha = sup[n - 1];
    let beta = sub[0];
    let mut b = diag.to_vec();
    b[0] = diag[0] - gamma;
    b[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &b, sup, rhs);
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &b, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (T::one() + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect()
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { T::zero() };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Gauss-Legendre quadrature of `f` over `[lo, hi]`.
pub fn gauss_legendre<T: Scalar>(lo: T, hi: T, f: impl Fn(T) -> T) -> T {
    let half = (hi - lo) * T::lit(0.5);
    let mid = (hi + lo) * T::lit(0.5);
    GL8.iter()
        .map(|&(x, w)| f(mid + half * T::lit(x)) * T::lit(w))
        .sum::<T>()
        * half
}
