use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

/// A point (or vector) of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at angle `theta`.
    #[inline]
    pub fn polar(theta: T) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Rotation by +pi/2 (the operator `J`).
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Normalized copy; the zero vector maps to itself.
    #[inline]
    pub fn unit(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self * n.recip()
        } else {
            self
        }
    }

    #[inline]
    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn lerp(self, o: Self, u: T) -> Self {
        self + (o - self) * u
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar angle in `(-pi, pi]`.
    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn cast<U: Scalar>(self) -> PlanarPoint<U> {
        PlanarPoint::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for PlanarPoint<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for PlanarPoint<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for PlanarPoint<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Scalar> Neg for PlanarPoint<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> AddAssign for PlanarPoint<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x = self.x + o.x;
        self.y = self.y + o.y;
    }
}

impl<T: Scalar> SubAssign for PlanarPoint<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x = self.x - o.x;
        self.y = self.y - o.y;
    }
}

// Points travel as `[x, y]` pairs.
impl<T: Scalar> Serialize for PlanarPoint<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for PlanarPoint<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[T; 2]>::deserialize(d)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(D::Error::custom("non-finite coordinate"));
        }
        Ok(Self::new(x, y))
    }
}
