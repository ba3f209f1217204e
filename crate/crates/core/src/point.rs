use std::ops::{Add, Mul, Sub};

use crate::num::Real;

/// Horizontal position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Point2<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> F {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> F {
        self.dot(self)
    }

    pub fn norm(self) -> F {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> F {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Self) -> F {
        (self - other).norm_sq()
    }

    /// `self + t (other - self)`
    pub fn lerp(self, other: Self, t: F) -> Self {
        self + (other - self) * t
    }

    pub fn cast<G: Real>(self) -> Point2<G> {
        Point2::new(G::lit(self.x.as_f64()), G::lit(self.y.as_f64()))
    }
}

impl<F: Real> Add for Point2<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<F: Real> Sub for Point2<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<F: Real> Mul<F> for Point2<F> {
    type Output = Self;
    fn mul(self, k: F) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}
