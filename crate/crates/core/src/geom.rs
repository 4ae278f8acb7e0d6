//! Planar geometry primitives: 2D vectors and normalized angles.
//!
//! Every angle in this crate is stored normalized to the half-open interval
//! `(-π, π]`. Degrees appear only at external boundaries (config files, CLI
//! flags, exports); everything internal is radians.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeomError {
    #[error("angle value {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("length {0} is negative or not finite")]
    InvalidLength(f64),
}

/// An angle in radians, always normalized to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Builds a normalized angle from raw radians.
    pub fn from_radians(raw: f64) -> Result<Angle, GeomError> {
        if !raw.is_finite() {
            return Err(GeomError::NonFiniteAngle(raw));
        }
        Ok(Angle::wrap(raw))
    }

    /// Builds a normalized angle from degrees.
    pub fn from_degrees(deg: f64) -> Result<Angle, GeomError> {
        Angle::from_radians(deg.to_radians())
    }

    /// Normalizes a finite raw radian value into `(-π, π]`.
    ///
    /// Internal constructor for values that are finite by construction
    /// (e.g. `atan2` results).
    pub(crate) fn wrap(raw: f64) -> Angle {
        debug_assert!(raw.is_finite());
        let r = raw.rem_euclid(2.0 * PI); // [0, 2π)
        Angle(if r > PI { r - 2.0 * PI } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    /// Signed shortest angular distance `self - other`, in `(-π, π]`.
    pub fn signed_distance(self, other: Angle) -> f64 {
        Angle::wrap(self.0 - other.0).radians()
    }

    /// `self + delta` radians, renormalized.
    pub fn offset(self, delta: f64) -> Result<Angle, GeomError> {
        Angle::from_radians(self.0 + delta)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// Normalizes raw radians into `(-π, π]`.
pub fn normalize_angle(raw: f64) -> Result<Angle, GeomError> {
    Angle::from_radians(raw)
}

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Vec2 {
        Vec2 { x, y }
    }

    /// Displacement of `length` along `angle`. Infallible; callers validate
    /// lengths at construction time.
    pub(crate) fn from_polar(length: f64, angle: Angle) -> Vec2 {
        Vec2::new(length * angle.cos(), length * angle.sin())
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counter-clockwise from `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Left-hand perpendicular: rotates the vector +90°.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Direction angle via `atan2`; `None` for the zero vector.
    pub fn angle(self) -> Option<Angle> {
        if self.x == 0.0 && self.y == 0.0 {
            None
        } else {
            Some(Angle::wrap(self.y.atan2(self.x)))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Checked polar-to-Cartesian conversion: requires a finite, non-negative
/// length.
pub fn polar(length: f64, angle: Angle) -> Result<Vec2, GeomError> {
    if !length.is_finite() || length < 0.0 {
        return Err(GeomError::InvalidLength(length));
    }
    Ok(Vec2::from_polar(length, angle))
}
