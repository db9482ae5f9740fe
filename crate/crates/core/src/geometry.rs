//! Poses, angle arithmetic and axis-aligned geometry.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(theta: T) -> Result<T> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    Ok(wrap_finite(theta))
}

/// Like [`wrap_angle`] for callers that already hold a finite value. NaN passes through.
#[inline]
pub(crate) fn wrap_finite<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    if theta > -pi && theta <= pi {
        return theta;
    }
    let mut r = theta % two_pi;
    if r <= -pi {
        r = r + two_pi;
    } else if r > pi {
        r = r - two_pi;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn get(self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// 4-DoF robot state in the inertial frame. Roll and pitch are fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    /// Yaw about inertial Z, kept in `(-π, π]`.
    pub theta: T,
}

impl<T: Real> Pose<T> {
    /// Builds a pose, wrapping `theta`.
    pub fn new(x: T, y: T, z: T, theta: T) -> Self {
        Self { x, y, z, theta: wrap_finite(theta) }
    }

    pub fn try_new(x: T, y: T, z: T, theta: T) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("pose position"));
        }
        Ok(Self { x, y, z, theta: wrap_angle(theta)? })
    }

    #[inline]
    pub fn position(&self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Euclidean distance between the positions of two poses.
    #[inline]
    pub fn distance(&self, other: &Self) -> T {
        (self.position() - other.position()).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.position().is_finite() && self.theta.is_finite()
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.x, self.y, self.z, self.theta]
    }

    pub fn cast<U: Real>(&self) -> Pose<U> {
        Pose {
            x: U::lit(self.x.to_f64_lossy()),
            y: U::lit(self.y.to_f64_lossy()),
            z: U::lit(self.z.to_f64_lossy()),
            theta: U::lit(self.theta.to_f64_lossy()),
        }
    }
}

/// Axis-aligned box given by its min and max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::NonFinite("box corner"));
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::InvalidArgument(format!("box min {min:?} exceeds max {max:?}")));
        }
        Ok(Self { min, max })
    }

    /// Box from a floor-plane center, footprint size and vertical extent.
    pub fn from_center_size(center: Vec3<T>, size: Vec3<T>) -> Result<Self> {
        let h = size * T::half();
        Self::new(center - h, center + h)
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::half()
    }

    pub fn size(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, other: &Aabb<T>) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    /// Euclidean distance from a point to the box (zero inside).
    pub fn distance_to_point(&self, p: Vec3<T>) -> T {
        let d = |v: T, lo: T, hi: T| {
            if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                T::zero()
            }
        };
        Vec3::new(d(p.x, self.min.x, self.max.x), d(p.y, self.min.y, self.max.y), d(p.z, self.min.z, self.max.z))
            .norm()
    }

    /// Slab test for the segment `a + t (b - a)`, `t ∈ [0, 1]`.
    pub fn intersects_segment(&self, a: Vec3<T>, b: Vec3<T>) -> bool {
        let d = b - a;
        let mut t0 = T::zero();
        let mut t1 = T::one();
        for axis in 0..3 {
            let o = a.get(axis);
            let dir = d.get(axis);
            let lo = self.min.get(axis);
            let hi = self.max.get(axis);
            if dir == T::zero() {
                if o < lo || o > hi {
                    return false;
                }
                continue;
            }
            let inv = T::one() / dir;
            let mut ta = (lo - o) * inv;
            let mut tb = (hi - o) * inv;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
        true
    }

    /// Minimum distance between the segment `[a, b]` and the box.
    pub fn distance_to_segment(&self, a: Vec3<T>, b: Vec3<T>) -> T {
        if self.intersects_segment(a, b) {
            return T::zero();
        }
        // Distance to a convex set along an affine path is convex in t.
        let f = |t: T| self.distance_to_point(a + (b - a) * t);
        let inv_phi = T::lit(0.618_033_988_749_894_8);
        let (mut lo, mut hi) = (T::zero(), T::one());
        let mut x1 = hi - (hi - lo) * inv_phi;
        let mut x2 = lo + (hi - lo) * inv_phi;
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - (hi - lo) * inv_phi;
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + (hi - lo) * inv_phi;
                f2 = f(x2);
            }
        }
        f(T::zero()).min(f(T::one())).min(f1).min(f2)
    }

    /// Rotates the box by a multiple of 90° about a vertical axis through `(cx, cy)`.
    pub fn rotate_quarter_turns(&self, cx: T, cy: T, turns: i32) -> Self {
        let rot = |p: Vec3<T>| {
            let (mut x, mut y) = (p.x - cx, p.y - cy);
            for _ in 0..turns.rem_euclid(4) {
                let nx = -y;
                y = x;
                x = nx;
            }
            Vec3::new(x + cx, y + cy, p.z)
        };
        let a = rot(self.min);
        let b = rot(self.max);
        Self {
            min: Vec3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
            max: Vec3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
        }
    }
}
