use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::real::Real;

/// Pinhole intrinsics. Pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera<T> {
    width: usize,
    height: usize,
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> Camera<T> {
    pub fn new(width: usize, height: usize, fx: T, fy: T, cx: T, cy: T) -> Result<Self> {
        if width < 8 || height < 8 {
            return Err(Error::InvalidConfig(format!("camera must be at least 8x8, got {width}x{height}")));
        }
        if !(fx > T::zero() && fy > T::zero()) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::InvalidConfig("focal lengths must be positive and finite".into()));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::NonFinite("principal point"));
        }
        Ok(Self { width, height, fx, fy, cx, cy })
    }

    /// Square-pixel camera with the given horizontal field of view, centered principal point.
    pub fn with_hfov(width: usize, height: usize, hfov: T) -> Result<Self> {
        if !(hfov > T::zero() && hfov < T::PI()) {
            return Err(Error::InvalidConfig("horizontal fov must lie in (0, π)".into()));
        }
        let w = T::from_usize_lossy(width);
        let h = T::from_usize_lossy(height);
        let f = w * T::half() / (hfov * T::half()).tan();
        Self::new(width, height, f, f, w * T::half(), h * T::half())
    }

    /// Default 64×48 planner view, 90° horizontal field of view.
    pub fn planner() -> Self {
        Self::with_hfov(64, 48, T::FRAC_PI_2()).expect("valid default camera")
    }

    /// Default 256×192 measurement and goal view, 90° horizontal field of view.
    pub fn measurement() -> Self {
        Self::with_hfov(256, 192, T::FRAC_PI_2()).expect("valid default camera")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Same field of view at a different resolution.
    pub fn rescaled(&self, width: usize, height: usize) -> Result<Self> {
        let sx = T::from_usize_lossy(width) / T::from_usize_lossy(self.width);
        let sy = T::from_usize_lossy(height) / T::from_usize_lossy(self.height);
        Self::new(width, height, self.fx * sx, self.fy * sy, self.cx * sx, self.cy * sy)
    }
}

/// Camera extrinsics for a pose. The optical axis is body +X; image right is body -Y, image down is -Z.
#[derive(Debug, Clone, Copy)]
pub struct View<T> {
    pub origin: Vec3<T>,
    pub right: Vec3<T>,
    pub down: Vec3<T>,
    pub forward: Vec3<T>,
}

impl<T: Real> View<T> {
    pub fn from_pose(pose: &Pose<T>) -> Self {
        let (s, c) = pose.theta.sin_cos();
        Self {
            origin: pose.position(),
            right: Vec3::new(s, -c, T::zero()),
            down: Vec3::new(T::zero(), T::zero(), -T::one()),
            forward: Vec3::new(c, s, T::zero()),
        }
    }

    /// World point to camera coordinates `(right, down, forward)`.
    #[inline]
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        let d = p - self.origin;
        Vec3::new(self.right.dot(d), self.down.dot(d), self.forward.dot(d))
    }

    /// Unnormalized world direction of the ray through a pixel-plane point.
    #[inline]
    pub fn ray(&self, camera: &Camera<T>, u: T, v: T) -> Vec3<T> {
        let xn = (u - camera.cx) / camera.fx;
        let yn = (v - camera.cy) / camera.fy;
        self.right * xn + self.down * yn + self.forward
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate() {
        assert!(Camera::<f64>::new(64, 48, 0.0, 10.0, 32.0, 24.0).is_err());
        assert!(Camera::<f64>::new(4, 48, 10.0, 10.0, 2.0, 24.0).is_err());
        let c = Camera::<f64>::planner();
        assert!((c.fx - 32.0).abs() < 1e-12);
        assert!((c.rescaled(256, 192).unwrap().fx - 128.0).abs() < 1e-9);
    }

    #[test]
    fn view_axes() {
        let v = View::from_pose(&Pose::new(1.0, 2.0, 1.0, 0.0f64));
        let p = v.to_camera(Vec3::new(3.0, 1.0, 0.5));
        assert_eq!(p, Vec3::new(1.0, 0.5, 2.0));
    }
}
