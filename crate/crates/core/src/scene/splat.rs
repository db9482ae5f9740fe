//! Forward-only Gaussian splat rasterizer.
//!
//! Each Gaussian's 3-D covariance is pushed through the pinhole Jacobian to a
//! 2-D footprint truncated at three standard deviations. Footprints are sorted
//! globally by camera-space depth and alpha-composited front to back.

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::image::Image;
use crate::real::Real;

use super::camera::{Camera, View};
use super::procedural::ColoredBox;

const NEAR: f64 = 0.05;
/// Squared Mahalanobis cutoff (3σ).
const CUTOFF_SQ: f64 = 9.0;
/// Pixels whose transmittance falls below this stop blending; the skipped contribution
/// is bounded by it per channel.
const MIN_TRANSMITTANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian3D<T> {
    pub mean: Vec3<T>,
    pub scale: Vec3<T>,
    /// Unit quaternion `(w, x, y, z)`.
    pub rotation: [T; 4],
    pub opacity: T,
    pub color: [T; 3],
}

impl<T: Real> Gaussian3D<T> {
    /// Validates the invariants and normalizes the quaternion.
    pub fn new(mean: Vec3<T>, scale: Vec3<T>, rotation: [T; 4], opacity: T, color: [T; 3]) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::NonFinite("gaussian mean"));
        }
        if !(scale.x > T::zero() && scale.y > T::zero() && scale.z > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidArgument("gaussian scale must be positive".into()));
        }
        let n = rotation.iter().map(|q| *q * *q).sum::<T>().sqrt();
        if !(n > T::epsilon()) || !n.is_finite() {
            return Err(Error::InvalidArgument("gaussian rotation has zero norm".into()));
        }
        let in01 = |v: T| v >= T::zero() && v <= T::one();
        if !in01(opacity) || !color.iter().all(|c| in01(*c)) {
            return Err(Error::InvalidArgument("opacity and color must lie in [0, 1]".into()));
        }
        Ok(Self { mean, scale, rotation: rotation.map(|q| q / n), opacity, color })
    }

    /// Isotropic splat with identity rotation.
    pub fn isotropic(mean: Vec3<T>, sigma: T, opacity: T, color: [T; 3]) -> Result<Self> {
        Self::new(mean, Vec3::new(sigma, sigma, sigma), [T::one(), T::zero(), T::zero(), T::zero()], opacity, color)
    }

    /// World covariance `R S Sᵀ Rᵀ` as `[xx, xy, xz, yy, yz, zz]`.
    pub fn covariance(&self) -> [T; 6] {
        let [w, x, y, z] = self.rotation;
        let two = T::two();
        let r = [
            [T::one() - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
            [two * (x * y + w * z), T::one() - two * (x * x + z * z), two * (y * z - w * x)],
            [two * (x * z - w * y), two * (y * z + w * x), T::one() - two * (x * x + y * y)],
        ];
        let s2 = [self.scale.x * self.scale.x, self.scale.y * self.scale.y, self.scale.z * self.scale.z];
        let e = |i: usize, j: usize| (0..3).map(|k| r[i][k] * s2[k] * r[j][k]).sum::<T>();
        [e(0, 0), e(0, 1), e(0, 2), e(1, 1), e(1, 2), e(2, 2)]
    }
}

/// Splat set with cached world covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatCloud<T> {
    gaussians: Vec<Gaussian3D<T>>,
    covariances: Vec<[T; 6]>,
    /// Largest axis scale of each splat.
    max_scales: Vec<T>,
}

impl<T: Real> SplatCloud<T> {
    pub fn new(gaussians: Vec<Gaussian3D<T>>) -> Self {
        let covariances = gaussians.iter().map(Gaussian3D::covariance).collect();
        let max_scales = gaussians.iter().map(|g| g.scale.x.max(g.scale.y).max(g.scale.z)).collect();
        Self { gaussians, covariances, max_scales }
    }

    pub fn gaussians(&self) -> &[Gaussian3D<T>] {
        &self.gaussians
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }
}

/// Screen-space footprint of one splat.
#[derive(Debug, Clone, Copy)]
pub struct Footprint<T> {
    pub index: usize,
    pub depth: T,
    pub u: T,
    pub v: T,
    /// Inverse 2-D covariance `[a, b, c]` for `a dx² + 2 b dx dy + c dy²`.
    pub conic: [T; 3],
    /// Inclusive pixel bounds `(x0, x1, y0, y1)`.
    pub rect: (usize, usize, usize, usize),
}

/// Cheap rejection before the covariance transform. The Frobenius norm of the projection
/// Jacobian bounds its spectral norm, so `3 · max_scale · ‖J‖_F` bounds the footprint
/// radius [`project`] computes; a splat rejected here would have been off-screen there too.
fn surely_offscreen<T: Real>(mean: Vec3<T>, max_scale: T, view: &View<T>, cam: &Camera<T>) -> bool {
    let p = view.to_camera(mean);
    if p.z < T::lit(NEAR) {
        return true;
    }
    let iz = T::one() / p.z;
    let (xn, yn) = (p.x * iz, p.y * iz);
    let jf2 = (cam.fx * cam.fx * (T::one() + xn * xn) + cam.fy * cam.fy * (T::one() + yn * yn)) * iz * iz;
    let r = T::lit(CUTOFF_SQ).sqrt() * max_scale * jf2.sqrt() + T::one();
    let u = cam.cx + cam.fx * xn;
    let v = cam.cy + cam.fy * yn;
    let w = T::from_usize_lossy(cam.width());
    let h = T::from_usize_lossy(cam.height());
    u + r < T::zero() || v + r < T::zero() || u - r > w || v - r > h
}

/// Projects one splat; `None` when it is behind the near plane, degenerate, or off-screen.
pub fn project<T: Real>(index: usize, cov: &[T; 6], mean: Vec3<T>, view: &View<T>, cam: &Camera<T>) -> Option<Footprint<T>> {
    let p = view.to_camera(mean);
    if p.z < T::lit(NEAR) {
        return None;
    }
    let [sxx, sxy, sxz, syy, syz, szz] = *cov;
    let m = [[sxx, sxy, sxz], [sxy, syy, syz], [sxz, syz, szz]];
    // Camera covariance W Σ Wᵀ with rows of W = right, down, forward.
    let rows = [view.right.to_array(), view.down.to_array(), view.forward.to_array()];
    let mut ws = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ws[i][j] = (0..3).map(|k| rows[i][k] * m[k][j]).sum();
        }
    }
    let mut c = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| ws[i][k] * rows[j][k]).sum();
        }
    }
    let iz = T::one() / p.z;
    let j0 = [cam.fx * iz, T::zero(), -cam.fx * p.x * iz * iz];
    let j1 = [T::zero(), cam.fy * iz, -cam.fy * p.y * iz * iz];
    let quad = |a: &[T; 3], b: &[T; 3]| {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + a[i] * c[i][j] * b[j];
            }
        }
        s
    };
    let a = quad(&j0, &j0);
    let b = quad(&j0, &j1);
    let cc = quad(&j1, &j1);
    let det = a * cc - b * b;
    if !(det > T::lit(1e-12)) {
        return None;
    }
    let conic = [cc / det, -b / det, a / det];
    let u = cam.cx + cam.fx * p.x * iz;
    let v = cam.cy + cam.fy * p.y * iz;
    let half_tr = (a + cc) * T::half();
    let lambda = half_tr + (((a - cc) * T::half()).powi(2) + b * b).sqrt();
    let r = T::lit(CUTOFF_SQ).sqrt() * lambda.sqrt();
    let w = T::from_usize_lossy(cam.width());
    let h = T::from_usize_lossy(cam.height());
    let x_lo = (u - r - T::half()).ceil().max(T::zero());
    let x_hi = (u + r - T::half()).floor().min(w - T::one());
    let y_lo = (v - r - T::half()).ceil().max(T::zero());
    let y_hi = (v + r - T::half()).floor().min(h - T::one());
    if !(x_lo <= x_hi && y_lo <= y_hi) {
        return None;
    }
    Some(Footprint {
        index,
        depth: p.z,
        u,
        v,
        conic,
        rect: (x_lo.to_usize()?, x_hi.to_usize()?, y_lo.to_usize()?, y_hi.to_usize()?),
    })
}

/// Result of compositing, kept separate from the clamped image for diagnostics.
#[derive(Debug, Clone)]
pub struct SplatFrame<T> {
    pub width: usize,
    pub height: usize,
    /// Composited color including the background term.
    pub color: Vec<[T; 3]>,
    /// Sum of blend weights per pixel.
    pub accumulated: Vec<T>,
    /// Remaining transmittance per pixel.
    pub transmittance: Vec<T>,
}

impl<T: Real> SplatFrame<T> {
    pub fn into_image(self) -> Image<T> {
        Image::from_clamped(self.width, self.height, self.color)
    }
}

pub fn composite<T: Real>(cloud: &SplatCloud<T>, background: [T; 3], cam: &Camera<T>, view: &View<T>) -> SplatFrame<T> {
    let (w, h) = (cam.width(), cam.height());
    let mut footprints: Vec<Footprint<T>> = cloud
        .gaussians
        .iter()
        .zip(&cloud.covariances)
        .zip(&cloud.max_scales)
        .enumerate()
        .filter(|(_, ((g, _), s))| g.opacity > T::zero() && !surely_offscreen(g.mean, **s, view, cam))
        .filter_map(|(i, ((g, cov), _))| project(i, cov, g.mean, view, cam))
        .collect();
    footprints.sort_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap_or(std::cmp::Ordering::Equal).then(a.index.cmp(&b.index)));

    let mut color = vec![[T::zero(); 3]; w * h];
    let mut acc = vec![T::zero(); w * h];
    let mut trans = vec![T::one(); w * h];
    let cutoff = T::lit(CUTOFF_SQ);
    let t_min = T::lit(MIN_TRANSMITTANCE);
    let neg_half = -T::half();
    for f in &footprints {
        let g = &cloud.gaussians[f.index];
        let [ca, cb, cc] = f.conic;
        let (x0, x1, y0, y1) = f.rect;
        for j in y0..=y1 {
            let dy = T::from_usize_lossy(j) + T::half() - f.v;
            let row = j * w;
            for i in x0..=x1 {
                let dx = T::from_usize_lossy(i) + T::half() - f.u;
                let d2 = ca * dx * dx + T::two() * cb * dx * dy + cc * dy * dy;
                if d2 > cutoff {
                    continue;
                }
                let idx = row + i;
                let t = trans[idx];
                if t < t_min {
                    continue;
                }
                let alpha = g.opacity * (neg_half * d2).exp();
                let wgt = alpha * t;
                let px = &mut color[idx];
                for k in 0..3 {
                    px[k] = px[k] + wgt * g.color[k];
                }
                acc[idx] = acc[idx] + wgt;
                trans[idx] = t * (T::one() - alpha);
            }
        }
    }
    for (px, t) in color.iter_mut().zip(&trans) {
        for k in 0..3 {
            px[k] = px[k] + *t * background[k];
        }
    }
    SplatFrame { width: w, height: h, color, accumulated: acc, transmittance: trans }
}

/// Samples flat splats over every box face that looks into `bounds`, on a lattice of the given spacing.
pub fn splatify<T: Real>(boxes: &[ColoredBox<T>], bounds: &Aabb<T>, spacing: T, opacity: T) -> Result<Vec<Gaussian3D<T>>> {
    if !(spacing > T::zero()) {
        return Err(Error::InvalidArgument("splat spacing must be positive".into()));
    }
    let thin = T::lit(0.005);
    let sigma = spacing * T::lit(0.6);
    let mut out = Vec::new();
    for b in boxes {
        for axis in 0..3 {
            for side in [false, true] {
                let (u_axis, v_axis) = ((axis + 1) % 3, (axis + 2) % 3);
                let plane = if side { b.aabb.max.get(axis) } else { b.aabb.min.get(axis) };
                let normal = if side { T::one() } else { -T::one() };
                let center = b.aabb.center();
                let mut probe = center.to_array();
                probe[axis] = plane + normal * T::lit(1e-3);
                if !bounds.contains(Vec3::from_array(probe)) {
                    continue;
                }
                let span = |ax: usize| (b.aabb.min.get(ax), b.aabb.max.get(ax));
                let (u0, u1) = span(u_axis);
                let (v0, v1) = span(v_axis);
                let nu = ((u1 - u0) / spacing).ceil().to_usize().unwrap_or(1).max(1);
                let nv = ((v1 - v0) / spacing).ceil().to_usize().unwrap_or(1).max(1);
                let du = (u1 - u0) / T::from_usize_lossy(nu);
                let dv = (v1 - v0) / T::from_usize_lossy(nv);
                let shade = [T::lit(0.85), T::lit(0.72), T::one()][axis];
                let color = b.color.map(|c| (c * shade).min(T::one()));
                for iu in 0..nu {
                    for iv in 0..nv {
                        let mut m = [T::zero(); 3];
                        m[axis] = plane;
                        m[u_axis] = u0 + du * (T::from_usize_lossy(iu) + T::half());
                        m[v_axis] = v0 + dv * (T::from_usize_lossy(iv) + T::half());
                        let mut s = [T::zero(); 3];
                        s[axis] = thin;
                        s[u_axis] = sigma.max(du * T::lit(0.6));
                        s[v_axis] = sigma.max(dv * T::lit(0.6));
                        out.push(Gaussian3D::new(
                            Vec3::from_array(m),
                            Vec3::from_array(s),
                            [T::one(), T::zero(), T::zero(), T::zero()],
                            opacity,
                            color,
                        )?);
                    }
                }
            }
        }
    }
    Ok(out)
}
