//! Analytic ray caster for scenes made of flat-shaded axis-aligned boxes.

use crate::geometry::{Aabb, Vec3};
use crate::image::Image;
use crate::real::Real;

use super::camera::{Camera, View};

/// Brightness of a face seen edge-on; faces seen head-on are at full brightness.
const AMBIENT: f64 = 0.85;

/// Headlight shading: depends only on the angle between the ray and the face normal,
/// so rendering commutes with rigid motions of scene and camera together.
#[inline]
pub(crate) fn headlight<T: Real>(d: Vec3<T>, axis: usize) -> T {
    let a = T::lit(AMBIENT);
    a + (T::one() - a) * d.get(axis).abs() / d.norm()
}
const NEAR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredBox<T> {
    pub aabb: Aabb<T>,
    pub color: [T; 3],
}

impl<T: Real> ColoredBox<T> {
    pub fn new(aabb: Aabb<T>, color: [T; 3]) -> Self {
        Self { aabb, color: color.map(|c| c.max(T::zero()).min(T::one())) }
    }
}

/// Ray/box hit: distance along the ray and the axis of the face hit.
#[inline]
pub(crate) fn ray_box<T: Real>(o: Vec3<T>, d: Vec3<T>, b: &Aabb<T>) -> Option<(T, usize)> {
    let mut t_near = T::neg_infinity();
    let mut t_far = T::infinity();
    let mut near_axis = 0;
    let mut far_axis = 0;
    for axis in 0..3 {
        let oa = o.get(axis);
        let da = d.get(axis);
        let lo = b.min.get(axis);
        let hi = b.max.get(axis);
        if da == T::zero() {
            if oa < lo || oa > hi {
                return None;
            }
            continue;
        }
        let inv = T::one() / da;
        let mut t0 = (lo - oa) * inv;
        let mut t1 = (hi - oa) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            near_axis = axis;
        }
        if t1 < t_far {
            t_far = t1;
            far_axis = axis;
        }
        if t_near > t_far {
            return None;
        }
    }
    let near = T::lit(NEAR);
    if t_near > near {
        Some((t_near, near_axis))
    } else if t_far > near {
        Some((t_far, far_axis))
    } else {
        None
    }
}

/// Conservative pixel rectangle `(x0, x1, y0, y1)` (inclusive) covered by a box, or `None` if
/// the box is entirely behind the camera.
fn screen_rect<T: Real>(b: &Aabb<T>, view: &View<T>, cam: &Camera<T>) -> Option<(usize, usize, usize, usize)> {
    let full = Some((0, cam.width() - 1, 0, cam.height() - 1));
    let near = T::lit(1e-3);
    let mut umin = T::infinity();
    let mut umax = T::neg_infinity();
    let mut vmin = T::infinity();
    let mut vmax = T::neg_infinity();
    let mut behind = 0;
    for i in 0..8 {
        let p = Vec3::new(
            if i & 1 == 0 { b.min.x } else { b.max.x },
            if i & 2 == 0 { b.min.y } else { b.max.y },
            if i & 4 == 0 { b.min.z } else { b.max.z },
        );
        let c = view.to_camera(p);
        if c.z <= near {
            behind += 1;
            continue;
        }
        let u = cam.cx + cam.fx * c.x / c.z;
        let v = cam.cy + cam.fy * c.y / c.z;
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if behind == 8 {
        return None;
    }
    if behind > 0 {
        return full;
    }
    let w = T::from_usize_lossy(cam.width());
    let h = T::from_usize_lossy(cam.height());
    if umax < T::zero() || vmax < T::zero() || umin > w || vmin > h {
        return None;
    }
    let lo = |v: T| (v - T::half()).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let hi = |v: T, n: usize| {
        let f = (v - T::half()).floor();
        if f < T::zero() {
            None
        } else {
            Some(f.to_usize().unwrap_or(n - 1).min(n - 1))
        }
    };
    let x0 = lo(umin);
    let y0 = lo(vmin);
    let x1 = hi(umax, cam.width())?;
    let y1 = hi(vmax, cam.height())?;
    if x0 > x1 || y0 > y1 {
        return None;
    }
    Some((x0, x1, y0, y1))
}

/// Nearest-hit ray cast of every pixel against the box list.
pub fn render_boxes<T: Real>(boxes: &[ColoredBox<T>], background: [T; 3], camera: &Camera<T>, view: &View<T>) -> Image<T> {
    let (w, h) = (camera.width(), camera.height());
    let mut rays = Vec::with_capacity(w * h);
    for j in 0..h {
        let v = T::from_usize_lossy(j) + T::half();
        for i in 0..w {
            let u = T::from_usize_lossy(i) + T::half();
            rays.push(view.ray(camera, u, v));
        }
    }
    let mut depth = vec![T::infinity(); w * h];
    let mut pixels = vec![background; w * h];
    for b in boxes {
        let Some((x0, x1, y0, y1)) = screen_rect(&b.aabb, view, camera) else {
            continue;
        };
        for j in y0..=y1 {
            for i in x0..=x1 {
                let idx = j * w + i;
                if let Some((t, axis)) = ray_box(view.origin, rays[idx], &b.aabb) {
                    if t < depth[idx] {
                        depth[idx] = t;
                        let s = headlight(rays[idx], axis);
                        pixels[idx] = b.color.map(|c| c * s);
                    }
                }
            }
        }
    }
    Image::from_clamped(w, h, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn unit_box(cx: f64, cy: f64) -> Aabb<f64> {
        Aabb::from_center_size(Vec3::new(cx, cy, 1.0), Vec3::new(0.5, 0.5, 0.5)).unwrap()
    }

    #[test]
    fn ray_box_hits_front_face() {
        let b = unit_box(3.0, 0.0);
        let (t, axis) = ray_box(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), &b).unwrap();
        assert!((t - 2.75).abs() < 1e-12);
        assert_eq!(axis, 0);
        assert!(ray_box(Vec3::new(0.0, 0.0, 1.0), Vec3::new(-1.0, 0.0, 0.0), &b).is_none());
        // From inside, the exit face is reported.
        let (t, _) = ray_box(Vec3::new(3.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), &b).unwrap();
        assert!((t - 0.25).abs() < 1e-12);
    }

    #[test]
    fn box_straight_ahead_fills_center() {
        let cam = Camera::<f64>::planner();
        let b = ColoredBox::new(unit_box(3.0, 0.0), [1.0, 0.0, 0.0]);
        let view = View::from_pose(&Pose::new(0.0, 0.0, 1.0, 0.0));
        let img = render_boxes(&[b], [0.0; 3], &cam, &view);
        // Pixel centre (32.5, 24.5) is half a pixel off the axis in both directions (fx = fy = 32).
        let off = 0.5 / 32.0;
        let expected = 0.85 + 0.15 / (1.0f64 + 2.0 * off * off).sqrt();
        assert!((img.get(32, 24)[0] - expected).abs() < 1e-12);
        assert_eq!(img.get(0, 0), [0.0; 3]);
        let behind = View::from_pose(&Pose::new(0.0, 0.0, 1.0, std::f64::consts::PI));
        let img = render_boxes(&[b], [0.0; 3], &cam, &behind);
        assert!(img.pixels().iter().all(|p| *p == [0.0; 3]));
    }

    #[test]
    fn screen_rect_is_conservative() {
        // Culled rendering must match a brute force cast with every box tested at every pixel.
        let cam = Camera::<f64>::with_hfov(40, 30, 1.4).unwrap();
        let boxes: Vec<_> = (0..6)
            .map(|k| {
                let a = k as f64 * 1.1;
                ColoredBox::new(unit_box(2.0 + a.cos() * 1.5, a.sin() * 2.0), [0.1 * k as f64, 0.5, 0.9])
            })
            .collect();
        for th in [0.0, 0.4, -0.9, 2.0] {
            let view = View::from_pose(&Pose::new(0.3, -0.2, 1.1, th));
            let img = render_boxes(&boxes, [0.2; 3], &cam, &view);
            for j in 0..cam.height() {
                for i in 0..cam.width() {
                    let d = view.ray(&cam, i as f64 + 0.5, j as f64 + 0.5);
                    let mut best = (f64::INFINITY, [0.2; 3]);
                    for b in &boxes {
                        if let Some((t, axis)) = ray_box(view.origin, d, &b.aabb) {
                            if t < best.0 {
                                best = (t, b.color.map(|c| c * headlight(d, axis)));
                            }
                        }
                    }
                    assert_eq!(img.get(i, j), best.1);
                }
            }
        }
    }
}
