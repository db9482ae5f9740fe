//! Brute-force splat compositor: every splat tested at every pixel center, with its own
//! projection and covariance code, no culling rectangles.

use beings_core::geometry::Pose;
use beings_core::scene::{Camera, Gaussian3D};

/// Reference compositor: every splat tested at every pixel center, no culling rectangles.
pub fn reference(gs: &[Gaussian3D<f64>], bg: [f64; 3], cam: &Camera<f64>, pose: &Pose<f64>) -> (Vec<[f64; 3]>, Vec<f64>, Vec<f64>) {
    let (s, c) = pose.theta.sin_cos();
    let right = [s, -c, 0.0];
    let down = [0.0, 0.0, -1.0];
    let fwd = [c, s, 0.0];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    struct P {
        depth: f64,
        idx: usize,
        u: f64,
        v: f64,
        inv: [[f64; 2]; 2],
    }
    let mut ps = Vec::new();
    for (idx, g) in gs.iter().enumerate() {
        let [w, x, y, z] = g.rotation;
        let r = [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ];
        let sc = g.scale.to_array();
        let m: Vec<[f64; 3]> = (0..3).map(|i| [r[i][0] * sc[0], r[i][1] * sc[1], r[i][2] * sc[2]]).collect();
        let mut sigma = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                sigma[i][j] = dot(m[i], m[j]);
            }
        }
        let d = (g.mean - pose.position()).to_array();
        let pc = [dot(right, d), dot(down, d), dot(fwd, d)];
        if pc[2] < 0.05 || g.opacity <= 0.0 {
            continue;
        }
        let jac = [
            [cam.fx / pc[2], 0.0, -cam.fx * pc[0] / (pc[2] * pc[2])],
            [0.0, cam.fy / pc[2], -cam.fy * pc[1] / (pc[2] * pc[2])],
        ];
        // T = J W, rows of W are the camera axes.
        let mut t = [[0.0; 3]; 2];
        for a in 0..2 {
            for k in 0..3 {
                t[a][k] = jac[a][0] * right[k] + jac[a][1] * down[k] + jac[a][2] * fwd[k];
            }
        }
        let mut cov2 = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += t[a][i] * sigma[i][j] * t[b][j];
                    }
                }
                cov2[a][b] = acc;
            }
        }
        let det = cov2[0][0] * cov2[1][1] - cov2[0][1] * cov2[1][0];
        if det <= 1e-12 {
            continue;
        }
        let inv = [[cov2[1][1] / det, -cov2[0][1] / det], [-cov2[1][0] / det, cov2[0][0] / det]];
        ps.push(P { depth: pc[2], idx, u: cam.cx + cam.fx * pc[0] / pc[2], v: cam.cy + cam.fy * pc[1] / pc[2], inv });
    }
    ps.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.idx.cmp(&b.idx)));
    let (w, h) = (cam.width(), cam.height());
    let mut color = Vec::with_capacity(w * h);
    let mut acc = Vec::with_capacity(w * h);
    let mut trans = Vec::with_capacity(w * h);
    for py in 0..h {
        for px in 0..w {
            let (mut col, mut a, mut tr) = ([0.0; 3], 0.0, 1.0);
            for p in &ps {
                let dx = px as f64 + 0.5 - p.u;
                let dy = py as f64 + 0.5 - p.v;
                let d2 = p.inv[0][0] * dx * dx + (p.inv[0][1] + p.inv[1][0]) * dx * dy + p.inv[1][1] * dy * dy;
                if d2 > 9.0 {
                    continue;
                }
                let alpha = gs[p.idx].opacity * (-0.5 * d2).exp();
                for k in 0..3 {
                    col[k] += alpha * tr * gs[p.idx].color[k];
                }
                a += alpha * tr;
                tr *= 1.0 - alpha;
            }
            for k in 0..3 {
                col[k] += tr * bg[k];
            }
            color.push(col);
            acc.push(a);
            trans.push(tr);
        }
    }
    (color, acc, trans)
}
