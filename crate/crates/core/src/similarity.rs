//! Global image descriptors and the dissimilarity/detection-probability pair.

use crate::error::Result;
use crate::image::{Descriptor, Image};
use crate::real::Real;

/// Anything that maps an image to a unit-norm descriptor.
pub trait ImageDescriptor<T: Real>: Send + Sync {
    fn describe(&self, image: &Image<T>) -> Descriptor<T>;
}

/// Box-averaged thumbnail with per-channel mean removed, flattened and L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThumbnailDescriptor {
    pub side: usize,
}

impl Default for ThumbnailDescriptor {
    fn default() -> Self {
        Self { side: 16 }
    }
}

/// Overlap of output bin `k` (of `n` bins over `len` pixels) with input pixel `p`.
fn bin_weights<T: Real>(len: usize, n: usize) -> Vec<Vec<(usize, T)>> {
    let scale = len as f64 / n as f64;
    (0..n)
        .map(|k| {
            let (lo, hi) = (k as f64 * scale, (k + 1) as f64 * scale);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(len);
            (first..last)
                .filter_map(|p| {
                    let w = (hi.min(p as f64 + 1.0) - lo.max(p as f64)) / scale;
                    (w > 0.0).then(|| (p, T::lit(w)))
                })
                .collect()
        })
        .collect()
}

impl<T: Real> ImageDescriptor<T> for ThumbnailDescriptor {
    fn describe(&self, image: &Image<T>) -> Descriptor<T> {
        let n = self.side.max(1);
        let cols = bin_weights::<T>(image.width(), n);
        let rows = bin_weights::<T>(image.height(), n);
        let mut thumb = vec![[T::zero(); 3]; n * n];
        for (by, row_w) in rows.iter().enumerate() {
            for (bx, col_w) in cols.iter().enumerate() {
                let mut acc = [T::zero(); 3];
                for &(y, wy) in row_w {
                    for &(x, wx) in col_w {
                        let p = image.get(x, y);
                        let w = wy * wx;
                        for c in 0..3 {
                            acc[c] = acc[c] + w * p[c];
                        }
                    }
                }
                thumb[by * n + bx] = acc;
            }
        }
        let count = T::from_usize_lossy(n * n);
        let mut mean = [T::zero(); 3];
        for p in &thumb {
            for c in 0..3 {
                mean[c] = mean[c] + p[c];
            }
        }
        let mean = mean.map(|m| m / count);
        let values = thumb.iter().flat_map(|p| [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]]).collect();
        Descriptor::from_raw(values).expect("thumbnail descriptor is finite and non-empty")
    }
}

/// Default descriptor for an image.
pub fn describe<T: Real>(image: &Image<T>) -> Descriptor<T> {
    ThumbnailDescriptor::default().describe(image)
}

/// `(1 - <a, b>) / 2`, clamped to `[0, 1]`.
pub fn dissimilarity<T: Real>(a: &Descriptor<T>, b: &Descriptor<T>) -> Result<T> {
    let d = (T::one() - a.dot(b)?) * T::half();
    Ok(d.max(T::zero()).min(T::one()))
}

/// Probability of recognizing the goal in an observation, `1 - dissimilarity`.
pub fn detection_prob<T: Real>(goal: &Descriptor<T>, observed: &Descriptor<T>) -> Result<T> {
    Ok(detection_from_dissimilarity(dissimilarity(goal, observed)?))
}

#[inline]
pub fn detection_from_dissimilarity<T: Real>(d: T) -> T {
    T::one() - d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    #[test]
    fn uniform_image_falls_back_to_basis() {
        let d = describe(&Image::filled(64, 48, [0.5f64; 3]));
        assert_eq!(d.dim(), 768);
        assert_eq!(d.values()[0], 1.0);
        assert!(d.values()[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_white_pixel() {
        let mut px = vec![[0.0f64; 3]; 256];
        px[37] = [1.0; 3];
        let d = describe(&Image::new(16, 16, px).unwrap());
        // Hand evaluation: entries (255/256, -1/256) over a norm of sqrt(3 * 255 / 256).
        let hi = (255.0f64 / 768.0).sqrt();
        let lo = -1.0 / (256.0f64 * 765.0).sqrt();
        for c in 0..3 {
            assert!((d.values()[37 * 3 + c] - hi).abs() < 1e-12);
            assert!((d.values()[c] - lo).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_weights_split_fractional_pixels() {
        let w = bin_weights::<f64>(3, 2);
        assert_eq!(w[0], vec![(0, 2.0 / 3.0), (1, 1.0 / 3.0)]);
        assert_eq!(w[1], vec![(1, 1.0 / 3.0), (2, 2.0 / 3.0)]);
    }

    #[test]
    fn dissimilarity_examples() {
        let a = Descriptor::from_raw(vec![1.0f64, 0.0]).unwrap();
        let b = Descriptor::from_raw(vec![0.0f64, 1.0]).unwrap();
        assert_eq!(dissimilarity(&a, &a).unwrap(), 0.0);
        assert_eq!(dissimilarity(&a, &-a.clone()).unwrap(), 1.0);
        assert_eq!(dissimilarity(&a, &b).unwrap(), 0.5);
        let c = Descriptor::from_raw(vec![1.0f64, 0.0, 0.0]).unwrap();
        assert!(matches!(dissimilarity(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn detection_examples() {
        assert_eq!(detection_from_dissimilarity(0.0f64), 1.0);
        assert_eq!(detection_from_dissimilarity(1.0f64), 0.0);
        assert!((detection_from_dissimilarity(0.3f64) - 0.7).abs() < 1e-15);
        let a = Descriptor::from_raw(vec![0.6f64, 0.8]).unwrap();
        assert_eq!(detection_prob(&a, &a).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn dissimilarity_range_and_symmetry(a in proptest::collection::vec(-1.0f64..1.0, 6), b in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let a = Descriptor::from_raw(a).unwrap();
            let b = Descriptor::from_raw(b).unwrap();
            let d = dissimilarity(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, dissimilarity(&b, &a).unwrap());
        }
    }
}
