//! Floating point RGB images and unit-norm descriptors.

use crate::error::{Error, Result};
use crate::real::Real;

/// Row-major RGB image, every channel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    pixels: Vec<[T; 3]>,
}

impl<T: Real> Image<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<[T; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().flatten().any(|c| !(*c >= T::zero() && *c <= T::one())) {
            return Err(Error::InvalidArgument("pixel channel outside [0, 1]".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, color: [T; 3]) -> Self {
        let c = color.map(clamp01);
        Self { width, height, pixels: vec![c; width * height] }
    }

    /// Builds an image from raw values, clamping each channel into `[0, 1]`.
    pub(crate) fn from_clamped(width: usize, height: usize, mut pixels: Vec<[T; 3]>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        for p in &mut pixels {
            *p = p.map(clamp01);
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[T; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [T; 3] {
        self.pixels[y * self.width + x]
    }

    /// 8-bit interleaved RGB, rounding to nearest.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flatten()
            .map(|c| (c.to_f64_lossy() * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::InvalidArgument("rgb8 buffer size mismatch".into()));
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| [0, 1, 2].map(|i| T::lit(f64::from(c[i]) / 255.0)))
            .collect();
        Ok(Self { width, height, pixels })
    }
}

#[inline]
fn clamp01<T: Real>(v: T) -> T {
    if v.is_nan() {
        T::zero()
    } else {
        v.max(T::zero()).min(T::one())
    }
}

/// Unit-norm feature vector. A zero input normalizes to the first basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor<T> {
    values: Vec<T>,
}

impl<T: Real> Descriptor<T> {
    pub fn from_raw(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("descriptor needs at least one dimension".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("descriptor value"));
        }
        let norm = values.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm > T::epsilon() {
            for v in &mut values {
                *v = *v / norm;
            }
        } else {
            values.iter_mut().for_each(|v| *v = T::zero());
            values[0] = T::one();
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| *a * *b).sum())
    }
}

impl<T: Real> std::ops::Neg for Descriptor<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { values: self.values.into_iter().map(|v| -v).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_validation() {
        assert!(Image::<f64>::new(2, 2, vec![[0.0; 3]; 3]).is_err());
        assert!(Image::<f64>::new(1, 1, vec![[1.5, 0.0, 0.0]]).is_err());
        let img = Image::<f64>::new(1, 2, vec![[0.0; 3], [1.0; 3]]).unwrap();
        assert_eq!(img.get(0, 1), [1.0; 3]);
        assert_eq!(img.to_rgb8(), vec![0, 0, 0, 255, 255, 255]);
    }

    #[test]
    fn descriptor_normalizes() {
        let d = Descriptor::from_raw(vec![3.0f64, 4.0]).unwrap();
        assert!((d.values()[0] - 0.6).abs() < 1e-15);
        let z = Descriptor::from_raw(vec![0.0f64; 4]).unwrap();
        assert_eq!(z.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(Descriptor::from_raw(vec![f64::NAN]).is_err());
    }
}
