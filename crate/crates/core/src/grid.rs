//! Equal-area partition of the arena floor into cells.

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::real::Real;

/// Row-major grid of square cells over the floor plane. Cell `i = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid<T> {
    origin: (T, T),
    cell_size: T,
    nx: usize,
    ny: usize,
}

impl<T: Real> CellGrid<T> {
    pub fn new(origin: (T, T), cell_size: T, nx: usize, ny: usize) -> Result<Self> {
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(Error::InvalidConfig(format!("cell_size must be positive, got {cell_size}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig("grid needs at least one cell".into()));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::NonFinite("grid origin"));
        }
        Ok(Self { origin, cell_size, nx, ny })
    }

    /// Grid covering `[x0, x0 + width] × [y0, y0 + depth]` with the given cell size.
    pub fn covering(origin: (T, T), width: T, depth: T, cell_size: T) -> Result<Self> {
        let nx = (width / cell_size).ceil().to_usize().unwrap_or(0);
        let ny = (depth / cell_size).ceil().to_usize().unwrap_or(0);
        Self::new(origin, cell_size, nx.max(1), ny.max(1))
    }

    pub fn origin(&self) -> (T, T) {
        self.origin
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of cells `M`.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell containing the planar position. The far edges belong to the last row/column.
    pub fn index_of(&self, x: T, y: T) -> Result<usize> {
        let ix = self.axis_index(x, self.origin.0, self.nx);
        let iy = self.axis_index(y, self.origin.1, self.ny);
        match (ix, iy) {
            (Some(ix), Some(iy)) => Ok(iy * self.nx + ix),
            _ => Err(Error::OutOfFootprint { x: x.to_f64_lossy(), y: y.to_f64_lossy() }),
        }
    }

    /// Cell containing the pose; `z` and `theta` are ignored.
    pub fn cell_index(&self, pose: &Pose<T>) -> Result<usize> {
        self.index_of(pose.x, pose.y)
    }

    fn axis_index(&self, v: T, origin: T, n: usize) -> Option<usize> {
        if !v.is_finite() {
            return None;
        }
        let rel = (v - origin) / self.cell_size;
        let n_t = T::from_usize_lossy(n);
        if rel < T::zero() || rel > n_t {
            return None;
        }
        let i = rel.floor().to_usize()?;
        Some(i.min(n - 1))
    }

    pub fn cell_center(&self, index: usize) -> (T, T) {
        let ix = index % self.nx;
        let iy = index / self.nx;
        let h = T::half();
        (
            self.origin.0 + (T::from_usize_lossy(ix) + h) * self.cell_size,
            self.origin.1 + (T::from_usize_lossy(iy) + h) * self.cell_size,
        )
    }

    /// `(x_min, y_min, x_max, y_max)` of a cell.
    pub fn cell_bounds(&self, index: usize) -> (T, T, T, T) {
        let (cx, cy) = self.cell_center(index);
        let h = self.cell_size * T::half();
        (cx - h, cy - h, cx + h, cy + h)
    }
}
