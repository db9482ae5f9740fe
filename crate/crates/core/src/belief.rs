//! Grid belief over which cell holds the goal image's source pose.
//!
//! A real observation from cell `i` that fails the success test is a missed
//! detection with probability `q`; the observed cell is discounted and every
//! other cell renormalized:
//!
//! ```text
//! p_i ← p_i (1 - q) / (1 - p_i q)
//! r   ← r / (1 - p_i q)        for every other cell
//! ```

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grid::CellGrid;
use crate::real::Real;

/// Detection probabilities are capped here before an update.
pub const Q_CAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GridBelief<T> {
    grid: CellGrid<T>,
    masses: Vec<T>,
}

impl<T: Real> GridBelief<T> {
    pub fn uniform(grid: CellGrid<T>) -> Self {
        let m = grid.len();
        let p = T::one() / T::from_usize_lossy(m);
        Self { grid, masses: vec![p; m] }
    }

    /// Arbitrary non-negative prior, normalized to unit mass.
    pub fn from_masses(grid: CellGrid<T>, masses: Vec<T>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::InvalidConfig(format!("prior has {} masses for {} cells", masses.len(), grid.len())));
        }
        if masses.iter().any(|m| !(*m >= T::zero()) || !m.is_finite()) {
            return Err(Error::InvalidConfig("prior masses must be finite and non-negative".into()));
        }
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::InvalidConfig("prior has zero total mass".into()));
        }
        Ok(Self { grid, masses: masses.into_iter().map(|m| m / total).collect() })
    }

    pub fn grid(&self) -> &CellGrid<T> {
        &self.grid
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn total(&self) -> T {
        self.masses.iter().copied().sum()
    }

    /// Mass of the cell holding `pose`; zero outside the footprint.
    pub fn prob_mass(&self, pose: &Pose<T>) -> T {
        self.grid.cell_index(pose).map(|i| self.masses[i]).unwrap_or_else(|_| T::zero())
    }

    /// Index of the highest-mass cell, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.masses.iter().enumerate() {
            if *m > self.masses[best] {
                best = i;
            }
        }
        best
    }

    /// Missed-detection update for `cell` with detection probability `q ∈ [0, 1]`.
    pub fn bayes_update(&mut self, cell: usize, q: T) -> Result<()> {
        if cell >= self.masses.len() {
            return Err(Error::InvalidArgument(format!("cell {cell} out of range for {} cells", self.masses.len())));
        }
        if !(q >= T::zero() && q <= T::one()) {
            return Err(Error::InvalidArgument(format!("detection probability {q} outside [0, 1]")));
        }
        let p = self.masses[cell];
        // Equals 1 - p q on a normalized belief; summing non-negative terms avoids
        // cancellation when p and q are both close to 1.
        let others: T = self.masses.iter().enumerate().filter(|(j, _)| *j != cell).map(|(_, m)| *m).sum();
        let denom = others + p * (T::one() - q);
        if !(denom > T::zero()) {
            return Err(Error::DegenerateEvidence { cell });
        }
        for (j, m) in self.masses.iter_mut().enumerate() {
            *m = if j == cell { p * (T::one() - q) / denom } else { *m / denom };
        }
        Ok(())
    }

    /// Update from a real observation at `pose`: `q` is floored at 0 and capped at [`Q_CAP`].
    /// Poses outside the footprint carry no evidence and leave the belief unchanged.
    pub fn observe(&mut self, pose: &Pose<T>, q: T) -> Result<()> {
        let Ok(cell) = self.grid.cell_index(pose) else {
            return Ok(());
        };
        let q = if q.is_nan() { T::zero() } else { q.max(T::zero()).min(T::lit(Q_CAP)) };
        self.bayes_update(cell, q)
    }
}
