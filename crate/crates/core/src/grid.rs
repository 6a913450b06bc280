//! Periodic Cartesian grids and the central-difference stencils shared by the
//! model and solver modules.

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::Vector;

pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs {expected} axes, got {found}")]
    AxisCount { expected: usize, found: usize },
    #[error("axis {axis} has {cells} cells, minimum is {MIN_CELLS}")]
    TooFewCells { axis: usize, cells: usize },
    #[error("axis {axis} spacing must be positive, got {spacing}")]
    BadSpacing { axis: usize, spacing: f64 },
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
}

/// Periodic box with cell centres at `(i + 1/2) * spacing` along each axis.
///
/// Cells are stored with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    cells: SmallVec<[usize; 4]>,
    spacing: SmallVec<[f64; 4]>,
    strides: SmallVec<[usize; 4]>,
}

impl GridSpec {
    pub fn new(cells: &[usize], spacing: &[f64]) -> Result<Self, GridError> {
        if cells.len() < 2 {
            return Err(GridError::BadDimension(cells.len()));
        }
        if spacing.len() != cells.len() {
            return Err(GridError::AxisCount {
                expected: cells.len(),
                found: spacing.len(),
            });
        }
        for (axis, (&c, &h)) in cells.iter().zip(spacing).enumerate() {
            if c < MIN_CELLS {
                return Err(GridError::TooFewCells { axis, cells: c });
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(GridError::BadSpacing { axis, spacing: h });
            }
        }
        let mut strides = SmallVec::new();
        let mut s = 1;
        for &c in cells {
            strides.push(s);
            s *= c;
        }
        Ok(Self {
            cells: SmallVec::from_slice(cells),
            spacing: SmallVec::from_slice(spacing),
            strides,
        })
    }

    /// `cells` per axis on a box of side `length`.
    pub fn cube(n: usize, cells: usize, length: f64) -> Result<Self, GridError> {
        Self::new(&vec![cells; n], &vec![length / cells as f64; n])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn lengths(&self) -> Vector {
        self.cells.iter().zip(&self.spacing).map(|(&c, &h)| c as f64 * h).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> SmallVec<[usize; 4]> {
        self.cells
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| (idx / s) % c)
            .collect()
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.cells)
            .zip(&self.strides)
            .map(|((&i, &c), &s)| (i % c) * s)
            .sum()
    }

    /// Cell-centre coordinates.
    pub fn coords(&self, idx: usize) -> Vector {
        self.multi_index(idx)
            .iter()
            .zip(&self.spacing)
            .map(|(&i, &h)| (i as f64 + 0.5) * h)
            .collect()
    }

    /// Periodic neighbour `offset` cells away along `axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let c = self.cells[axis];
        let s = self.strides[axis];
        let i = (idx / s) % c;
        let j = (i as isize + offset).rem_euclid(c as isize) as usize;
        idx - i * s + j * s
    }

    /// Central difference (f(x+h) − f(x−h)) / 2h of a scalar field.
    #[inline]
    pub fn central(&self, f: &[f64], idx: usize, axis: usize) -> f64 {
        let p = self.neighbor(idx, axis, 1);
        let m = self.neighbor(idx, axis, -1);
        (f[p] - f[m]) / (2.0 * self.spacing[axis])
    }

    /// Central-difference gradient of a scalar field at one cell.
    pub fn gradient(&self, f: &[f64], idx: usize) -> Vector {
        (0..self.dim()).map(|a| self.central(f, idx, a)).collect()
    }

    /// 2n+1-point Laplacian of a scalar field at one cell.
    pub fn laplacian(&self, f: &[f64], idx: usize) -> f64 {
        (0..self.dim())
            .map(|a| {
                let p = self.neighbor(idx, a, 1);
                let m = self.neighbor(idx, a, -1);
                let h = self.spacing[a];
                (f[p] - 2.0 * f[idx] + f[m]) / (h * h)
            })
            .sum()
    }

    /// Sum of a field over all cells times the cell volume, accumulated in
    /// storage order so the result does not depend on thread scheduling.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }
}

/// Apply `f` to every cell index, in parallel when the `parallel` feature is
/// on. Each output depends only on its own index, so the result is the same
/// for any thread count.
pub fn map_cells<T, F>(num_cells: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..num_cells).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..num_cells).map(f).collect()
    }
}

/// Fallible variant of [`map_cells`]; reports the lowest failing cell.
pub fn try_map_cells<T, E, F>(num_cells: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_cells(num_cells, f).into_iter().collect()
}
