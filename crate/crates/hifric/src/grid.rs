//! Uniform periodic 1D grid and discrete helpers.

use crate::error::{Error, Result};

/// Uniform cell-centered grid on a periodic interval of the given length.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    ncells: usize,
    length: f64,
    dx: f64,
}

impl Grid1D {
    pub fn new(ncells: usize, length: f64) -> Result<Self> {
        if ncells < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 4 cells, got {ncells}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid length must be positive, got {length}"
            )));
        }
        Ok(Self {
            ncells,
            length,
            dx: length / ncells as f64,
        })
    }

    pub fn ncells(&self) -> usize {
        self.ncells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center coordinate of cell `j`.
    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Periodic right neighbor.
    pub fn right(&self, j: usize) -> usize {
        if j + 1 == self.ncells {
            0
        } else {
            j + 1
        }
    }

    /// Periodic left neighbor.
    pub fn left(&self, j: usize) -> usize {
        if j == 0 {
            self.ncells - 1
        } else {
            j - 1
        }
    }

    /// Central difference of a cell field at cell `j`.
    pub fn central_diff(&self, f: &[f64], j: usize) -> f64 {
        (f[self.right(j)] - f[self.left(j)]) / (2.0 * self.dx)
    }

    /// Central differences of a cell field at every cell.
    pub fn gradient(&self, f: &[f64]) -> Vec<f64> {
        (0..self.ncells).map(|j| self.central_diff(f, j)).collect()
    }

    /// Grid-weighted L1 norm of a cell field.
    pub fn l1_norm(&self, f: &[f64]) -> f64 {
        f.iter().map(|x| x.abs()).sum::<f64>() * self.dx
    }

    /// Integral of a cell field over the torus (midpoint rule).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        neumaier_sum(f) * self.dx
    }
}

/// Compensated (Neumaier) summation; keeps conservation checks below roundoff drift.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
