//! Dense square matrix used for recurrence plots and feature images.

use crate::error::{Error, Result};

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    side: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(side: usize) -> Self {
        SquareMatrix {
            side,
            values: vec![0.0; side * side],
        }
    }

    pub fn from_vec(side: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != side * side {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {side}x{side} matrix",
                values.len()
            )));
        }
        Ok(SquareMatrix { side, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let side = rows.len();
        if rows.iter().any(|r| r.len() != side) {
            return Err(Error::Shape("rows do not form a square matrix".into()));
        }
        Ok(SquareMatrix {
            side,
            values: rows.concat(),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.side + col] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Subtract the element mean in place.
    ///
    /// The mean is accumulated relative to the first element, so a constant
    /// matrix centres to exact zeros.
    pub fn center(&mut self) {
        let Some(&pivot) = self.values.first() else {
            return;
        };
        let offset = self.values.iter().map(|v| v - pivot).sum::<f64>() / self.values.len() as f64;
        let mean = pivot + offset;
        self.values.iter_mut().for_each(|v| *v -= mean);
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SquareMatrix {
        SquareMatrix {
            side: self.side,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}
