use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Uniform periodic grid `x_j = x0 + j L / n`, `j = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub length: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, length: f64, n: usize) -> Result<Self> {
        let g = Self { x0, length, n };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[-length/2, length/2)`.
    pub fn centered(length: f64, n: usize) -> Result<Self> {
        Self::new(-0.5 * length, length, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(domain("n", format!("grid needs at least 16 points, got {}", self.n)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(domain("length", format!("must be positive, got {}", self.length)));
        }
        if !self.x0.is_finite() {
            return Err(domain("x0", "must be finite"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order. The Nyquist entry is `-pi n / L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let scale = 2.0 * PI / self.length;
        (0..n)
            .map(|j| if j < (n + 1) / 2 { j } else { j - n })
            .map(|j| scale * j as f64)
            .collect()
    }

    /// True when `x` (reduced periodically) lies within `tol` grid spacings of
    /// a grid point.
    pub fn is_aligned(&self, x: f64, tol: f64) -> bool {
        let s = ((x - self.x0) / self.spacing()).rem_euclid(self.n as f64);
        let frac = s - s.floor();
        frac.min(1.0 - frac) < tol
    }
}

/// A sampled profile `u(x_j, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain("values", format!("non-finite value at index {j}")));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
            time,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rectangle-rule integral over one period.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        self.grid == other.grid
    }
}
