//! Periodic differentiation: Fourier collocation and 8th-order central
//! finite differences.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{domain, Result};

/// Differentiation backend.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Spectral,
    Fd8,
}

/// Derivative orders used by the equations.
pub const SUPPORTED_ORDERS: [usize; 4] = [1, 2, 3, 5];

fn check_order(order: usize) -> Result<()> {
    if SUPPORTED_ORDERS.contains(&order) {
        Ok(())
    } else {
        Err(domain(
            "order",
            format!("derivative order must be one of {SUPPORTED_ORDERS:?}, got {order}"),
        ))
    }
}

/// FFT plans and wavenumbers for one grid. Cheap to build; owned per call
/// or per run, never shared mutably.
pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n: grid.n,
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
            k: grid.wavenumbers(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform, returning the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let scale = 1.0 / self.n as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// `(i k_j)^order`, with the Nyquist mode dropped for odd orders.
    pub fn multiplier(&self, j: usize, order: usize) -> Complex64 {
        if order % 2 == 1 && self.n.is_multiple_of(2) && j == self.n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let kp = self.k[j].powi(order as i32);
        match order % 4 {
            0 => Complex64::new(kp, 0.0),
            1 => Complex64::new(0.0, kp),
            2 => Complex64::new(-kp, 0.0),
            _ => Complex64::new(0.0, -kp),
        }
    }

    pub fn apply(&self, spec: &[Complex64], order: usize) -> Vec<Complex64> {
        spec.iter()
            .enumerate()
            .map(|(j, c)| c * self.multiplier(j, order))
            .collect()
    }

    pub fn derivative(&self, values: &[f64], order: usize) -> Vec<f64> {
        let spec = self.forward(values);
        self.inverse_real(self.apply(&spec, order))
    }

    /// Several derivatives from one forward transform.
    pub fn derivatives(&self, values: &[f64], orders: &[usize]) -> Vec<Vec<f64>> {
        let spec = self.forward(values);
        orders
            .iter()
            .map(|&p| self.inverse_real(self.apply(&spec, p)))
            .collect()
    }
}

/// Finite-difference weights for the `order`-th derivative at `x0` from
/// nodes `xs` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Central stencil of 8th-order accuracy for the given derivative order, as
/// `(half_width, weights)` on unit spacing.
pub fn central_stencil_8(order: usize) -> (usize, Vec<f64>) {
    let half = (order + 1) / 2 + 3;
    let xs: Vec<f64> = (-(half as i64)..=half as i64).map(|j| j as f64).collect();
    (half, fornberg_weights(0.0, &xs, order))
}

fn fd8_derivative(values: &[f64], spacing: f64, order: usize) -> Vec<f64> {
    let n = values.len() as i64;
    let (half, w) = central_stencil_8(order);
    let scale = spacing.powi(order as i32);
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (o, wj) in w.iter().enumerate() {
                let j = (i + o as i64 - half as i64).rem_euclid(n) as usize;
                s += wj * values[j];
            }
            s / scale
        })
        .collect()
}

/// Derivatives of raw samples on `grid` with the chosen backend.
pub fn derivatives(grid: &Grid, values: &[f64], orders: &[usize], backend: Backend) -> Result<Vec<Vec<f64>>> {
    for &p in orders {
        check_order(p)?;
    }
    Ok(match backend {
        Backend::Spectral => Spectral::new(grid).derivatives(values, orders),
        Backend::Fd8 => orders
            .iter()
            .map(|&p| fd8_derivative(values, grid.spacing(), p))
            .collect(),
    })
}

/// Fourier-collocation derivative of a periodic field.
pub fn spectral_derivative(f: &Field, order: usize) -> Result<Field> {
    derivative(f, order, Backend::Spectral)
}

pub fn derivative(f: &Field, order: usize, backend: Backend) -> Result<Field> {
    let mut d = derivatives(&f.grid, &f.values, &[order], backend)?;
    Ok(Field {
        grid: f.grid,
        values: d.pop().unwrap_or_default(),
        time: f.time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_is_exact() {
        let g = Grid::new(0.0, 7.0, 64).unwrap();
        let w = 2.0 * PI / 7.0;
        let f = Field::from_fn(g, 0.0, |x| (w * x).sin()).unwrap();
        let d = spectral_derivative(&f, 1).unwrap();
        for (x, v) in g.points().iter().zip(&d.values) {
            assert!((v - w * (w * x).cos()).abs() < 1e-12);
        }
        let d5 = spectral_derivative(&f, 5).unwrap();
        for (x, v) in g.points().iter().zip(&d5.values) {
            // round-off in the high modes is amplified by k_max^5 ~ 2e7
            assert!((v - w.powi(5) * (w * x).cos()).abs() < 1e-7);
        }
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = Grid::new(0.0, 3.0, 32).unwrap();
        let f = Field::from_fn(g, 0.0, |_| 2.5).unwrap();
        for p in SUPPORTED_ORDERS {
            assert!(spectral_derivative(&f, p).unwrap().max_abs() < 1e-12);
            assert!(derivative(&f, p, Backend::Fd8).unwrap().max_abs() < 1e-12 * g.spacing().powi(-(p as i32)));
        }
    }

    #[test]
    fn unsupported_order() {
        let g = Grid::new(0.0, 3.0, 32).unwrap();
        let f = Field::zeros(g, 0.0);
        assert!(spectral_derivative(&f, 4).is_err());
        assert!(spectral_derivative(&f, 0).is_err());
    }

    #[test]
    fn stencils_are_classical() {
        let (half, w) = central_stencil_8(1);
        assert_eq!(half, 4);
        let expect = [1.0 / 280.0, -4.0 / 105.0, 0.2, -0.8, 0.0, 0.8, -0.2, 4.0 / 105.0, -1.0 / 280.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(central_stencil_8(3).0, 5);
        assert_eq!(central_stencil_8(5).0, 6);
        // weights annihilate polynomials below the derivative order
        for p in SUPPORTED_ORDERS {
            let (half, w) = central_stencil_8(p);
            for q in 0..p {
                let s: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| wi * (i as f64 - half as f64).powi(q as i32))
                    .sum();
                assert!(s.abs() < 1e-9, "order {p}, monomial {q}: {s}");
            }
        }
    }

    #[test]
    fn sech2_agrees_with_finite_differences() {
        let b = 0.75f64.sqrt();
        let g = Grid::centered(48.0 / b, 1024).unwrap();
        let f = Field::from_fn(g, 0.0, |x| 1.0 / (b * x).cosh().powi(2)).unwrap();
        let s = spectral_derivative(&f, 1).unwrap();
        let d = derivative(&f, 1, Backend::Fd8).unwrap();
        let err = s.values.iter().zip(&d.values).fold(0.0f64, |m, (a, c)| m.max((a - c).abs()));
        assert!(err < 1e-8, "max difference {err}");
    }

    #[test]
    fn negation_commutes_bitwise() {
        let g = Grid::new(0.0, 10.0, 64).unwrap();
        let f = Field::from_fn(g, 0.0, |x| (0.3 * x).sin() + 0.2 * (1.1 * x).cos()).unwrap();
        for p in SUPPORTED_ORDERS {
            let a = spectral_derivative(&f, p).unwrap();
            let b = spectral_derivative(&f.negated(), p).unwrap();
            assert_eq!(a.negated().values, b.values);
        }
    }
}
