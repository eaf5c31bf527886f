//! Truncated Taylor series ("jets") for exact derivatives of closed forms.
//!
//! A `Jet<N>` stores the first `N` normalised Taylor coefficients
//! `f^(k)(x0) / k!`. The elementary functions below are propagated with the
//! usual first-order ODE recurrences, so no `exp` overflow occurs for large
//! arguments.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::special::jacobi_unchecked;

/// Arithmetic needed to evaluate the closed-form solutions generically over
/// plain floats and jets.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(x: f64) -> Self;
    fn value(&self) -> f64;
    fn tanh(self) -> Self;
    fn sech(self) -> Self;
    /// `(sn, cn, dn)` with parameter `m`.
    fn jacobi(self, m: f64) -> (Self, Self, Self);
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }

    fn value(&self) -> f64 {
        *self
    }

    fn tanh(self) -> Self {
        f64::tanh(self)
    }

    fn sech(self) -> Self {
        1.0 / self.cosh()
    }

    fn jacobi(self, m: f64) -> (Self, Self, Self) {
        let j = jacobi_unchecked(self, m);
        (j.sn, j.cn, j.dn)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x;
        Self { c }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        if N > 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    /// Solves `y' = g * a'` for `y` given `y(x0)`, coefficient by coefficient,
    /// where `g` is produced lazily from the already known coefficients of `y`.
    fn integrate_chain(
        &self,
        y0: f64,
        mut g: impl FnMut(&[f64; N], usize) -> f64,
    ) -> Self {
        let mut y = [0.0; N];
        y[0] = y0;
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * g(&y, k - j);
            }
            y[k] = s / k as f64;
        }
        Self { c: y }
    }
}

fn cauchy<const N: usize>(a: &[f64; N], b: &[f64; N], k: usize) -> f64 {
    (0..=k).map(|i| a[i] * b[k - i]).sum()
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            c: std::array::from_fn(|i| self.c[i] + o.c[i]),
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            c: std::array::from_fn(|i| self.c[i] - o.c[i]),
        }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            c: std::array::from_fn(|i| -self.c[i]),
        }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            c: std::array::from_fn(|k| cauchy(&self.c, &o.c, k)),
        }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for i in 0..k {
                s -= q[i] * o.c[k - i];
            }
            q[k] = s / o.c[0];
        }
        Self { c: q }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, x: f64) -> Self {
        self.c[0] += x;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, x: f64) -> Self {
        self.c[0] -= x;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, x: f64) -> Self {
        Self {
            c: std::array::from_fn(|i| self.c[i] * x),
        }
    }
}

impl<const N: usize> Scalar for Jet<N> {
    fn cst(x: f64) -> Self {
        Self::constant(x)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    // t' = (1 - t^2) a'
    fn tanh(self) -> Self {
        self.integrate_chain(self.c[0].tanh(), |t, k| {
            (if k == 0 { 1.0 } else { 0.0 }) - cauchy(t, t, k)
        })
    }

    // s' = -s tanh(a) a'
    fn sech(self) -> Self {
        let t = self.tanh();
        self.integrate_chain(1.0 / self.c[0].cosh(), |s, k| -cauchy(s, &t.c, k))
    }

    // sn' = cn dn a', cn' = -sn dn a', dn' = -m sn cn a'
    fn jacobi(self, m: f64) -> (Self, Self, Self) {
        let j0 = jacobi_unchecked(self.c[0], m);
        let mut sn = [0.0; N];
        let mut cn = [0.0; N];
        let mut dn = [0.0; N];
        sn[0] = j0.sn;
        cn[0] = j0.cn;
        dn[0] = j0.dn;
        for k in 1..N {
            let (mut s, mut c, mut d) = (0.0, 0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                s += w * cauchy(&cn, &dn, k - j);
                c -= w * cauchy(&sn, &dn, k - j);
                d -= w * m * cauchy(&sn, &cn, k - j);
            }
            sn[k] = s / k as f64;
            cn[k] = c / k as f64;
            dn[k] = d / k as f64;
        }
        (Self { c: sn }, Self { c: cn }, Self { c: dn })
    }
}
