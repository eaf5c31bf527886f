//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Parameter convention is `m = k²`. Both the integrals and the Jacobi
//! triple are computed with the arithmetic-geometric mean; no external
//! special-function library is involved.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Above this value the Jacobi functions use their hyperbolic limits.
pub const NEAR_ONE: f64 = 1.0 - 1e-12;

const MAX_AGM_STEPS: usize = 64;

/// Elliptic parameter `m`, validated to lie in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EllipticParameter(f64);

impl EllipticParameter {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || !(0.0..=1.0).contains(&m) {
            return Err(domain("m", format!("elliptic parameter must lie in [0, 1], got {m}")));
        }
        Ok(Self(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the parameter is close enough to one that the hyperbolic
    /// (soliton) limit is used.
    pub fn is_soliton_limit(self) -> bool {
        self.0 >= NEAR_ONE
    }
}

impl TryFrom<f64> for EllipticParameter {
    type Error = crate::Error;

    fn try_from(m: f64) -> Result<Self> {
        Self::new(m)
    }
}

impl From<EllipticParameter> for f64 {
    fn from(m: EllipticParameter) -> f64 {
        m.0
    }
}

/// Complete elliptic integral of the first kind, `K(m)` for `0 <= m < 1`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !m.is_finite() || !(0.0..1.0).contains(&m) {
        return Err(domain("m", format!("K(m) requires 0 <= m < 1, got {m}")));
    }
    Ok(agm_integrals(m).0)
}

/// Complete elliptic integral of the second kind, `E(m)` for `0 <= m <= 1`.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if !m.is_finite() || !(0.0..=1.0).contains(&m) {
        return Err(domain("m", format!("E(m) requires 0 <= m <= 1, got {m}")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(agm_integrals(m).1)
}

/// `(K(m), E(m))` from a single AGM sweep.
///
/// `E = K (1 - sum 2^(n-1) c_n^2)` with `c_0 = sqrt(m)` and the recurrence
/// `c_{n+1} = c_n^2 / (4 a_{n+1})`, which avoids the cancellation in
/// `(a_n - b_n) / 2`.
fn agm_integrals(m: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        c = c * c / (4.0 * a_next);
        a = a_next;
        weight *= 2.0;
        sum += weight * c * c;
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// Values of the three Jacobi elliptic functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `sn(u|m)`, `cn(u|m)`, `dn(u|m)` computed jointly.
///
/// Uses the descending AGM (Landen) recursion on the amplitude. For
/// `m >= 1 - 1e-12` the hyperbolic limits are returned, for `m == 0` the
/// trigonometric ones.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(domain("u", format!("argument must be finite, got {u}")));
    }
    let m = EllipticParameter::new(m)?.value();
    Ok(jacobi_unchecked(u, m))
}

pub(crate) fn jacobi_unchecked(u: f64, m: f64) -> JacobiTriple {
    if m >= NEAR_ONE {
        let sech = 1.0 / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    if m == 0.0 {
        let (s, c) = u.sin_cos();
        return JacobiTriple { sn: s, cn: c, dn: 1.0 };
    }

    // Reduce modulo the real period 4K so the amplitude recursion starts
    // from a moderate angle.
    let period = 4.0 * agm_integrals(m).0;
    let u = u - period * (u / period).round();

    let mut a = [0.0_f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0_f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
        let a_next = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        a[n + 1] = a_next;
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // 1 - m sn^2 written without cancellation; the textbook
    // cn / cos(phi_1 - phi_0) is 0/0 at odd multiples of K
    let dn = ((1.0 - m) + m * cn * cn).sqrt();
    JacobiTriple { sn, cn, dn }
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Adaptive Simpson quadrature with Richardson correction.
    pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    pub fn k_quad(m: f64) -> f64 {
        integrate(
            &|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-15,
        )
    }

    pub fn e_quad(m: f64) -> f64 {
        integrate(
            &|t: f64| (1.0 - m * t.sin().powi(2)).sqrt(),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-15,
        )
    }

    /// Classical RK4 on sn' = cn dn, cn' = -sn dn, dn' = -m sn cn.
    pub fn jacobi_ode(u: f64, m: f64, steps: usize) -> [f64; 3] {
        let rhs = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -m * y[0] * y[1]];
        let h = u / steps as f64;
        let mut y = [0.0, 1.0, 1.0];
        for _ in 0..steps {
            let k1 = rhs(y);
            let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
            y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        y
    }
}
