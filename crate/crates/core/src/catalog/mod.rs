//! Closed-form travelling waves and multi-soliton solutions.

mod multi;
mod recipe;

pub use multi::{eval_three_soliton, eval_two_soliton, theta, SolitonLadder};
pub use recipe::{Solution, SolutionRecipe};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::jet::Scalar;
use crate::special::{elliptic_e, elliptic_k, EllipticParameter};

/// Small parameters of one equation instance.
///
/// `alpha = A/H`, `beta = (H/L)^2`, `tau` is the Bond number and `delta` the
/// bottom amplitude ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub delta: f64,
}

impl MediumParams {
    pub fn new(alpha: f64, beta: f64, tau: f64, delta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            tau,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// KdV-regime parameters with no surface tension and a flat bottom.
    pub fn kdv(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("tau", self.tau),
            ("delta", self.delta),
        ] {
            if !v.is_finite() {
                return Err(domain(name, format!("must be finite, got {v}")));
            }
        }
        if self.beta <= 0.0 {
            return Err(domain("beta", format!("must be positive, got {}", self.beta)));
        }
        if self.tau < 0.0 {
            return Err(domain("tau", format!("must be non-negative, got {}", self.tau)));
        }
        Ok(())
    }

    /// Same medium with the sign of `alpha` flipped.
    pub fn inverted(&self) -> Self {
        Self {
            alpha: -self.alpha,
            ..*self
        }
    }

    /// `(1 - 3 tau) beta / 6`, the third-order dispersion coefficient of the
    /// Gardner and fifth-order equations.
    pub fn beta_prime(&self) -> f64 {
        (1.0 - 3.0 * self.tau) * self.beta / 6.0
    }

    /// `beta^2 (19 - 30 tau - 45 tau^2) / 360`.
    pub fn fifth_order_coefficient(&self) -> f64 {
        let t = self.tau;
        self.beta * self.beta * (19.0 - 30.0 * t - 45.0 * t * t) / 360.0
    }
}

/// Reference frame. The moving frame `x -> x - t` removes the bare `u_x`
/// term and lowers every speed by one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Fixed,
    Moving,
}

impl Frame {
    /// Speed of the fixed-frame transport term (`1` fixed, `0` moving).
    pub fn transport(self) -> f64 {
        match self {
            Frame::Fixed => 1.0,
            Frame::Moving => 0.0,
        }
    }
}

/// Functional form of a travelling wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `A sech^2(B xi) + D`
    KdvSoliton,
    /// `A cn^2(B xi | m) + D`
    KdvCnoidal,
    /// `(A/2)[dn^2 + sqrt(m) cn dn] + D`
    KdvSuperpositionPlus,
    /// `(A/2)[dn^2 - sqrt(m) cn dn] + D`
    KdvSuperpositionMinus,
    /// `A sech^2(B xi) + D` with coefficients fixed by the extended KdV.
    Kdv2Soliton,
    /// `A sech^4(B xi) + D`
    FifthOrderSoliton,
    /// `A / (1 + B cosh(xi / Delta)) + D`
    GardnerSoliton,
}

impl Family {
    pub fn is_elliptic(self) -> bool {
        matches!(
            self,
            Family::KdvCnoidal | Family::KdvSuperpositionPlus | Family::KdvSuperpositionMinus
        )
    }
}

/// A wave `u(x, t) = A f(x - v t) + D` of fixed profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravellingWaveSpec {
    pub family: Family,
    pub amplitude: f64,
    /// Inverse length. Signed for the Gardner family.
    pub b: f64,
    pub v: f64,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<EllipticParameter>,
    /// Width `Delta` of the Gardner family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default)]
    pub frame: Frame,
}

impl TravellingWaveSpec {
    /// Wraps coefficients obtained elsewhere (typically by fitting). Only
    /// structural checks are made.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coefficients(
        family: Family,
        amplitude: f64,
        b: f64,
        v: f64,
        d: f64,
        m: Option<f64>,
        width: Option<f64>,
        frame: Frame,
    ) -> Result<Self> {
        let m = match (family.is_elliptic(), m) {
            (true, Some(m)) => Some(EllipticParameter::new(m)?),
            (true, None) => return Err(domain("m", "elliptic family needs m")),
            (false, _) => None,
        };
        let width = match (family, width) {
            (Family::GardnerSoliton, Some(w)) if w != 0.0 && w.is_finite() => Some(w),
            (Family::GardnerSoliton, _) => {
                return Err(domain("Delta", "Gardner family needs a finite non-zero width"))
            }
            _ => None,
        };
        for (name, x) in [("A", amplitude), ("B", b), ("v", v), ("D", d)] {
            if !x.is_finite() {
                return Err(domain(name, format!("coefficient must be finite, got {x}")));
            }
        }
        Ok(Self {
            family,
            amplitude,
            b,
            v,
            d,
            m,
            width,
            frame,
        })
    }

    fn m_value(&self) -> f64 {
        self.m.map(EllipticParameter::value).unwrap_or(1.0)
    }

    /// `A f(xi)` without the offset `D`.
    pub fn shape<S: Scalar>(&self, xi: S) -> S {
        let a = self.amplitude;
        match self.family {
            Family::KdvSoliton | Family::Kdv2Soliton => {
                let s = (xi * self.b).sech();
                s * s * a
            }
            Family::FifthOrderSoliton => {
                let s = (xi * self.b).sech();
                let s2 = s * s;
                s2 * s2 * a
            }
            Family::KdvCnoidal => {
                let (_, cn, _) = (xi * self.b).jacobi(self.m_value());
                cn * cn * a
            }
            Family::KdvSuperpositionPlus | Family::KdvSuperpositionMinus => {
                let m = self.m_value();
                let sign = if self.family == Family::KdvSuperpositionPlus {
                    1.0
                } else {
                    -1.0
                };
                let (_, cn, dn) = (xi * self.b).jacobi(m);
                (dn * dn + cn * dn * (sign * m.sqrt())) * (0.5 * a)
            }
            Family::GardnerSoliton => {
                // A / (1 + B cosh z) written with sech to stay finite for large z
                let delta = self.width.unwrap_or(1.0);
                let s = (xi * (1.0 / delta)).sech();
                s * a / (s + self.b)
            }
        }
    }

    pub fn eval_generic<S: Scalar>(&self, x: S, t: S) -> S {
        let xi = x - t * self.v;
        self.shape(xi) + self.d
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.eval_generic(x, t)
    }

    /// Spatial period, or `None` for solitary waves.
    pub fn period(&self) -> Option<f64> {
        let m = self.m?;
        if m.is_soliton_limit() {
            return None;
        }
        let k = elliptic_k(m.value()).ok()?;
        let quarter_periods = match self.family {
            Family::KdvCnoidal => 2.0,
            _ => 4.0,
        };
        Some(quarter_periods * k / self.b.abs())
    }

    /// Distance from the crest beyond which the wave is below double
    /// precision relative to its amplitude.
    pub fn decay_half_width(&self) -> f64 {
        match self.family {
            Family::GardnerSoliton => {
                let delta = self.width.unwrap_or(1.0).abs();
                delta * (40.0 + (2.0 / self.b.abs().max(1e-300)).ln().max(0.0))
            }
            _ => 24.0 / self.b.abs(),
        }
    }
}

fn check_alpha_a(params: &MediumParams, amplitude: f64) -> Result<()> {
    params.validate()?;
    if !amplitude.is_finite() || params.alpha * amplitude <= 0.0 {
        return Err(domain(
            "A",
            format!(
                "alpha * A must be positive for a real inverse length (alpha = {}, A = {amplitude})",
                params.alpha
            ),
        ));
    }
    Ok(())
}

/// Single KdV soliton `A sech^2(B(x - v t))`,
/// `B = sqrt(3 alpha A / (4 beta))`, `v = 1 + alpha A / 2`.
pub fn make_kdv_soliton(params: &MediumParams, amplitude: f64, frame: Frame) -> Result<TravellingWaveSpec> {
    check_alpha_a(params, amplitude)?;
    let aa = params.alpha * amplitude;
    Ok(TravellingWaveSpec {
        family: Family::KdvSoliton,
        amplitude,
        b: (3.0 * aa / (4.0 * params.beta)).sqrt(),
        v: 1.0 + 0.5 * aa - (1.0 - frame.transport()),
        d: 0.0,
        m: None,
        width: None,
        frame,
    })
}

/// `E(m)/K(m)`, taken as zero in the soliton limit.
fn e_over_k(m: EllipticParameter) -> Result<f64> {
    if m.is_soliton_limit() {
        return Ok(0.0);
    }
    Ok(elliptic_e(m.value())? / elliptic_k(m.value())?)
}

fn check_open_m(m: f64) -> Result<EllipticParameter> {
    if !(m > 0.0 && m < 1.0) {
        return Err(domain("m", format!("must lie in (0, 1), got {m}")));
    }
    EllipticParameter::new(m)
}

/// Cnoidal wave `A cn^2(B xi | m) + D`.
///
/// For `m >= 1 - 1e-12` the ratio `E/K` is taken as zero, which reproduces
/// the soliton coefficients.
pub fn make_kdv_cnoidal(
    params: &MediumParams,
    amplitude: f64,
    m: f64,
    frame: Frame,
) -> Result<TravellingWaveSpec> {
    let mp = check_open_m(m)?;
    check_alpha_a(params, amplitude)?;
    let ek = e_over_k(mp)?;
    let a_over_m = amplitude / m;
    Ok(TravellingWaveSpec {
        family: Family::KdvCnoidal,
        amplitude,
        b: (3.0 * params.alpha * a_over_m / (4.0 * params.beta)).sqrt(),
        v: 1.0 + 0.5 * params.alpha * a_over_m * (2.0 - m - 3.0 * ek) - (1.0 - frame.transport()),
        d: -a_over_m * (ek + m - 1.0),
        m: Some(mp),
        width: None,
        frame,
    })
}

/// Superposition wave `(A/2)[dn^2 +- sqrt(m) cn dn] + D`.
///
/// `B` is supplied by the caller. `D = -(A/2) E/K` makes the spatial mean
/// over one period vanish; the speed is `1 + (alpha A/8)(5 - m - 6E/K)`.
pub fn make_kdv_superposition(
    params: &MediumParams,
    amplitude: f64,
    m: f64,
    b: f64,
    sign: f64,
    frame: Frame,
) -> Result<TravellingWaveSpec> {
    params.validate()?;
    let mp = check_open_m(m)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain("B", format!("must be positive, got {b}")));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(domain("sign", format!("must be +1 or -1, got {sign}")));
    }
    if !amplitude.is_finite() || amplitude == 0.0 {
        return Err(domain("A", format!("must be finite and non-zero, got {amplitude}")));
    }
    let ek = e_over_k(mp)?;
    Ok(TravellingWaveSpec {
        family: if sign > 0.0 {
            Family::KdvSuperpositionPlus
        } else {
            Family::KdvSuperpositionMinus
        },
        amplitude,
        b,
        v: 1.0 + params.alpha * amplitude / 8.0 * (5.0 - m - 6.0 * ek) - (1.0 - frame.transport()),
        d: -0.5 * amplitude * ek,
        m: Some(mp),
        width: None,
        frame,
    })
}

/// Gardner soliton `A / (1 + B cosh((x - v t)/Delta))` with
/// `A = 4 beta' / (alpha Delta^2)`, `B = +-sqrt(1 - beta'/Delta^2)`,
/// `v = 1 + beta'/Delta^2`.
pub fn make_gardner_soliton(
    params: &MediumParams,
    width: f64,
    sign_b: f64,
    frame: Frame,
) -> Result<TravellingWaveSpec> {
    params.validate()?;
    if params.alpha == 0.0 {
        return Err(domain("alpha", "Gardner amplitude divides by alpha"));
    }
    if width == 0.0 || !width.is_finite() {
        return Err(domain("Delta", format!("must be finite and non-zero, got {width}")));
    }
    if sign_b != 1.0 && sign_b != -1.0 {
        return Err(domain("sign_B", format!("must be +1 or -1, got {sign_b}")));
    }
    let bp = params.beta_prime();
    let ratio = bp / (width * width);
    if 1.0 - ratio < 0.0 {
        return Err(domain(
            "Delta",
            format!("1 - beta'/Delta^2 = {} is negative (beta' = {bp})", 1.0 - ratio),
        ));
    }
    Ok(TravellingWaveSpec {
        family: Family::GardnerSoliton,
        amplitude: 4.0 * bp / (params.alpha * width * width),
        b: sign_b * (1.0 - ratio).sqrt(),
        v: 1.0 + ratio - (1.0 - frame.transport()),
        d: 0.0,
        m: None,
        width: Some(width),
        frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::oracle;

    fn p(alpha: f64, beta: f64) -> MediumParams {
        MediumParams::kdv(alpha, beta).unwrap()
    }

    #[test]
    fn soliton_coefficients() {
        let s = make_kdv_soliton(&p(0.1, 0.1), 1.0, Frame::Fixed).unwrap();
        assert!((s.b - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((s.v - 1.05).abs() < 1e-15);
        assert_eq!(s.d, 0.0);
        let mv = make_kdv_soliton(&p(0.1, 0.1), 1.0, Frame::Moving).unwrap();
        assert_eq!(mv.b, s.b);
        assert!((mv.v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn inverted_soliton_keeps_b_and_v() {
        let up = make_kdv_soliton(&p(0.1, 0.1), 1.0, Frame::Fixed).unwrap();
        let down = make_kdv_soliton(&p(-0.1, 0.1), -1.0, Frame::Fixed).unwrap();
        assert_eq!(down.b, up.b);
        assert_eq!(down.v, up.v);
        assert!((down.v - 1.05).abs() < 1e-15);
        for x in [-3.0, 0.0, 0.7, 11.0] {
            assert_eq!(down.eval(x, 2.0), -up.eval(x, 2.0));
        }
    }

    #[test]
    fn soliton_rejects_imaginary_b() {
        assert!(make_kdv_soliton(&p(0.1, 0.1), -1.0, Frame::Fixed).is_err());
        assert!(make_kdv_soliton(&p(-0.1, 0.1), 1.0, Frame::Fixed).is_err());
        assert!(make_kdv_soliton(&p(0.1, 0.1), 0.0, Frame::Fixed).is_err());
    }

    #[test]
    fn cnoidal_offset_uses_quadrature_ratio() {
        let c = make_kdv_cnoidal(&p(0.1, 0.1), 1.0, 0.9, Frame::Fixed).unwrap();
        let ek = oracle::e_quad(0.9) / oracle::k_quad(0.9);
        assert!((c.d + (ek - 0.1) / 0.9).abs() < 1e-13);
        assert!((c.v - (1.0 + 0.05 / 0.9 * (1.1 - 3.0 * ek))).abs() < 1e-13);
    }

    #[test]
    fn cnoidal_zero_mean() {
        let c = make_kdv_cnoidal(&p(0.1, 0.1), 1.0, 0.9, Frame::Fixed).unwrap();
        let period = c.period().unwrap();
        let mean = oracle::integrate(&|x| c.eval(x, 0.0), 0.0, period, 1e-14) / period;
        assert!(mean.abs() < 1e-10, "mean {mean}");
    }

    #[test]
    fn cnoidal_soliton_limit() {
        let params = p(0.1, 0.1);
        let c = make_kdv_cnoidal(&params, 1.0, 1.0 - 1e-12, Frame::Fixed).unwrap();
        let s = make_kdv_soliton(&params, 1.0, Frame::Fixed).unwrap();
        assert!(c.d.abs() < 1e-6);
        assert!((c.v - s.v).abs() < 1e-6);
        assert!((c.b - s.b).abs() < 1e-6);
        assert!(c.period().is_none());
        assert!(make_kdv_cnoidal(&params, 1.0, 1.0, Frame::Fixed).is_err());
        assert!(make_kdv_cnoidal(&params, 1.0, 0.0, Frame::Fixed).is_err());
    }

    #[test]
    fn superposition_speed_and_limit() {
        let params = p(0.1, 0.1);
        let s = make_kdv_superposition(&params, 1.0, 0.5, 0.8, 1.0, Frame::Fixed).unwrap();
        let ek = oracle::e_quad(0.5) / oracle::k_quad(0.5);
        assert!((s.v - (1.0 + 0.1 / 8.0 * (4.5 - 6.0 * ek))).abs() < 1e-13);

        let m = 1.0 - 1e-9;
        let sup = make_kdv_superposition(&params, 1.0, m, 0.8, 1.0, Frame::Fixed).unwrap();
        for xi in [-6.0, -1.0, 0.0, 0.3, 4.0] {
            let sech = 1.0 / (0.8f64 * xi).cosh();
            assert!((sup.shape(xi) - sech * sech).abs() < 1e-5);
        }
    }

    #[test]
    fn superposition_signs_are_half_period_translates() {
        let params = p(0.1, 0.1);
        let plus = make_kdv_superposition(&params, 1.0, 0.7, 0.9, 1.0, Frame::Fixed).unwrap();
        let minus = make_kdv_superposition(&params, 1.0, 0.7, 0.9, -1.0, Frame::Fixed).unwrap();
        let period = plus.period().unwrap();
        // scan candidate shifts, the best one must be half a period
        let samples: Vec<f64> = (0..200).map(|i| i as f64 * period / 200.0).collect();
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..400 {
            let shift = j as f64 * period / 400.0;
            let err = samples
                .iter()
                .map(|&x| (plus.eval(x + shift, 0.0) - minus.eval(x, 0.0)).abs())
                .fold(0.0, f64::max);
            if err < best.0 {
                best = (err, shift);
            }
        }
        assert!((best.1 - 0.5 * period).abs() < 1e-12, "best shift {}", best.1);
        assert!(best.0 < 1e-12);
    }

    #[test]
    fn gardner_coefficients() {
        let params = MediumParams::new(0.1, 0.3, 0.0, 0.0).unwrap();
        let g = make_gardner_soliton(&params, 1.0, 1.0, Frame::Fixed).unwrap();
        assert!((g.amplitude - 2.0).abs() < 1e-14);
        assert!((g.b - 0.95f64.sqrt()).abs() < 1e-15);
        assert!((g.v - 1.05).abs() < 1e-15);
        assert!((g.eval(0.0, 0.0) - g.amplitude / (1.0 + g.b)).abs() < 1e-15);
        assert!(make_gardner_soliton(&params, 0.1, 1.0, Frame::Fixed).is_err());
        assert!(make_gardner_soliton(&params.inverted(), 1.0, 1.0, Frame::Fixed).is_ok());
        let zero_alpha = MediumParams::new(0.0, 0.3, 0.0, 0.0).unwrap();
        assert!(make_gardner_soliton(&zero_alpha, 1.0, 1.0, Frame::Fixed).is_err());
    }

    #[test]
    fn gardner_flattens_toward_table_top() {
        let params = MediumParams::new(0.1, 0.3, 0.0, 0.0).unwrap();
        let bp = params.beta_prime();
        let mut prev = 0.0;
        for eps in [1e-1, 1e-2, 1e-4, 1e-6, 1e-8] {
            // Delta^2 = beta' / (1 - eps) gives B = sqrt(eps)
            let width = (bp / (1.0 - eps)).sqrt();
            let g = make_gardner_soliton(&params, width, 1.0, Frame::Fixed).unwrap();
            let peak = g.eval(0.0, 0.0);
            // bisection for the half-height point
            let (mut lo, mut hi) = (0.0, 1e3 * width);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g.eval(mid, 0.0) > 0.5 * peak {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!(lo > prev, "half width {lo} did not grow");
            prev = lo;
            assert!((peak - g.amplitude / (1.0 + g.b)).abs() < 1e-12);
        }
        assert!(prev > 8.0 * bp.sqrt());
    }

    #[test]
    fn inversion_closure_of_every_family() {
        let up = MediumParams::new(0.1, 0.3, 0.0, 0.0).unwrap();
        let down = up.inverted();
        let pairs = [
            (
                make_kdv_soliton(&up, 1.3, Frame::Fixed).unwrap(),
                make_kdv_soliton(&down, -1.3, Frame::Fixed).unwrap(),
            ),
            (
                make_kdv_cnoidal(&up, 0.8, 0.6, Frame::Moving).unwrap(),
                make_kdv_cnoidal(&down, -0.8, 0.6, Frame::Moving).unwrap(),
            ),
            (
                make_kdv_superposition(&up, 0.8, 0.6, 0.5, -1.0, Frame::Fixed).unwrap(),
                make_kdv_superposition(&down, -0.8, 0.6, 0.5, -1.0, Frame::Fixed).unwrap(),
            ),
            (
                make_gardner_soliton(&up, 0.5, 1.0, Frame::Fixed).unwrap(),
                make_gardner_soliton(&down, 0.5, 1.0, Frame::Fixed).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            assert_eq!(a.b, b.b);
            assert_eq!(a.v, b.v);
            for i in 0..50 {
                let x = -10.0 + 0.41 * i as f64;
                let (ua, ub) = (a.eval(x, 1.7), b.eval(x, 1.7));
                assert!((ua + ub).abs() <= 1e-14 * ua.abs().max(1e-300), "{:?}", a.family);
            }
        }
    }
}
