//! Two- and three-soliton solutions of the KdV equation.
//!
//! The printed formulas contain `coth` and `csch` of the second phase, which
//! have a removable singularity where that phase vanishes. Here every
//! fraction is multiplied through by `tanh^2` of that phase (and, for the
//! three-soliton case, by the squared inner denominators), leaving
//! expressions built from `tanh` and `sech^2` only whose denominators are
//! bounded away from zero.

use serde::{Deserialize, Serialize};

use super::{Frame, MediumParams};
use crate::error::{domain, Result};
use crate::jet::Scalar;

/// Amplitudes of an interacting-soliton solution.
///
/// Inverted ladders (all amplitudes negative, to be paired with `alpha < 0`)
/// are stored as positive magnitudes plus a flag, so phases are always
/// evaluated with `alpha A_i > 0` and the result is negated at the end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LadderRepr", into = "LadderRepr")]
pub struct SolitonLadder {
    magnitudes: Vec<f64>,
    inverted: bool,
    frame: Frame,
}

#[derive(Serialize, Deserialize)]
struct LadderRepr {
    amplitudes: Vec<f64>,
    #[serde(default)]
    frame: Frame,
}

impl TryFrom<LadderRepr> for SolitonLadder {
    type Error = crate::Error;
    fn try_from(r: LadderRepr) -> Result<Self> {
        Self::new(&r.amplitudes, r.frame)
    }
}

impl From<SolitonLadder> for LadderRepr {
    fn from(l: SolitonLadder) -> Self {
        LadderRepr {
            amplitudes: l.amplitudes(),
            frame: l.frame,
        }
    }
}

impl SolitonLadder {
    /// `amplitudes` must have length 2 or 3, share one sign and be strictly
    /// increasing in magnitude.
    pub fn new(amplitudes: &[f64], frame: Frame) -> Result<Self> {
        if !(2..=3).contains(&amplitudes.len()) {
            return Err(domain(
                "amplitudes",
                format!("need 2 or 3 amplitudes, got {}", amplitudes.len()),
            ));
        }
        if amplitudes.iter().any(|a| !a.is_finite() || *a == 0.0) {
            return Err(domain("amplitudes", "amplitudes must be finite and non-zero"));
        }
        let inverted = amplitudes[0] < 0.0;
        if amplitudes.iter().any(|a| (*a < 0.0) != inverted) {
            return Err(domain("amplitudes", "amplitudes must share one sign"));
        }
        let magnitudes: Vec<f64> = amplitudes.iter().map(|a| a.abs()).collect();
        if magnitudes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain(
                "amplitudes",
                format!("magnitudes must be strictly increasing, got {amplitudes:?}"),
            ));
        }
        Ok(Self {
            magnitudes,
            inverted,
            frame,
        })
    }

    /// Signed amplitudes.
    pub fn amplitudes(&self) -> Vec<f64> {
        let s = if self.inverted { -1.0 } else { 1.0 };
        self.magnitudes.iter().map(|a| s * a).collect()
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// The ladder with every amplitude negated.
    pub fn negated(&self) -> Self {
        Self {
            inverted: !self.inverted,
            ..self.clone()
        }
    }

    /// Largest inverse length among the constituent solitons, `sqrt(3|alpha| A_max/(4 beta))`.
    pub fn max_inverse_length(&self, params: &MediumParams) -> f64 {
        let a = self.magnitudes.last().copied().unwrap_or(0.0);
        (3.0 * params.alpha.abs() * a / (4.0 * params.beta)).sqrt()
    }

    /// Smallest inverse length among the constituent solitons.
    pub fn min_inverse_length(&self, params: &MediumParams) -> f64 {
        (3.0 * params.alpha.abs() * self.magnitudes[0] / (4.0 * params.beta)).sqrt()
    }

    fn check(&self, params: &MediumParams, expected: usize) -> Result<()> {
        params.validate()?;
        if self.len() != expected {
            return Err(domain(
                "amplitudes",
                format!("expected {expected} amplitudes, got {}", self.len()),
            ));
        }
        let alpha_ok = if self.inverted {
            params.alpha < 0.0
        } else {
            params.alpha > 0.0
        };
        if !alpha_ok {
            return Err(domain(
                "alpha",
                format!(
                    "alpha * A_i must be positive (alpha = {}, amplitudes {:?})",
                    params.alpha,
                    self.amplitudes()
                ),
            ));
        }
        Ok(())
    }

    /// Evaluates the solution generically, which lets jets deliver exact
    /// space and time derivatives.
    pub fn eval_generic<S: Scalar>(&self, x: S, t: S, params: &MediumParams) -> Result<S> {
        let expected = self.len();
        self.check(params, expected)?;
        let mags = &self.magnitudes;
        let thetas: Vec<S> = mags
            .iter()
            .map(|&a| phase(x, t, params.alpha.abs() * a, params.beta, self.frame))
            .collect();
        let u = if expected == 2 {
            two_soliton(mags[0], mags[1], thetas[0], thetas[1])
        } else {
            three_soliton(mags[0], mags[1], mags[2], thetas[0], thetas[1], thetas[2])
        };
        Ok(if self.inverted { -u } else { u })
    }
}

fn phase<S: Scalar>(x: S, t: S, alpha_a: f64, beta: f64, frame: Frame) -> S {
    let k = (3.0 * alpha_a / (4.0 * beta)).sqrt();
    let c = frame.transport() + 0.5 * alpha_a;
    (x - t * c) * k
}

/// `Theta_i = sqrt(3 alpha A_i / (4 beta)) [x - t (1 + alpha A_i / 2)]`,
/// with the `1` dropped in the moving frame.
pub fn theta(x: f64, t: f64, params: &MediumParams, amplitude: f64, frame: Frame) -> Result<f64> {
    params.validate()?;
    let aa = params.alpha * amplitude;
    if !(aa > 0.0) {
        return Err(domain(
            "A_i",
            format!("alpha * A_i must be positive, got {aa}"),
        ));
    }
    Ok(phase(x, t, aa, params.beta, frame))
}

// (A2-A1)(A1 sech^2 T1 + A2 csch^2 T2) / (sqrt(A1) tanh T1 - sqrt(A2) coth T2)^2,
// multiplied through by tanh^2 T2.
fn two_soliton<S: Scalar>(a1: f64, a2: f64, th1: S, th2: S) -> S {
    let t1 = th1.tanh();
    let t2 = th2.tanh();
    let s1 = th1.sech();
    let s2 = th2.sech();
    let num = (s1 * s1 * t2 * t2 * a1 + s2 * s2 * a2) * (a2 - a1);
    let den = t1 * t2 * a1.sqrt() - a2.sqrt();
    num / (den * den)
}

fn three_soliton<S: Scalar>(a1: f64, a2: f64, a3: f64, th1: S, th2: S, th3: S) -> S {
    let (t1, t2, t3) = (th1.tanh(), th2.tanh(), th3.tanh());
    let (c1, c2, c3) = (th1.sech(), th2.sech(), th3.sech());
    let (s1, s2, s3) = (c1 * c1, c2 * c2, c3 * c3);
    let (r1, r2, r3) = ((2.0 * a1).sqrt(), (2.0 * a2).sqrt(), (2.0 * a3).sqrt());

    // e1 = tanh(T2) * (sqrt(2A1) tanh T1 - sqrt(2A2) coth T2), never zero
    let e1 = t1 * t2 * r1 - r2;
    // d2 = sqrt(2A3) tanh T3 - sqrt(2A1) tanh T1, may vanish
    let d2 = t3 * r3 - t1 * r1;

    // X1 e1^2
    let x1 = (s1 * t2 * t2 * a1 + s2 * a2) * (-2.0 * (a1 - a2));
    // X2 d2^2
    let x2 = (s3 * a3 - s1 * a1) * (2.0 * (a3 - a1));
    // (X1 + X2) e1^2 d2^2
    let num = x1 * d2 * d2 + x2 * e1 * e1;
    // (X3 - X4) e1 d2
    let den = t2 * d2 * (2.0 * (a1 - a2)) - e1 * (2.0 * (a3 - a1));

    s1 * a1 - num / (den * den) * (2.0 * (a2 - a3))
}

/// Two-soliton solution at `(x, t)`.
pub fn eval_two_soliton(x: f64, t: f64, ladder: &SolitonLadder, params: &MediumParams) -> Result<f64> {
    ladder.check(params, 2)?;
    ladder.eval_generic(x, t, params)
}

/// Three-soliton solution at `(x, t)`.
pub fn eval_three_soliton(x: f64, t: f64, ladder: &SolitonLadder, params: &MediumParams) -> Result<f64> {
    ladder.check(params, 3)?;
    ladder.eval_generic(x, t, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    fn params() -> MediumParams {
        MediumParams::kdv(0.1, 0.1).unwrap()
    }

    /// The printed (unregularized) two-soliton formula.
    fn two_soliton_printed(x: f64, t: f64, a1: f64, a2: f64) -> f64 {
        let p = params();
        let th1 = theta(x, t, &p, a1, Frame::Fixed).unwrap();
        let th2 = theta(x, t, &p, a2, Frame::Fixed).unwrap();
        let num = (a2 - a1) * (a1 / th1.cosh().powi(2) + a2 / th2.sinh().powi(2));
        let den = a1.sqrt() * th1.tanh() - a2.sqrt() / th2.tanh();
        num / (den * den)
    }

    /// The printed three-soliton formula built from X1..X4.
    fn three_soliton_printed(x: f64, t: f64, a: [f64; 3]) -> f64 {
        let p = params();
        let th: Vec<f64> = a.iter().map(|&ai| theta(x, t, &p, ai, Frame::Fixed).unwrap()).collect();
        let sech2 = |v: f64| 1.0 / v.cosh().powi(2);
        let csch2 = |v: f64| 1.0 / v.sinh().powi(2);
        let [a1, a2, a3] = a;
        let d1 = (2.0 * a1).sqrt() * th[0].tanh() - (2.0 * a2).sqrt() / th[1].tanh();
        let d2 = -(2.0 * a1).sqrt() * th[0].tanh() + (2.0 * a3).sqrt() * th[2].tanh();
        let x1 = -2.0 * (a1 - a2) * (a1 * sech2(th[0]) + a2 * csch2(th[1])) / (d1 * d1);
        let x2 = 2.0 * (a3 - a1) * (-a1 * sech2(th[0]) + a3 * sech2(th[2])) / (d2 * d2);
        let x3 = 2.0 * (a1 - a2) / d1;
        let x4 = 2.0 * (a3 - a1) / d2;
        a1 * sech2(th[0]) - 2.0 * (a2 - a3) * (x1 + x2) / (x3 - x4).powi(2)
    }

    #[test]
    fn theta_values() {
        let p = params();
        assert_eq!(theta(1.05 * 3.0, 3.0, &p, 1.0, Frame::Fixed).unwrap(), 0.0);
        assert!((theta(1.0, 0.0, &p, 1.0, Frame::Fixed).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        let a = theta(0.3, 1.2, &p, 2.0, Frame::Fixed).unwrap();
        let b = theta(0.3, 1.2, &p.inverted(), -2.0, Frame::Fixed).unwrap();
        assert_eq!(a, b);
        assert!(theta(0.3, 1.2, &p, -2.0, Frame::Fixed).is_err());
    }

    #[test]
    fn regularized_forms_match_printed_formulas() {
        let p = params();
        let two = SolitonLadder::new(&[1.0, 2.0], Frame::Fixed).unwrap();
        let three = SolitonLadder::new(&[1.0, 2.0, 3.0], Frame::Fixed).unwrap();
        for i in 0..40 {
            let x = -7.3 + 0.37 * i as f64;
            for t in [-3.0, -0.4, 0.9, 2.5] {
                let u = eval_two_soliton(x, t, &two, &p).unwrap();
                let v = two_soliton_printed(x, t, 1.0, 2.0);
                assert!((u - v).abs() < 1e-10 * v.abs().max(1.0), "x={x} t={t}: {u} vs {v}");
                let u = eval_three_soliton(x, t, &three, &p).unwrap();
                let v = three_soliton_printed(x, t, [1.0, 2.0, 3.0]);
                assert!((u - v).abs() < 1e-9 * v.abs().max(1.0), "x={x} t={t}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn finite_on_phase_zero_loci() {
        let p = params();
        let two = SolitonLadder::new(&[1.0, 2.0], Frame::Fixed).unwrap();
        let three = SolitonLadder::new(&[1.0, 2.0, 3.0], Frame::Fixed).unwrap();
        for t in [-5.0, 0.0, 1.0, 7.0] {
            // Theta_2 = 0 at x = 1.1 t
            let x = 1.1 * t;
            let u = eval_two_soliton(x, t, &two, &p).unwrap();
            let near = two_soliton_printed(x + 1e-6, t, 1.0, 2.0);
            assert!(u.is_finite() && (u - near).abs() < 1e-5);
            assert!(eval_three_soliton(x, t, &three, &p).unwrap().is_finite());
            assert!(eval_three_soliton(1.15 * t, t, &three, &p).unwrap().is_finite());
        }
        for i in 0..4001 {
            let x = -200.0 + 0.1 * i as f64;
            for t in [-80.0, -10.0, 0.0, 10.0, 80.0] {
                assert!(eval_three_soliton(x, t, &three, &p).unwrap().is_finite());
                assert!(eval_two_soliton(x, t, &two, &p).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn inverted_ladder_is_exact_negation() {
        let p = params();
        let up = SolitonLadder::new(&[1.0, 2.0, 3.0], Frame::Fixed).unwrap();
        let down = SolitonLadder::new(&[-1.0, -2.0, -3.0], Frame::Fixed).unwrap();
        assert_eq!(up.negated(), down);
        for i in 0..30 {
            let x = -9.0 + 0.6 * i as f64;
            let a = up.eval_generic(x, 0.4, &p).unwrap();
            let b = down.eval_generic(x, 0.4, &p.inverted()).unwrap();
            assert_eq!(a, -b);
        }
        assert!(down.eval_generic(0.0, 0.0, &p).is_err());
    }

    #[test]
    fn ladder_validation() {
        assert!(SolitonLadder::new(&[1.0], Frame::Fixed).is_err());
        assert!(SolitonLadder::new(&[2.0, 1.0], Frame::Fixed).is_err());
        assert!(SolitonLadder::new(&[1.0, -2.0], Frame::Fixed).is_err());
        assert!(SolitonLadder::new(&[1.0, 2.0, 3.0, 4.0], Frame::Fixed).is_err());
        let two = SolitonLadder::new(&[1.0, 2.0], Frame::Fixed).unwrap();
        assert!(eval_three_soliton(0.0, 0.0, &two, &params()).is_err());
    }

    #[test]
    fn jets_give_time_derivative() {
        let p = params();
        let ladder = SolitonLadder::new(&[1.0, 2.0], Frame::Fixed).unwrap();
        let (x, t, h) = (0.7, 0.3, 1e-4);
        let jet = ladder
            .eval_generic(Jet::<2>::constant(x), Jet::<2>::variable(t), &p)
            .unwrap();
        let f = |t: f64| eval_two_soliton(x, t, &ladder, &p).unwrap();
        let fd = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
        assert!((jet.derivative(1) - fd).abs() < 1e-10);
    }
}
