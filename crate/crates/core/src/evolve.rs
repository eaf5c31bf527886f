//! Pseudospectral time stepping of the four equations.
//!
//! All constant-coefficient linear terms (transport and odd-order
//! dispersion) are integrated exactly in Fourier space; the nonlinear
//! fluxes and the bottom term are advanced with the classical fourth-order
//! Runge-Kutta scheme in the integrating-factor (Lawson) form.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::MediumParams;
use crate::error::{config, Error, Result};
use crate::operators::{EquationId, EquationKind, Field, Grid, Spectral};

/// Largest allowed `dt * lambda` for the explicit part, where `lambda`
/// bounds the spectral radius of its linearization. RK4 is stable on the
/// imaginary axis up to `2 sqrt(2)`.
pub const STABILITY_LIMIT: f64 = 2.5;

/// Knots closer than this many grid spacings to a grid point are rejected.
pub const KNOT_ALIGNMENT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub equation: EquationId,
    pub params: MediumParams,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `output_stride`-th step. Zero keeps the initial and final
    /// states only.
    #[serde(default)]
    pub output_stride: usize,
    /// 2/3-rule dealiasing of the nonlinear terms. Defaults to on for the
    /// equations with cubic nonlinearity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
}

impl EvolveConfig {
    pub fn new(equation: EquationId, params: MediumParams, grid: Grid, dt: f64, t_end: f64) -> Self {
        Self {
            equation,
            params,
            grid,
            dt,
            t_end,
            output_stride: 0,
            dealias: None,
        }
    }

    pub fn dealias_enabled(&self) -> bool {
        self.dealias
            .unwrap_or(matches!(self.equation.kind, EquationKind::Kdv2 | EquationKind::Gardner))
    }

    /// Number of steps and the step actually taken, `t_end / steps`.
    pub fn steps(&self) -> (usize, f64) {
        let steps = ((self.t_end / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (steps, self.t_end / steps as f64)
    }

    /// Checks everything that does not depend on the initial state.
    pub fn validate(&self) -> Result<()> {
        self.grid
            .validate()
            .map_err(|e| config("grid", e.to_string()))?;
        self.params
            .validate()
            .map_err(|e| config("params", e.to_string()))?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(config(
                "t_end",
                format!("must be at least dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if let Some(b) = &self.equation.bottom {
            for x in b.interior_knots() {
                if self.grid.is_aligned(x, KNOT_ALIGNMENT_TOL) {
                    return Err(config(
                        "bottom.knots",
                        format!("knot at x = {x} coincides with a grid point"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Upper bound on the spectral radius of the explicit part linearized
    /// about `u0`.
    pub fn explicit_stiffness(&self, u0: &Field) -> f64 {
        let p = &self.params;
        let spec = Spectral::new(&self.grid);
        let d = spec.derivatives(&u0.values, &[1, 2]);
        let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (u, ux, uxx) = (u0.max_abs(), max(&d[0]), max(&d[1]));
        let mut k = std::f64::consts::PI / self.grid.spacing();
        if self.dealias_enabled() {
            k *= 2.0 / 3.0;
        }
        let a = p.alpha.abs();
        let mut lam = k * 1.5 * a * u;
        if matches!(self.equation.kind, EquationKind::Kdv2 | EquationKind::Gardner) {
            lam += k * 0.375 * a * a * u * u;
        }
        if self.equation.kind == EquationKind::Kdv2 {
            lam += a * p.beta * (5.0 / 12.0 * u * k.powi(3) + 23.0 / 24.0 * (ux * k * k + uxx * k));
        }
        if let Some(b) = &self.equation.bottom {
            let (h, hx) = b
                .knots()
                .windows(2)
                .fold((0.0f64, 0.0f64), |(h, hx), w| {
                    let s = ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs();
                    (h.max(w[0].1.abs()).max(w[1].1.abs()), hx.max(s))
                });
            lam += p.delta.abs() * (0.5 * h * k + 0.25 * hx);
        }
        lam
    }
}

/// Integral diagnostics at one time level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub time: f64,
    /// `int u dx`
    pub mass: f64,
    /// `int u^2 dx`
    pub momentum: f64,
    pub max: f64,
    pub min: f64,
}

impl MonitorSample {
    pub fn of(f: &Field) -> Self {
        let dx = f.grid.spacing();
        Self {
            time: f.time,
            mass: f.values.iter().sum::<f64>() * dx,
            momentum: f.values.iter().map(|v| v * v).sum::<f64>() * dx,
            max: f.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: f.values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    /// One sample per time step, including the initial state.
    pub monitors: Vec<MonitorSample>,
}

impl Trajectory {
    pub fn initial(&self) -> Option<&Field> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Field> {
        self.snapshots.last()
    }
}

/// Drift of the conserved quantities over a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub samples: usize,
    pub mass_initial: f64,
    pub momentum_initial: f64,
    /// `max_t |mass(t) - mass(0)| / |mass(0)|`, absolute when `mass(0) = 0`.
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub max: f64,
    pub min: f64,
}

fn drift(series: impl Iterator<Item = f64>, initial: f64) -> f64 {
    let d = series.fold(0.0f64, |m, x| m.max((x - initial).abs()));
    if initial != 0.0 {
        d / initial.abs()
    } else {
        d
    }
}

pub fn monitors(traj: &Trajectory) -> Result<MonitorSummary> {
    let first = traj
        .monitors
        .first()
        .ok_or_else(|| crate::error::domain("trajectory", "no monitor samples"))?;
    let m = &traj.monitors;
    Ok(MonitorSummary {
        samples: m.len(),
        mass_initial: first.mass,
        momentum_initial: first.momentum,
        mass_drift: drift(m.iter().map(|s| s.mass), first.mass),
        momentum_drift: drift(m.iter().map(|s| s.momentum), first.momentum),
        max: m.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max),
        min: m.iter().map(|s| s.min).fold(f64::INFINITY, f64::min),
    })
}

struct Stepper {
    spec: Spectral,
    ik: Vec<Complex64>,
    mask: Vec<f64>,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    kind: EquationKind,
    params: MediumParams,
    bottom: Option<(Vec<f64>, Vec<f64>)>,
    dt: f64,
}

impl Stepper {
    fn new(cfg: &EvolveConfig, dt: f64) -> Self {
        let grid = cfg.grid;
        let spec = Spectral::new(&grid);
        let n = grid.n;
        let p = cfg.params;
        let (c3, c5) = match cfg.equation.kind {
            EquationKind::Kdv => (p.beta / 6.0, 0.0),
            EquationKind::Kdv2 => (p.beta / 6.0, 19.0 / 360.0 * p.beta * p.beta),
            EquationKind::FifthOrder => (p.beta_prime(), p.fifth_order_coefficient()),
            EquationKind::Gardner => (p.beta_prime(), 0.0),
        };
        let c1 = cfg.equation.frame.transport();
        let ik: Vec<Complex64> = (0..n).map(|j| spec.multiplier(j, 1)).collect();
        let nyquist = |j: usize| n.is_multiple_of(2) && j == n / 2;
        // L(k) = -i (c1 k - c3 k^3 + c5 k^5); the Nyquist mode is frozen at zero
        let lin: Vec<f64> = spec
            .wavenumbers()
            .iter()
            .map(|&k| -(c1 * k - c3 * k.powi(3) + c5 * k.powi(5)))
            .collect();
        let expo = |s: f64| -> Vec<Complex64> {
            lin.iter()
                .enumerate()
                .map(|(j, w)| if nyquist(j) { Complex64::new(0.0, 0.0) } else { Complex64::from_polar(1.0, w * s) })
                .collect()
        };
        let cutoff = n as f64 / 3.0;
        let mask = (0..n)
            .map(|j| {
                let kj = if j <= n / 2 { j as f64 } else { (n - j) as f64 };
                if nyquist(j) || (cfg.dealias_enabled() && kj > cutoff) {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let bottom = cfg.equation.bottom.as_ref().map(|b| {
            grid.points().iter().map(|&x| b.eval(x)).unzip()
        });
        Self {
            half: expo(0.5 * dt),
            full: expo(dt),
            spec,
            ik,
            mask,
            kind: cfg.equation.kind,
            params: p,
            bottom,
            dt,
        }
    }

    /// Explicit part `N(u_hat)` in Fourier space.
    fn rhs(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let p = &self.params;
        let a = p.alpha;
        let u = self.spec.inverse_real(uh.to_vec());
        let need_x = self.kind == EquationKind::Kdv2 || self.bottom.is_some();
        let ux = need_x.then(|| self.spec.inverse_real(self.spec.apply(uh, 1)));
        let uxx = (self.kind == EquationKind::Kdv2).then(|| self.spec.inverse_real(self.spec.apply(uh, 2)));

        // conservative flux F with N = -F_x
        let flux: Vec<f64> = (0..u.len())
            .map(|j| {
                let v = u[j];
                let mut f = 0.75 * a * v * v;
                if matches!(self.kind, EquationKind::Kdv2 | EquationKind::Gardner) {
                    f -= 0.125 * a * a * v * v * v;
                }
                if let (Some(ux), Some(uxx)) = (&ux, &uxx) {
                    f += a * p.beta * (13.0 / 48.0 * ux[j] * ux[j] + 5.0 / 12.0 * v * uxx[j]);
                }
                f
            })
            .collect();
        let fh = self.spec.forward(&flux);
        let mut out: Vec<Complex64> = fh.iter().zip(&self.ik).map(|(f, ik)| -(f * ik)).collect();

        if let (Some((h, hx)), Some(ux)) = (&self.bottom, &ux) {
            // + (1/4) delta (2 h u_x + h_x u)
            let b: Vec<f64> = (0..u.len())
                .map(|j| 0.25 * p.delta * (2.0 * h[j] * ux[j] + hx[j] * u[j]))
                .collect();
            for (o, bh) in out.iter_mut().zip(self.spec.forward(&b)) {
                *o += bh;
            }
        }
        for (o, m) in out.iter_mut().zip(&self.mask) {
            *o *= m;
        }
        out
    }

    fn step(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let dt = self.dt;
        let e = &self.half;
        let k1 = self.rhs(uh);
        let uh_half: Vec<Complex64> = uh.iter().zip(e).map(|(u, e)| u * e).collect();
        let s2: Vec<Complex64> = (0..uh.len()).map(|j| uh_half[j] + e[j] * k1[j] * (0.5 * dt)).collect();
        let k2 = self.rhs(&s2);
        let s3: Vec<Complex64> = (0..uh.len()).map(|j| uh_half[j] + k2[j] * (0.5 * dt)).collect();
        let k3 = self.rhs(&s3);
        let s4: Vec<Complex64> = (0..uh.len()).map(|j| e[j] * (uh_half[j] + k3[j] * dt)).collect();
        let k4 = self.rhs(&s4);
        (0..uh.len())
            .map(|j| {
                self.full[j] * uh[j]
                    + (self.full[j] * k1[j] + e[j] * (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0)
            })
            .collect()
    }
}

/// Advances `u0` to `cfg.t_end`. The step is shortened if needed so that
/// an integer number of steps lands exactly on `t_end`.
pub fn evolve(u0: &Field, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if u0.grid != cfg.grid {
        return Err(config(
            "grid",
            format!("initial field lives on {:?}, run configured for {:?}", u0.grid, cfg.grid),
        ));
    }
    let (steps, dt) = cfg.steps();
    let lam = cfg.explicit_stiffness(u0);
    if dt * lam > STABILITY_LIMIT {
        return Err(config(
            "dt",
            format!(
                "dt = {dt} exceeds the explicit stability bound {} (stiffness {lam})",
                STABILITY_LIMIT / lam
            ),
        ));
    }
    integrate(u0, cfg, steps, dt)
}

/// The time loop proper, without the stability check.
fn integrate(u0: &Field, cfg: &EvolveConfig, steps: usize, dt: f64) -> Result<Trajectory> {
    let stepper = Stepper::new(cfg, dt);
    let mut uh = stepper.spec.forward(&u0.values);
    // the Nyquist mode is not carried; dealiasing applies to the
    // nonlinear terms only
    if cfg.grid.n.is_multiple_of(2) {
        uh[cfg.grid.n / 2] = Complex64::new(0.0, 0.0);
    }

    let t0 = u0.time;
    let initial = Field::new(cfg.grid, stepper.spec.inverse_real(uh.clone()), t0)?;
    let mut traj = Trajectory {
        monitors: vec![MonitorSample::of(&initial)],
        snapshots: vec![initial],
    };
    for s in 1..=steps {
        let next = stepper.step(&uh);
        let time = t0 + s as f64 * dt;
        let values = stepper.spec.inverse_real(next.clone());
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            let last = traj.monitors.last().map(|m| m.time).unwrap_or(t0);
            let current = Field::new(cfg.grid, stepper.spec.inverse_real(uh), last)?;
            if traj.snapshots.last().map(|f| f.time) != Some(last) {
                traj.snapshots.push(current);
            }
            return Err(Error::NumericalAbort {
                time,
                step: s,
                reason: format!("non-finite value at grid index {j}"),
                partial: Box::new(traj),
            });
        }
        uh = next;
        let field = Field {
            grid: cfg.grid,
            values,
            time,
        };
        traj.monitors.push(MonitorSample::of(&field));
        let keep = s == steps || (cfg.output_stride > 0 && s % cfg.output_stride == 0);
        if keep {
            traj.snapshots.push(field);
        }
    }
    Ok(traj)
}

/// Shift `s` in `[-L/2, L/2)` maximizing the periodic cross-correlation of
/// `b` with `a` translated by `s`, refined to sub-grid accuracy.
pub fn estimate_shift(a: &Field, b: &Field) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch("fields for shift estimation".into()));
    }
    let spec = Spectral::new(&a.grid);
    let fa = spec.forward(&a.values);
    let fb = spec.forward(&b.values);
    let k = spec.wavenumbers().to_vec();
    let cross: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    // C(s) = Re sum conj(fa) fb e^{i k s}; start from the best grid shift
    let corr = spec.inverse_real(cross.clone());
    let n = a.grid.n;
    let j0 = (0..n)
        .max_by(|&i, &j| corr[i].total_cmp(&corr[j]))
        .unwrap_or(0);
    let dx = a.grid.spacing();
    // correlation index j corresponds to b(x) ~ a(x - j dx)
    let mut s = if j0 <= n / 2 { j0 as f64 } else { j0 as f64 - n as f64 } * dx;
    for _ in 0..30 {
        let (mut d1, mut d2) = (0.0, 0.0);
        for (c, &kj) in cross.iter().zip(&k) {
            let w = c * Complex64::from_polar(1.0, kj * s);
            d1 += -kj * w.im;
            d2 += -kj * kj * w.re;
        }
        if d2 >= 0.0 {
            break;
        }
        let step = -d1 / d2;
        s += step;
        if step.abs() < 1e-15 * a.grid.length {
            break;
        }
    }
    let l = a.grid.length;
    Ok((s + 0.5 * l).rem_euclid(l) - 0.5 * l)
}

/// Mean propagation speed over a trajectory, accumulated from consecutive
/// snapshot shifts. Consecutive snapshots must be less than half a period
/// apart in displacement.
pub fn estimate_speed(traj: &Trajectory) -> Result<f64> {
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Err(crate::error::domain("trajectory", "need at least two snapshots"));
    }
    let mut shift = 0.0;
    for w in snaps.windows(2) {
        shift += estimate_shift(&w[0], &w[1])?;
    }
    let span = snaps[snaps.len() - 1].time - snaps[0].time;
    Ok(shift / span)
}
