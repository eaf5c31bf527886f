//! Travelling-wave coefficients by collocation.
//!
//! For `u = A f(B xi) + D`, `xi = x - v t`, the equation reduces to an ODE
//! in `xi`. Its residual, normalized by the largest individual term, is
//! driven to zero at Chebyshev points over the wave core with a
//! Levenberg-Marquardt iteration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::{Family, MediumParams, TravellingWaveSpec};
use crate::error::{domain, Error, Result};
use crate::jet::Jet;
use crate::operators::{
    equation_terms, travelling_residual, EquationId, EquationKind, Grid, LocalJet, ResidualOptions,
};
use crate::special::{elliptic_e, elliptic_k};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sech2,
    Sech4,
    Cn2,
    /// `(1/2)[dn^2 + sign sqrt(m) cn dn]`
    Dn2PmCnDn { sign: i8 },
    /// `1 / (1 + B cosh(xi / Delta))`
    Gardner,
}

impl Shape {
    fn is_elliptic(self) -> bool {
        matches!(self, Shape::Cn2 | Shape::Dn2PmCnDn { .. })
    }

    /// Coefficients the shape depends on, excluding the offset.
    pub fn coefficients(self) -> Vec<Coefficient> {
        use Coefficient::*;
        match self {
            Shape::Sech2 | Shape::Sech4 => vec![A, B, V],
            Shape::Cn2 | Shape::Dn2PmCnDn { .. } => vec![A, B, V, M],
            Shape::Gardner => vec![A, B, V, Delta],
        }
    }

    fn family(self, kind: EquationKind) -> Family {
        match self {
            Shape::Sech2 if kind == EquationKind::Kdv2 => Family::Kdv2Soliton,
            Shape::Sech2 => Family::KdvSoliton,
            Shape::Sech4 => Family::FifthOrderSoliton,
            Shape::Cn2 => Family::KdvCnoidal,
            Shape::Dn2PmCnDn { sign } if sign >= 0 => Family::KdvSuperpositionPlus,
            Shape::Dn2PmCnDn { .. } => Family::KdvSuperpositionMinus,
            Shape::Gardner => Family::GardnerSoliton,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficient {
    A,
    B,
    V,
    D,
    M,
    Delta,
}

/// Values of every coefficient. Unused ones are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub v: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}

impl Coefficients {
    pub fn new(a: f64, b: f64, v: f64) -> Self {
        Self {
            a,
            b,
            v,
            d: 0.0,
            m: 1.0,
            delta: 1.0,
        }
    }

    pub fn get(&self, c: Coefficient) -> f64 {
        match c {
            Coefficient::A => self.a,
            Coefficient::B => self.b,
            Coefficient::V => self.v,
            Coefficient::D => self.d,
            Coefficient::M => self.m,
            Coefficient::Delta => self.delta,
        }
    }

    pub fn set(&mut self, c: Coefficient, x: f64) {
        match c {
            Coefficient::A => self.a = x,
            Coefficient::B => self.b = x,
            Coefficient::V => self.v = x,
            Coefficient::D => self.d = x,
            Coefficient::M => self.m = x,
            Coefficient::Delta => self.delta = x,
        }
    }
}

/// How the offset `D` is determined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetRule {
    /// `D` is fixed at its initial value, or fitted when listed as free.
    #[default]
    AsGiven,
    /// `D` makes the mean over one period vanish (elliptic shapes).
    ZeroMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFamily {
    pub shape: Shape,
    pub free: Vec<Coefficient>,
    #[serde(default)]
    pub offset: OffsetRule,
}

impl AnsatzFamily {
    pub fn new(shape: Shape, free: &[Coefficient]) -> Self {
        Self {
            shape,
            free: free.to_vec(),
            offset: OffsetRule::AsGiven,
        }
    }

    pub fn zero_mean(mut self) -> Self {
        self.offset = OffsetRule::ZeroMean;
        self
    }

    fn validate(&self, eq: &EquationId) -> Result<()> {
        if eq.bottom.is_some() {
            return Err(Error::Incompatible(
                "travelling waves are fitted over a flat bottom only".into(),
            ));
        }
        if self.free.is_empty() {
            return Err(domain("free", "at least one coefficient must be free"));
        }
        for (i, c) in self.free.iter().enumerate() {
            if self.free[..i].contains(c) {
                return Err(domain("free", format!("{c:?} listed twice")));
            }
            let allowed = *c == Coefficient::D || self.shape.coefficients().contains(c);
            if !allowed {
                return Err(Error::Incompatible(format!("{:?} has no coefficient {c:?}", self.shape)));
            }
        }
        if self.offset == OffsetRule::ZeroMean {
            if !self.shape.is_elliptic() {
                return Err(Error::Incompatible("zero-mean offset needs a periodic shape".into()));
            }
            if self.free.contains(&Coefficient::D) {
                return Err(domain("free", "D cannot be free under the zero-mean rule"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Target for the largest normalized collocation residual.
    pub tol: f64,
    pub max_iterations: usize,
    /// Resolution of the full-grid check.
    pub grid_n: usize,
    /// Keep iterating through a rank-deficient Jacobian instead of
    /// reporting `SingularJacobian`. Underdetermined fits need this.
    pub allow_singular: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 200,
            grid_n: 1024,
            allow_singular: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    SingularJacobian,
    /// The iterate left the admissible region (for example `m` outside
    /// `(0, 1)` or `B = 0`) and could not be brought back.
    Degenerate,
    /// Collocation converged but the full-grid residual exceeds `10 tol`.
    GridCheckFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Present only when the fit converged.
    pub spec: Option<TravellingWaveSpec>,
    pub coefficients: Coefficients,
    /// Largest normalized collocation residual at the final iterate.
    pub residual_after: f64,
    /// Relative residual on the full grid, when it was evaluated.
    pub grid_residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub status: FitStatus,
}

struct Problem<'a> {
    family: &'a AnsatzFamily,
    eq: &'a EquationId,
    params: &'a MediumParams,
    points: Vec<f64>,
    base: Coefficients,
}

impl Problem<'_> {
    fn coefficients(&self, x: &[f64]) -> Coefficients {
        let mut c = self.base;
        for (k, v) in self.family.free.iter().zip(x) {
            c.set(*k, *v);
        }
        c
    }

    fn spec(&self, c: &Coefficients) -> Result<TravellingWaveSpec> {
        build_spec(self.family, self.eq, c)
    }

    /// Normalized residuals at the collocation points.
    fn residuals(&self, x: &[f64]) -> Option<Vec<f64>> {
        let c = self.coefficients(x);
        let spec = self.spec(&c).ok()?;
        let mut raw = Vec::with_capacity(self.points.len());
        let mut scale = 0.0f64;
        for &xi in &self.points {
            let j = spec.shape(Jet::<6>::variable(xi)) + spec.d;
            let local = LocalJet::from_space_jet(&j, -spec.v * j.derivative(1));
            let terms = equation_terms(self.eq.kind, self.eq.frame, self.params, &local, None);
            scale = terms.iter().fold(scale, |m, t| m.max(t.abs()));
            raw.push(terms.iter().sum::<f64>());
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return None;
        }
        let r: Vec<f64> = raw.iter().map(|v| v / scale).collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self, x: &[f64], r0: &[f64], central: bool) -> Option<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(r0.len(), x.len());
        let mut xp = x.to_vec();
        for k in 0..x.len() {
            let h = 1e-7 * (1.0 + x[k].abs());
            xp[k] = x[k] + h;
            let rp = self.residuals(&xp)?;
            if central {
                xp[k] = x[k] - h;
                let rm = self.residuals(&xp)?;
                for i in 0..r0.len() {
                    jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
                }
            } else {
                for i in 0..r0.len() {
                    jac[(i, k)] = (rp[i] - r0[i]) / h;
                }
            }
            xp[k] = x[k];
        }
        Some(jac)
    }
}

fn zero_mean_offset(shape: Shape, a: f64, m: f64) -> Result<f64> {
    let ek = elliptic_e(m)? / elliptic_k(m)?;
    Ok(match shape {
        Shape::Cn2 => -a * (ek + m - 1.0) / m,
        _ => -0.5 * a * ek,
    })
}

fn build_spec(family: &AnsatzFamily, eq: &EquationId, c: &Coefficients) -> Result<TravellingWaveSpec> {
    let shape = family.shape;
    if shape.is_elliptic() && !(c.m > 0.0 && c.m < 1.0) {
        return Err(domain("m", format!("must lie in (0, 1), got {}", c.m)));
    }
    if shape != Shape::Gardner && c.b == 0.0 {
        return Err(domain("B", "must be non-zero"));
    }
    let d = match family.offset {
        OffsetRule::ZeroMean => zero_mean_offset(shape, c.a, c.m)?,
        OffsetRule::AsGiven => c.d,
    };
    TravellingWaveSpec::from_coefficients(
        shape.family(eq.kind),
        c.a,
        c.b,
        c.v,
        d,
        shape.is_elliptic().then_some(c.m),
        (shape == Shape::Gardner).then_some(c.delta),
        eq.frame,
    )
}

/// Chebyshev points on `(0, X)`, where `X` covers the wave core (solitary
/// shapes) or half a period (periodic shapes, all of which are even).
fn collocation_points(family: &AnsatzFamily, c: &Coefficients, count: usize) -> Result<Vec<f64>> {
    let b = c.b.abs();
    let extent = match family.shape {
        Shape::Sech2 | Shape::Sech4 => 8.0 / b,
        Shape::Cn2 => elliptic_k(c.m)? / b,
        Shape::Dn2PmCnDn { .. } => 2.0 * elliptic_k(c.m)? / b,
        Shape::Gardner => {
            let w = c.delta.abs();
            w * (8.0 + (2.0 / b.max(1e-300)).ln().max(0.0))
        }
    };
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(domain("B", format!("cannot place collocation points for B = {}", c.b)));
    }
    Ok((0..count)
        .map(|j| {
            let th = std::f64::consts::PI * (j as f64 + 0.5) / count as f64;
            0.5 * extent * (1.0 - th.cos())
        })
        .collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Least-squares step of the damped system `[J; sqrt(lambda) S] dx = [-r; 0]`
/// with `S = diag(|J_k|)`.
fn lm_step(jac: &DMatrix<f64>, r: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let (rows, cols) = jac.shape();
    let mut aug = DMatrix::zeros(rows + cols, cols);
    aug.view_mut((0, 0), (rows, cols)).copy_from(jac);
    for k in 0..cols {
        let norm = jac.column(k).norm().max(1e-300);
        aug[(rows + k, k)] = lambda.sqrt() * norm;
    }
    let mut rhs = DVector::zeros(rows + cols);
    for i in 0..rows {
        rhs[i] = -r[i];
    }
    let svd = aug.svd(true, true);
    let sol = svd.solve(&rhs, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

// Forward differences carry ~1e-8 relative noise, so an exactly
// degenerate direction shows up as a condition number near 1e8.
const SINGULAR_CONDITION: f64 = 1e7;

fn condition(jac: &DMatrix<f64>) -> f64 {
    let sv = jac.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    let min = sv.iter().fold(f64::INFINITY, |m, s| m.min(*s));
    if max == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Grid for the full-grid check of a fitted wave.
pub fn check_grid(spec: &TravellingWaveSpec, n: usize) -> Result<Grid> {
    match spec.period() {
        Some(p) => Grid::centered(p, n),
        None => Grid::centered(2.0 * spec.decay_half_width(), n),
    }
}

/// Fits the free coefficients of `family` so that the travelling wave
/// solves `eq`. Never returns a spec unless both the collocation residual
/// and the full-grid residual are within tolerance.
pub fn fit_travelling_wave(
    family: &AnsatzFamily,
    eq: &EquationId,
    params: &MediumParams,
    init: &Coefficients,
    opts: &FitOptions,
) -> Result<FitResult> {
    params.validate()?;
    family.validate(eq)?;
    if !(opts.tol > 0.0) {
        return Err(domain("tol", format!("must be positive, got {}", opts.tol)));
    }
    for c in [init.a, init.b, init.v, init.d, init.m, init.delta] {
        if !c.is_finite() {
            return Err(domain("init", "initial coefficients must be finite"));
        }
    }
    let count = (3 * family.free.len()).max(24);
    let problem = Problem {
        family,
        eq,
        params,
        points: collocation_points(family, init, count)?,
        base: *init,
    };
    let mut x: Vec<f64> = family.free.iter().map(|c| init.get(*c)).collect();
    let finish = |x: &[f64], res: f64, it: usize, status: FitStatus| FitResult {
        spec: None,
        coefficients: problem.coefficients(x),
        residual_after: res,
        grid_residual: None,
        iterations: it,
        converged: false,
        status,
    };
    let Some(mut r) = problem.residuals(&x) else {
        return Ok(finish(&x, f64::NAN, 0, FitStatus::Degenerate));
    };
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut it = 0;
    while max_abs(&r) > opts.tol {
        if it >= opts.max_iterations {
            return Ok(finish(&x, max_abs(&r), it, FitStatus::MaxIterations));
        }
        it += 1;
        let Some(jac) = problem.jacobian(&x, &r, false) else {
            return Ok(finish(&x, max_abs(&r), it, FitStatus::Degenerate));
        };
        if !opts.allow_singular && condition(&jac) > SINGULAR_CONDITION {
            return Ok(finish(&x, max_abs(&r), it, FitStatus::SingularJacobian));
        }
        let mut accepted = false;
        for _ in 0..40 {
            let Some(dx) = lm_step(&jac, &r, lambda) else { break };
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            if let Some(rt) = problem.residuals(&trial) {
                let ct: f64 = rt.iter().map(|v| v * v).sum();
                if ct < cost {
                    x = trial;
                    r = rt;
                    cost = ct;
                    lambda = (lambda * 0.3).max(1e-15);
                    accepted = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            let status = if problem.residuals(&x).is_none() {
                FitStatus::Degenerate
            } else {
                FitStatus::MaxIterations
            };
            return Ok(finish(&x, max_abs(&r), it, status));
        }
    }

    let mut coefficients = problem.coefficients(&x);
    if family.shape != Shape::Gardner {
        // the shapes are even in B
        coefficients.b = coefficients.b.abs();
    }
    let spec = build_spec(family, eq, &coefficients)?;
    if family.offset == OffsetRule::ZeroMean {
        coefficients.d = spec.d;
    }
    let grid = check_grid(&spec, opts.grid_n)?;
    let report = travelling_residual(
        &spec,
        eq,
        params,
        &grid,
        0.0,
        &ResidualOptions {
            tolerance: 10.0 * opts.tol,
            ..ResidualOptions::default()
        },
    )?;
    let ok = report.passed;
    Ok(FitResult {
        spec: ok.then_some(spec),
        coefficients,
        residual_after: max_abs(&r),
        grid_residual: Some(report.relative),
        iterations: it,
        converged: ok,
        status: if ok {
            FitStatus::Converged
        } else {
            FitStatus::GridCheckFailed
        },
    })
}

/// Numerical rank of the collocation Jacobian with respect to the given
/// coefficients, evaluated at `at` with central differences. Singular
/// values below `1e-6` of the largest are treated as zero.
pub fn jacobian_rank(
    eq: &EquationId,
    family: &AnsatzFamily,
    params: &MediumParams,
    at: &Coefficients,
) -> Result<usize> {
    params.validate()?;
    family.validate(eq)?;
    let count = (3 * family.free.len()).max(24);
    let problem = Problem {
        family,
        eq,
        params,
        points: collocation_points(family, at, count)?,
        base: *at,
    };
    let x: Vec<f64> = family.free.iter().map(|c| at.get(*c)).collect();
    let r = problem
        .residuals(&x)
        .ok_or_else(|| domain("at", "residual undefined at the given coefficients"))?;
    let jac = problem
        .jacobian(&x, &r, true)
        .ok_or_else(|| domain("at", "residual undefined near the given coefficients"))?;
    let sv = jac.svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    Ok(sv.iter().filter(|s| **s > 1e-6 * max).count())
}

/// Number of independent conditions `eq` imposes on the coefficients of
/// `shape`: the Jacobian rank at a solution found by fitting every shape
/// coefficient from `init`.
pub fn count_constraints(
    eq: &EquationId,
    shape: Shape,
    params: &MediumParams,
    init: &Coefficients,
) -> Result<usize> {
    let family = AnsatzFamily::new(shape, &shape.coefficients());
    let opts = FitOptions {
        allow_singular: true,
        ..FitOptions::default()
    };
    let fit = fit_travelling_wave(&family, eq, params, init, &opts)?;
    if !fit.converged {
        return Err(Error::Incompatible(format!(
            "no {shape:?} solution of {} found from the given start ({:?})",
            eq.kind.name(),
            fit.status
        )));
    }
    jacobian_rank(eq, &family, params, &fit.coefficients)
}

/// One distinct solution reached by a multi-start search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub coefficients: Coefficients,
    pub starts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub starts: Vec<f64>,
    pub results: Vec<FitResult>,
    pub basins: Vec<Basin>,
}

/// `count` amplitudes spaced logarithmically over `[hi/100, hi]`.
pub fn log_spaced(hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let f = if count > 1 { i as f64 / (count - 1) as f64 } else { 1.0 };
            hi * 10f64.powf(-2.0 * (1.0 - f))
        })
        .collect()
}

/// Multi-start sech^2 fit of `(A, B, v)` against `eq`. Starting `B` and `v`
/// come from the KdV soliton formulas; converged results closer than `1e-6`
/// (relative) are merged into one basin.
pub fn sech2_multistart(
    eq: &EquationId,
    params: &MediumParams,
    amplitudes: &[f64],
    opts: &FitOptions,
) -> Result<MultiStart> {
    let family = AnsatzFamily::new(Shape::Sech2, &[Coefficient::A, Coefficient::B, Coefficient::V]);
    let sign = params.alpha.signum();
    let mut results = Vec::with_capacity(amplitudes.len());
    let mut basins: Vec<Basin> = Vec::new();
    for (i, &a0) in amplitudes.iter().enumerate() {
        let a = sign * a0.abs();
        let aa = params.alpha * a;
        let init = Coefficients::new(
            a,
            (3.0 * aa / (4.0 * params.beta)).sqrt(),
            eq.frame.transport() + 0.5 * aa,
        );
        let res = fit_travelling_wave(&family, eq, params, &init, opts)?;
        if res.converged {
            let c = res.coefficients;
            let close = |b: &Basin| {
                let o = b.coefficients;
                [(c.a, o.a), (c.b, o.b), (c.v, o.v)]
                    .iter()
                    .all(|(x, y)| (x - y).abs() <= 1e-6 * (1.0 + y.abs()))
            };
            match basins.iter_mut().find(|b| close(b)) {
                Some(b) => b.starts.push(i),
                None => basins.push(Basin {
                    coefficients: c,
                    starts: vec![i],
                }),
            }
        }
        results.push(res);
    }
    Ok(MultiStart {
        starts: amplitudes.to_vec(),
        results,
        basins,
    })
}
