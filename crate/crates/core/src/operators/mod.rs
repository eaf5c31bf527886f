//! Residuals of the KdV, extended KdV, fifth-order KdV and Gardner
//! equations, optionally with the piecewise-linear bottom term
//! `-(1/4) delta (2 h u_x + h_x u)`.

mod bottom;
mod grid;
mod spectral;

pub use bottom::{bottom_eval, BottomProfile};
pub use grid::{Field, Grid};
pub use spectral::{
    central_stencil_8, derivative, derivatives, fornberg_weights, spectral_derivative, Backend,
    Spectral, SUPPORTED_ORDERS,
};

use serde::{Deserialize, Serialize};

use crate::catalog::{Frame, MediumParams, Solution, TravellingWaveSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Default pass threshold for "is a solution" checks.
pub const SOLUTION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Kdv,
    Kdv2,
    FifthOrder,
    Gardner,
}

impl EquationKind {
    pub const ALL: [EquationKind; 4] = [
        EquationKind::Kdv,
        EquationKind::Kdv2,
        EquationKind::FifthOrder,
        EquationKind::Gardner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Kdv => "kdv",
            EquationKind::Kdv2 => "kdv2",
            EquationKind::FifthOrder => "fifth_order",
            EquationKind::Gardner => "gardner",
        }
    }

    /// Highest spatial derivative in the equation.
    pub fn order(self) -> usize {
        match self {
            EquationKind::Kdv | EquationKind::Gardner => 3,
            EquationKind::Kdv2 | EquationKind::FifthOrder => 5,
        }
    }

    fn uses_tau(self) -> bool {
        matches!(self, EquationKind::FifthOrder | EquationKind::Gardner)
    }
}

/// Which left-hand side to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationId {
    pub kind: EquationKind,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<BottomProfile>,
}

impl EquationId {
    pub fn new(kind: EquationKind) -> Self {
        Self {
            kind,
            frame: Frame::Fixed,
            bottom: None,
        }
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_bottom(mut self, bottom: BottomProfile) -> Self {
        self.bottom = Some(bottom);
        self
    }

    pub fn label(&self) -> String {
        let frame = match self.frame {
            Frame::Fixed => "fixed",
            Frame::Moving => "moving",
        };
        let bottom = if self.bottom.is_some() { "+bottom" } else { "" };
        format!("{}/{frame}{bottom}", self.kind.name())
    }
}

/// Local values of `u`, its time derivative and spatial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalJet {
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_xxx: f64,
    pub u_5x: f64,
}

impl LocalJet {
    /// From a spatial Taylor jet of order 5 and the time derivative.
    pub fn from_space_jet(j: &Jet<6>, u_t: f64) -> Self {
        Self {
            u: j.derivative(0),
            u_t,
            u_x: j.derivative(1),
            u_xx: j.derivative(2),
            u_xxx: j.derivative(3),
            u_5x: j.derivative(5),
        }
    }
}

pub const MAX_TERMS: usize = 10;

/// Individual terms of the selected left-hand side at one point. Absent
/// terms are zero. Every term is odd under `(u, alpha) -> (-u, -alpha)`.
pub fn equation_terms(
    kind: EquationKind,
    frame: Frame,
    params: &MediumParams,
    l: &LocalJet,
    bottom: Option<(f64, f64)>,
) -> [f64; MAX_TERMS] {
    let a = params.alpha;
    let b = params.beta;
    let mut t = [0.0; MAX_TERMS];
    t[0] = l.u_t;
    t[1] = frame.transport() * l.u_x;
    t[2] = 1.5 * a * l.u * l.u_x;
    match kind {
        EquationKind::Kdv => {
            t[3] = b / 6.0 * l.u_xxx;
        }
        EquationKind::Kdv2 => {
            t[3] = b / 6.0 * l.u_xxx;
            t[4] = -0.375 * a * a * l.u * l.u * l.u_x;
            t[5] = a * b * (23.0 / 24.0) * l.u_x * l.u_xx;
            t[6] = a * b * (5.0 / 12.0) * l.u * l.u_xxx;
            t[7] = 19.0 / 360.0 * b * b * l.u_5x;
        }
        EquationKind::FifthOrder => {
            t[3] = params.beta_prime() * l.u_xxx;
            t[7] = params.fifth_order_coefficient() * l.u_5x;
        }
        EquationKind::Gardner => {
            t[3] = params.beta_prime() * l.u_xxx;
            t[4] = -0.375 * a * a * l.u * l.u * l.u_x;
        }
    }
    if let Some((h, h_x)) = bottom {
        t[8] = -0.5 * params.delta * h * l.u_x;
        t[9] = -0.25 * params.delta * h_x * l.u;
    }
    t
}

/// Pointwise residual and the per-point largest term magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualField {
    pub values: Vec<f64>,
    pub term_scale: Vec<f64>,
    pub notes: Vec<String>,
}

impl ResidualField {
    pub fn scale(&self) -> f64 {
        self.term_scale.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Residual norms with a pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    #[serde(default)]
    pub label: String,
    pub equation: EquationId,
    pub norm_inf: f64,
    pub norm_2: f64,
    /// Largest magnitude of any single term over the grid.
    pub scale: f64,
    /// `norm_inf / scale`, or `norm_inf` when the scale vanishes.
    pub relative: f64,
    pub passed: bool,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn from_values(
        label: impl Into<String>,
        equation: EquationId,
        values: &[f64],
        spacing: f64,
        scale: f64,
        tolerance: f64,
        notes: Vec<String>,
    ) -> Self {
        let norm_inf = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let norm_2 = (values.iter().map(|v| v * v).sum::<f64>() * spacing).sqrt();
        let relative = if scale > 0.0 { norm_inf / scale } else { norm_inf };
        Self {
            label: label.into(),
            equation,
            norm_inf,
            norm_2,
            scale,
            relative,
            passed: relative <= tolerance,
            tolerance,
            notes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualOptions {
    pub backend: Backend,
    pub tolerance: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Spectral,
            tolerance: SOLUTION_TOLERANCE,
        }
    }
}

fn notes_for(eq: &EquationId, params: &MediumParams) -> Vec<String> {
    let mut notes = Vec::new();
    if eq.kind.uses_tau() && params.tau > 1.0 / 3.0 {
        notes.push(format!(
            "tau = {} > 1/3: third-order dispersion coefficient is negative",
            params.tau
        ));
    }
    notes
}

/// Pointwise left-hand side of `eq` for the field `u` with time derivative
/// `u_t`.
pub fn residual_field(
    u: &Field,
    u_t: &Field,
    eq: &EquationId,
    params: &MediumParams,
    backend: Backend,
) -> Result<ResidualField> {
    params.validate()?;
    if !u.same_grid(u_t) {
        return Err(Error::GridMismatch(format!(
            "u on {:?}, u_t on {:?}",
            u.grid, u_t.grid
        )));
    }
    if u.time != u_t.time {
        return Err(Error::GridMismatch(format!(
            "u at t = {}, u_t at t = {}",
            u.time, u_t.time
        )));
    }
    let orders: &[usize] = if eq.kind.order() == 5 {
        &[1, 2, 3, 5]
    } else {
        &[1, 2, 3]
    };
    let d = derivatives(&u.grid, &u.values, orders, backend)?;
    let zero = vec![0.0; u.grid.n];
    let d5 = d.get(3).unwrap_or(&zero);
    let points = u.grid.points();

    let mut values = Vec::with_capacity(u.grid.n);
    let mut term_scale = Vec::with_capacity(u.grid.n);
    for j in 0..u.grid.n {
        let local = LocalJet {
            u: u.values[j],
            u_t: u_t.values[j],
            u_x: d[0][j],
            u_xx: d[1][j],
            u_xxx: d[2][j],
            u_5x: d5[j],
        };
        let hb = eq.bottom.as_ref().map(|b| b.eval(points[j]));
        let terms = equation_terms(eq.kind, eq.frame, params, &local, hb);
        values.push(terms.iter().sum());
        term_scale.push(terms.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    Ok(ResidualField {
        values,
        term_scale,
        notes: notes_for(eq, params),
    })
}

/// Residual norms of `eq` for `(u, u_t)` with default options.
pub fn residual(u: &Field, u_t: &Field, eq: &EquationId, params: &MediumParams) -> Result<ResidualReport> {
    residual_with(u, u_t, eq, params, &ResidualOptions::default())
}

pub fn residual_with(
    u: &Field,
    u_t: &Field,
    eq: &EquationId,
    params: &MediumParams,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    let r = residual_field(u, u_t, eq, params, opts.backend)?;
    let scale = r.scale();
    Ok(ResidualReport::from_values(
        eq.label(),
        eq.clone(),
        &r.values,
        u.grid.spacing(),
        scale,
        opts.tolerance,
        r.notes,
    ))
}

/// Samples a travelling wave and its exact time derivative `-v u_x`.
pub fn sample_travelling(spec: &TravellingWaveSpec, grid: &Grid, t: f64) -> Result<(Field, Field)> {
    let mut u = Vec::with_capacity(grid.n);
    let mut u_t = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let j = spec.eval_generic(Jet::<2>::variable(x), Jet::<2>::constant(t));
        u.push(j.c[0]);
        u_t.push(-spec.v * j.derivative(1));
    }
    Ok((Field::new(*grid, u, t)?, Field::new(*grid, u_t, t)?))
}

/// Residual of a closed-form travelling wave sampled on `grid` at time `t`.
pub fn travelling_residual(
    spec: &TravellingWaveSpec,
    eq: &EquationId,
    params: &MediumParams,
    grid: &Grid,
    t: f64,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    if spec.frame != eq.frame {
        return Err(Error::Incompatible(format!(
            "{:?} wave built in the {:?} frame checked against an equation in the {:?} frame",
            spec.family, spec.frame, eq.frame
        )));
    }
    let (u, u_t) = sample_travelling(spec, grid, t)?;
    let mut report = residual_with(&u, &u_t, eq, params, opts)?;
    report.label = format!("{:?} vs {}", spec.family, eq.label());
    Ok(report)
}

/// Residual of any catalog solution, using its exact time derivative.
pub fn solution_residual(
    sol: &Solution,
    eq: &EquationId,
    params: &MediumParams,
    grid: &Grid,
    t: f64,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    if sol.frame() != eq.frame {
        return Err(Error::Incompatible(format!(
            "solution built in the {:?} frame checked against an equation in the {:?} frame",
            sol.frame(),
            eq.frame
        )));
    }
    let (u, u_t) = sol.sample(grid, t)?;
    residual_with(&u, &u_t, eq, params, opts)
}
