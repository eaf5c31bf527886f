//! TOML run configurations, one document per command.

use std::path::Path;

use kdvinv_core::fit::{Coefficient, Coefficients, Shape};
use kdvinv_core::{BottomProfile, EquationId, EquationKind, Frame, Grid, MediumParams, SolutionRecipe};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config {
                param: "--config".into(),
                reason: format!("cannot read {}: {e}", p.display()),
            })?;
            toml::from_str(&text).map_err(|e| CliError::Config {
                param: "--config".into(),
                reason: format!("{}: {}", p.display(), e.to_string().trim_end()),
            })
        }
    }
}

pub fn required<T>(value: Option<T>, param: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config {
        param: param.into(),
        reason: "missing from the configuration".into(),
    })
}

/// Bathymetry: either a shelf of the given height spanning the grid or
/// explicit knots `[[x, h], ...]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BottomCfg {
    pub shelf: Option<f64>,
    pub knots: Option<Vec<(f64, f64)>>,
}

impl BottomCfg {
    pub fn build(&self, grid: &Grid) -> Result<BottomProfile, CliError> {
        match (self.shelf, &self.knots) {
            (Some(h), None) => Ok(BottomProfile::shelf(grid, h)?),
            (None, Some(k)) => Ok(BottomProfile::new(k.clone())?),
            _ => Err(CliError::Config {
                param: "bottom".into(),
                reason: "give exactly one of `shelf` or `knots`".into(),
            }),
        }
    }
}

/// The equation part shared by several commands.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationCfg {
    pub kind: EquationKind,
    #[serde(default)]
    pub frame: Frame,
    pub bottom: Option<BottomCfg>,
}

impl EquationCfg {
    pub fn build(&self, grid: &Grid) -> Result<EquationId, CliError> {
        let mut eq = EquationId::new(self.kind).with_frame(self.frame);
        if let Some(b) = &self.bottom {
            eq = eq.with_bottom(b.build(grid)?);
        }
        Ok(eq)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub n: Option<usize>,
    pub x0: Option<f64>,
    pub length: Option<f64>,
}

impl GridCfg {
    /// Explicit grid if `length` is given, `None` to use the solution's own.
    pub fn explicit(&self, default_n: usize) -> Result<Option<Grid>, CliError> {
        let n = self.n.unwrap_or(default_n);
        match (self.x0, self.length) {
            (_, None) if self.x0.is_some() => Err(CliError::Config {
                param: "grid.length".into(),
                reason: "x0 given without length".into(),
            }),
            (_, None) => Ok(None),
            (x0, Some(l)) => Ok(Some(Grid::new(x0.unwrap_or(-0.5 * l), l, n)?)),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCfg {
    pub params: Option<MediumParams>,
    pub solution: Option<SolutionRecipe>,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default)]
    pub inverted: bool,
    #[serde(default)]
    pub grid: GridCfg,
    /// Sampling times; defaults to `[0]`.
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckCfg {
    pub solution: SolutionRecipe,
    pub equation: EquationCfg,
    /// Overrides the document-level parameters.
    pub params: Option<MediumParams>,
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub inverted: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfg {
    pub params: Option<MediumParams>,
    /// Adds the built-in catalog sweep.
    #[serde(default)]
    pub catalog: bool,
    #[serde(default)]
    pub check: Vec<CheckCfg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCfg {
    pub params: Option<MediumParams>,
    pub delta: Option<f64>,
    pub shelf_height: Option<f64>,
    pub random_fields: Option<usize>,
    pub base_seed: Option<u64>,
    pub n: Option<usize>,
    pub random_length: Option<f64>,
    pub t: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryCfg {
    #[serde(default)]
    pub matrix: MatrixCfg,
    /// Run only the case with this id.
    pub select: Option<String>,
    /// Also check the negated catalog solutions against `-alpha`.
    #[serde(default)]
    pub inverted_solutions: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptionsCfg {
    pub tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub grid_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultistartCfg {
    pub amplitudes: Option<Vec<f64>>,
    /// With `count`: logarithmic spacing over `[hi/100, hi]`.
    pub hi: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCfg {
    pub params: Option<MediumParams>,
    pub equation: Option<EquationCfg>,
    pub shape: Option<Shape>,
    pub free: Option<Vec<Coefficient>>,
    #[serde(default)]
    pub zero_mean: bool,
    pub init: Option<Coefficients>,
    #[serde(default)]
    pub options: FitOptionsCfg,
    pub multistart: Option<MultistartCfg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveCfg {
    pub params: Option<MediumParams>,
    pub equation: Option<EquationCfg>,
    /// Catalog initial condition; omit and set `random_initial` for a
    /// seeded band-limited field.
    pub initial: Option<SolutionRecipe>,
    #[serde(default)]
    pub random_initial: bool,
    pub seed: Option<u64>,
    #[serde(default)]
    pub inverted: bool,
    #[serde(default)]
    pub grid: GridCfg,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    #[serde(default)]
    pub output_stride: usize,
    pub dealias: Option<bool>,
}
