//! Checks of the inversion property: if `u` solves an equation with
//! parameter `alpha`, then `-u` solves the same equation with `-alpha`.
//! The underlying identity `R_alpha(u) = -R_{-alpha}(-u)` is algebraic and
//! holds for arbitrary fields, with or without a bottom term.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::{MediumParams, Solution, SolutionRecipe};
use crate::error::{domain, Error, Result};
use crate::operators::{
    residual_field, residual_with, Backend, BottomProfile, EquationId, EquationKind, Field, Grid, ResidualOptions,
    ResidualReport, Spectral,
};

/// Pass threshold of the algebraic identity, relative to the term scale.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-13;

/// Where the field of an inversion case comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseSource {
    Recipe { recipe: SolutionRecipe },
    /// A band-limited random field and an independent random `u_t`.
    RandomField { seed: u64 },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionCase {
    pub id: String,
    pub equation: EquationId,
    pub source: CaseSource,
    pub params: MediumParams,
}

impl InversionCase {
    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.alpha == 0.0 {
            return Err(domain("alpha", "inversion needs a non-zero alpha"));
        }
        Ok(())
    }

    fn solution(&self) -> Result<Option<Solution>> {
        match &self.source {
            CaseSource::Recipe { recipe } => Ok(Some(recipe.build(&self.params, self.equation.frame)?)),
            _ => Ok(None),
        }
    }

    /// Grid on which the case's solution is resolved; random and zero
    /// fields use `fallback`.
    pub fn natural_grid(&self, n: usize, t: f64, fallback: Grid) -> Result<Grid> {
        match self.solution()? {
            Some(sol) => sol.natural_grid(n, t),
            None => Ok(fallback),
        }
    }

    /// `(u, u_t)` on `grid` at time `t`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<(Field, Field)> {
        match &self.source {
            CaseSource::Recipe { .. } => self.solution()?.expect("recipe source").sample(grid, t),
            CaseSource::RandomField { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u = random_band_limited(grid, t, &mut rng)?;
                let u_t = random_band_limited(grid, t, &mut rng)?;
                Ok((u, u_t))
            }
            CaseSource::Zero => Ok((Field::zeros(*grid, t), Field::zeros(*grid, t))),
        }
    }
}

/// Random smooth periodic field: modes with `|j| < n/3` get uniform random
/// coefficients damped by `1/(1 + j^2/16)`; the top third of the spectrum
/// is zero.
pub fn random_band_limited(grid: &Grid, t: f64, rng: &mut impl Rng) -> Result<Field> {
    let n = grid.n;
    let cutoff = n / 3;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..cutoff {
        let damp = 1.0 / (1.0 + (j * j) as f64 / 16.0);
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = if j == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
        let c = Complex64::new(re, im) * (damp * n as f64 * 0.5);
        spec[j] = c;
        if j > 0 {
            spec[n - j] = c.conj();
        }
    }
    let values = Spectral::new(grid).inverse_real(spec);
    Field::new(*grid, values, t)
}

/// Evaluates `R_alpha(u) + R_{-alpha}(-u)` pointwise and reports its size
/// relative to the largest term of `R_alpha(u)`.
pub fn check_inversion_algebraic(case: &InversionCase, grid: &Grid, t: f64) -> Result<ResidualReport> {
    check_inversion_algebraic_with(case, grid, t, Backend::Spectral)
}

pub fn check_inversion_algebraic_with(
    case: &InversionCase,
    grid: &Grid,
    t: f64,
    backend: Backend,
) -> Result<ResidualReport> {
    case.validate()?;
    let (u, u_t) = case.sample(grid, t)?;
    let plus = residual_field(&u, &u_t, &case.equation, &case.params, backend)?;
    let minus = residual_field(&u.negated(), &u_t.negated(), &case.equation, &case.params.inverted(), backend)?;
    let defect: Vec<f64> = plus.values.iter().zip(&minus.values).map(|(a, b)| a + b).collect();
    Ok(ResidualReport::from_values(
        format!("{} [algebraic]", case.id),
        case.equation.clone(),
        &defect,
        grid.spacing(),
        plus.scale(),
        ALGEBRAIC_TOLERANCE,
        plus.notes,
    ))
}

/// Builds the inverted solution from the negated recipe with `-alpha` and
/// checks it against the same equation with `-alpha`. The upright residual
/// is recorded in the notes.
pub fn check_inverted_solution(
    case: &InversionCase,
    grid: &Grid,
    t: f64,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    case.validate()?;
    let CaseSource::Recipe { recipe } = &case.source else {
        return Err(Error::Incompatible(format!(
            "case {} has no catalog solution to invert",
            case.id
        )));
    };
    let upright = recipe.build(&case.params, case.equation.frame)?;
    let (u, u_t) = upright.sample(grid, t)?;
    let up = residual_with(&u, &u_t, &case.equation, &case.params, opts)?;

    let inv_params = case.params.inverted();
    let inverted = recipe.inverted().build(&inv_params, case.equation.frame)?;
    let (w, w_t) = inverted.sample(grid, t)?;
    let mut report = residual_with(&w, &w_t, &case.equation, &inv_params, opts)?;
    report.label = format!("{} [inverted, alpha' = -alpha]", case.id);
    report.notes.push(format!(
        "upright residual {:e} ({})",
        up.relative,
        if up.passed { "pass" } else { "fail" }
    ));
    Ok(report)
}

/// Checks the negated solution against the equation with `-alpha` and,
/// for comparison, with `+alpha`. Only the first is expected to pass.
pub fn check_inverted_under_both_signs(
    case: &InversionCase,
    grid: &Grid,
    t: f64,
    opts: &ResidualOptions,
) -> Result<(ResidualReport, ResidualReport)> {
    let minus = check_inverted_solution(case, grid, t, opts)?;
    let sol = case.solution()?.ok_or_else(|| {
        Error::Incompatible(format!("case {} has no catalog solution to invert", case.id))
    })?;
    let (u, u_t) = sol.sample(grid, t)?;
    let mut plus = residual_with(&u.negated(), &u_t.negated(), &case.equation, &case.params, opts)?;
    plus.label = format!("{} [inverted, alpha' = +alpha]", case.id);
    Ok((minus, plus))
}

/// Parameters of the default matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub params: MediumParams,
    /// `delta` used with the shelf bottom.
    pub delta: f64,
    pub shelf_height: f64,
    pub random_fields: usize,
    /// Random field `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub n: usize,
    pub random_length: f64,
    pub t: f64,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        Self {
            params: MediumParams {
                alpha: 0.1,
                beta: 0.1,
                tau: 0.0,
                delta: 0.0,
            },
            delta: 0.05,
            shelf_height: 0.8,
            random_fields: 20,
            base_seed: 20_240_901,
            n: 512,
            random_length: 64.0,
            t: 0.0,
        }
    }
}

/// Catalog solutions used in the matrix.
pub fn catalog_recipes() -> Vec<SolutionRecipe> {
    vec![
        SolutionRecipe::KdvSoliton { amplitude: 1.0 },
        SolutionRecipe::KdvCnoidal { amplitude: 1.0, m: 0.9 },
        SolutionRecipe::GardnerSoliton {
            width: 1.0,
            sign_b: 1.0,
        },
        SolutionRecipe::TwoSoliton {
            amplitudes: vec![1.0, 2.0],
        },
        SolutionRecipe::ThreeSoliton {
            amplitudes: vec![1.0, 2.0, 3.0],
        },
    ]
}

/// One case to run together with the grid it runs on.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedCase {
    pub case: InversionCase,
    pub grid: Grid,
}

/// Four equations x {flat, shelf} bottoms x {catalog, random} sources.
pub fn default_matrix(spec: &MatrixSpec) -> Result<Vec<PlannedCase>> {
    let random_grid = Grid::new(0.0, spec.random_length, spec.n)?;
    let mut out = Vec::new();
    for kind in EquationKind::ALL {
        for shelf in [false, true] {
            let mut params = spec.params;
            params.delta = if shelf { spec.delta } else { 0.0 };
            let bottom_name = if shelf { "shelf" } else { "flat" };
            let base = EquationId::new(kind);
            let mut push = |id: String, source: CaseSource, grid: Grid| -> Result<()> {
                let equation = if shelf {
                    base.clone().with_bottom(BottomProfile::shelf(&grid, spec.shelf_height)?)
                } else {
                    base.clone()
                };
                out.push(PlannedCase {
                    case: InversionCase {
                        id,
                        equation,
                        source,
                        params,
                    },
                    grid,
                });
                Ok(())
            };
            for recipe in catalog_recipes() {
                let sol = recipe.build(&params, base.frame)?;
                let grid = sol.natural_grid(spec.n, spec.t)?;
                push(
                    format!("{}/{bottom_name}/{}", kind.name(), recipe.name()),
                    CaseSource::Recipe { recipe },
                    grid,
                )?;
            }
            for i in 0..spec.random_fields {
                push(
                    format!("{}/{bottom_name}/random-{i:02}", kind.name()),
                    CaseSource::RandomField {
                        seed: spec.base_seed + i as u64,
                    },
                    random_grid,
                )?;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySummary {
    pub cases: usize,
    pub passed: usize,
    pub worst_relative: f64,
    pub worst_id: String,
}

/// Runs the algebraic check over `cases` in order.
pub fn run_cases(cases: &[PlannedCase], t: f64) -> Result<(Vec<ResidualReport>, SymmetrySummary)> {
    let mut reports = Vec::with_capacity(cases.len());
    let mut summary = SymmetrySummary {
        cases: cases.len(),
        passed: 0,
        worst_relative: 0.0,
        worst_id: String::new(),
    };
    for pc in cases {
        let r = check_inversion_algebraic(&pc.case, &pc.grid, t)?;
        if r.passed {
            summary.passed += 1;
        }
        if r.relative >= summary.worst_relative {
            summary.worst_relative = r.relative;
            summary.worst_id = pc.case.id.clone();
        }
        reports.push(r);
    }
    Ok((reports, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Frame;

    fn params() -> MediumParams {
        MediumParams::kdv(0.1, 0.1).unwrap()
    }

    fn case(kind: EquationKind, source: CaseSource) -> InversionCase {
        InversionCase {
            id: "t".into(),
            equation: EquationId::new(kind),
            source,
            params: params(),
        }
    }

    #[test]
    fn zero_field_is_trivially_symmetric() {
        let g = Grid::new(0.0, 10.0, 64).unwrap();
        let r = check_inversion_algebraic(&case(EquationKind::Kdv2, CaseSource::Zero), &g, 0.0).unwrap();
        assert_eq!((r.norm_inf, r.scale), (0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn soliton_identity_is_exact() {
        let c = case(
            EquationKind::Kdv,
            CaseSource::Recipe {
                recipe: SolutionRecipe::KdvSoliton { amplitude: 1.0 },
            },
        );
        let g = c.natural_grid(512, 0.0, Grid::new(0.0, 1.0, 16).unwrap()).unwrap();
        let r = check_inversion_algebraic(&c, &g, 0.0).unwrap();
        assert_eq!(r.norm_inf, 0.0);
    }

    #[test]
    fn random_kdv2_with_shelf() {
        let g = Grid::new(0.0, 64.0, 256).unwrap();
        let mut c = case(EquationKind::Kdv2, CaseSource::RandomField { seed: 7 });
        c.params.delta = 0.05;
        c.equation = c.equation.with_bottom(BottomProfile::shelf(&g, 0.8).unwrap());
        let r = check_inversion_algebraic(&c, &g, 0.0).unwrap();
        assert!(r.passed && r.scale > 0.0, "{r:?}");
    }

    #[test]
    fn random_fields_are_seeded_and_band_limited() {
        let g = Grid::new(0.0, 20.0, 96).unwrap();
        let c = case(EquationKind::Kdv, CaseSource::RandomField { seed: 3 });
        let (a, _) = c.sample(&g, 0.0).unwrap();
        let (b, _) = c.sample(&g, 0.0).unwrap();
        assert_eq!(a, b);
        let spec = Spectral::new(&g).forward(&a.values);
        for (j, s) in spec.iter().enumerate() {
            let kj = j.min(g.n - j);
            if kj >= g.n / 3 {
                assert!(s.norm() < 1e-10 * g.n as f64);
            }
        }
    }

    #[test]
    fn inverted_two_soliton_and_gardner() {
        let opts = ResidualOptions::default();
        for (kind, recipe, p) in [
            (
                EquationKind::Kdv,
                SolutionRecipe::TwoSoliton {
                    amplitudes: vec![1.0, 2.0],
                },
                params(),
            ),
            (
                EquationKind::Gardner,
                SolutionRecipe::GardnerSoliton {
                    width: 1.0,
                    sign_b: 1.0,
                },
                MediumParams::new(0.1, 0.3, 0.0, 0.0).unwrap(),
            ),
        ] {
            let c = InversionCase {
                id: recipe.name().into(),
                equation: EquationId::new(kind),
                source: CaseSource::Recipe { recipe },
                params: p,
            };
            let g = c.natural_grid(1024, 0.0, Grid::new(0.0, 1.0, 16).unwrap()).unwrap();
            let r = check_inverted_solution(&c, &g, 0.0, &opts).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn three_soliton_sign_question() {
        let c = InversionCase {
            id: "three".into(),
            equation: EquationId::new(EquationKind::Kdv),
            source: CaseSource::Recipe {
                recipe: SolutionRecipe::ThreeSoliton {
                    amplitudes: vec![1.0, 2.0, 3.0],
                },
            },
            params: params(),
        };
        let g = c.natural_grid(1024, 0.0, Grid::new(0.0, 1.0, 16).unwrap()).unwrap();
        let (minus, plus) = check_inverted_under_both_signs(&c, &g, 0.0, &ResidualOptions::default()).unwrap();
        assert!(minus.passed, "{minus:?}");
        assert!(!plus.passed && plus.relative > 1e-3, "{plus:?}");
    }

    #[test]
    fn double_inversion_is_identity() {
        let recipe = SolutionRecipe::KdvCnoidal { amplitude: 1.0, m: 0.9 };
        let p = params();
        let g = recipe.build(&p, Frame::Fixed).unwrap().natural_grid(256, 0.0).unwrap();
        let twice = recipe.inverted().inverted();
        let a = recipe.build(&p, Frame::Fixed).unwrap().sample(&g, 0.3).unwrap();
        let b = twice.build(&p.inverted().inverted(), Frame::Fixed).unwrap().sample(&g, 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_matrix_shape() {
        let spec = MatrixSpec {
            random_fields: 2,
            n: 128,
            ..MatrixSpec::default()
        };
        let cases = default_matrix(&spec).unwrap();
        assert_eq!(cases.len(), 4 * 2 * (catalog_recipes().len() + 2));
        let (reports, summary) = run_cases(&cases, 0.0).unwrap();
        assert_eq!(summary.passed, reports.len());
        assert!(summary.worst_relative <= ALGEBRAIC_TOLERANCE);
    }
}
