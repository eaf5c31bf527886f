//! Exact travelling waves of the KdV, extended KdV, fifth-order KdV and
//! Gardner equations, residual operators, a coefficient fitter and a
//! pseudospectral integrator, with checks that the inverted wave `-u`
//! solves the same equation once `alpha` changes sign.

pub mod catalog;
pub mod error;
pub mod evolve;
pub mod fit;
pub mod jet;
pub mod operators;
pub mod special;
pub mod symmetry;

pub use catalog::{Family, Frame, MediumParams, Solution, SolutionRecipe, SolitonLadder, TravellingWaveSpec};
pub use error::{Error, Result};
pub use evolve::{evolve, EvolveConfig, Trajectory};
pub use fit::{fit_travelling_wave, AnsatzFamily, Coefficients, FitResult};
pub use operators::{residual, travelling_residual, BottomProfile, EquationId, EquationKind, Field, Grid, ResidualReport};
pub use special::{elliptic_e, elliptic_k, jacobi_sn_cn_dn, EllipticParameter};
