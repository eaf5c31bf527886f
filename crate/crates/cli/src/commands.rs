use kdvinv_core::evolve::{estimate_speed, evolve as run_evolve, monitors, EvolveConfig, Trajectory};
use kdvinv_core::fit::{
    fit_travelling_wave, log_spaced, sech2_multistart, AnsatzFamily, FitOptions, FitStatus, Shape,
};
use kdvinv_core::operators::{solution_residual, Backend, ResidualOptions, SOLUTION_TOLERANCE};
use kdvinv_core::symmetry::{
    check_inversion_algebraic_with, check_inverted_solution, default_matrix, random_band_limited, CaseSource,
    MatrixSpec, SymmetrySummary, ALGEBRAIC_TOLERANCE,
};
use kdvinv_core::{EquationId, EquationKind, Field, Frame, Grid, MediumParams, Solution, SolutionRecipe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, required, EquationCfg, EvolveCfg, FitCfg, GridCfg, ProfileCfg, SymmetryCfg, VerifyCfg};
use crate::output::{Sink, Table};
use crate::{BackendArg, CliError, GlobalArgs, Outcome};

const DEFAULT_N: usize = 1024;

fn backend(g: &GlobalArgs) -> Backend {
    match g.backend {
        Some(BackendArg::Fd8) => Backend::Fd8,
        _ => Backend::Spectral,
    }
}

fn spectral_only(g: &GlobalArgs, command: &str) -> Result<(), CliError> {
    if g.backend == Some(BackendArg::Fd8) {
        return Err(CliError::Config {
            param: "--backend".into(),
            reason: format!("{command} is pseudospectral only"),
        });
    }
    Ok(())
}

fn params_or_err(p: Option<MediumParams>, name: &str) -> Result<MediumParams, CliError> {
    let p = required(p, name)?;
    p.validate().map_err(|e| CliError::Config {
        param: name.into(),
        reason: e.to_string(),
    })?;
    Ok(p)
}

/// Builds the upright or inverted solution; the inverted one uses `-alpha`.
fn build(recipe: &SolutionRecipe, params: &MediumParams, frame: Frame, inverted: bool) -> Result<(Solution, MediumParams), CliError> {
    if inverted {
        let p = params.inverted();
        Ok((recipe.inverted().build(&p, frame)?, p))
    } else {
        Ok((recipe.build(params, frame)?, *params))
    }
}

fn grid_for(cfg: &GridCfg, sol: &Solution, t: f64) -> Result<Grid, CliError> {
    match cfg.explicit(DEFAULT_N)? {
        Some(g) => Ok(g),
        None => Ok(sol.natural_grid(cfg.n.unwrap_or(DEFAULT_N), t)?),
    }
}

pub fn profile(g: &GlobalArgs) -> Result<Outcome, CliError> {
    spectral_only(g, "profile")?;
    let cfg: ProfileCfg = config::load(g.config.as_deref())?;
    let params = params_or_err(cfg.params, "params")?;
    let recipe = required(cfg.solution, "solution")?;
    let (sol, _) = build(&recipe, &params, cfg.frame, cfg.inverted)?;
    let times = cfg.times.unwrap_or_else(|| vec![0.0]);
    if times.is_empty() {
        return Err(CliError::Config {
            param: "times".into(),
            reason: "at least one sampling time is needed".into(),
        });
    }
    // one grid for all times, taken at the first one
    let grid = grid_for(&cfg.grid, &sol, times[0])?;
    let mut table = Table::new(&["t", "x", "u"]);
    for &t in &times {
        for x in grid.points() {
            table.row(&[t, x, sol.eval(x, t)?]);
        }
    }
    let sink = Sink::new(g.out.as_deref())?;
    sink.table("profile.csv", &table)?;
    Ok(Outcome::Ok)
}

/// The sweep run by `catalog = true`.
fn catalog_checks() -> Vec<(SolutionRecipe, EquationKind, MediumParams)> {
    let kdv = MediumParams {
        alpha: 0.1,
        beta: 0.1,
        tau: 0.0,
        delta: 0.0,
    };
    let gardner = MediumParams { beta: 0.3, ..kdv };
    vec![
        (SolutionRecipe::KdvSoliton { amplitude: 1.0 }, EquationKind::Kdv, kdv),
        (SolutionRecipe::KdvCnoidal { amplitude: 1.0, m: 0.9 }, EquationKind::Kdv, kdv),
        (
            SolutionRecipe::GardnerSoliton {
                width: 1.0,
                sign_b: 1.0,
            },
            EquationKind::Gardner,
            gardner,
        ),
        (
            SolutionRecipe::TwoSoliton {
                amplitudes: vec![1.0, 2.0],
            },
            EquationKind::Kdv,
            kdv,
        ),
        (
            SolutionRecipe::ThreeSoliton {
                amplitudes: vec![1.0, 2.0, 3.0],
            },
            EquationKind::Kdv,
            kdv,
        ),
    ]
}

pub fn verify(g: &GlobalArgs) -> Result<Outcome, CliError> {
    let cfg: VerifyCfg = config::load(g.config.as_deref())?;
    let opts = ResidualOptions {
        backend: backend(g),
        tolerance: g.tolerance.unwrap_or(SOLUTION_TOLERANCE),
    };
    struct Job {
        recipe: SolutionRecipe,
        equation: EquationCfg,
        params: MediumParams,
        grid: GridCfg,
        t: f64,
        inverted: bool,
    }
    let mut jobs = Vec::new();
    if cfg.catalog {
        for (recipe, kind, params) in catalog_checks() {
            jobs.push(Job {
                recipe,
                equation: EquationCfg {
                    kind,
                    frame: Frame::Fixed,
                    bottom: None,
                },
                params,
                grid: GridCfg::default(),
                t: 0.0,
                inverted: false,
            });
        }
    }
    for (i, c) in cfg.check.into_iter().enumerate() {
        let params = match c.params.or(cfg.params) {
            Some(p) => p,
            None => params_or_err(None, &format!("check[{i}].params"))?,
        };
        jobs.push(Job {
            recipe: c.solution,
            equation: c.equation,
            params,
            grid: c.grid,
            t: c.t,
            inverted: c.inverted,
        });
    }
    let mut sink = Sink::new(g.out.as_deref())?;
    let mut failed = false;
    for job in jobs {
        let (sol, params) = build(&job.recipe, &job.params, job.equation.frame, job.inverted)?;
        let grid = grid_for(&job.grid, &sol, job.t)?;
        let eq = job.equation.build(&grid)?;
        let mut report = solution_residual(&sol, &eq, &params, &grid, job.t, &opts)?;
        report.label = format!(
            "{}{} vs {}",
            if job.inverted { "inverted " } else { "" },
            job.recipe.name(),
            eq.label()
        );
        failed |= !report.passed;
        sink.record(&report)?;
    }
    sink.flush_records("verify.jsonl")?;
    Ok(if failed { Outcome::VerificationFailed } else { Outcome::Ok })
}

pub fn symmetry(g: &GlobalArgs) -> Result<Outcome, CliError> {
    let cfg: SymmetryCfg = config::load(g.config.as_deref())?;
    let d = MatrixSpec::default();
    let m = cfg.matrix;
    let spec = MatrixSpec {
        params: m.params.unwrap_or(d.params),
        delta: m.delta.unwrap_or(d.delta),
        shelf_height: m.shelf_height.unwrap_or(d.shelf_height),
        random_fields: m.random_fields.unwrap_or(d.random_fields),
        base_seed: g.seed.or(m.base_seed).unwrap_or(d.base_seed),
        n: m.n.unwrap_or(d.n),
        random_length: m.random_length.unwrap_or(d.random_length),
        t: m.t.unwrap_or(d.t),
    };
    let mut cases = default_matrix(&spec)?;
    if let Some(id) = &cfg.select {
        cases.retain(|c| &c.case.id == id);
        if cases.is_empty() {
            return Err(CliError::Config {
                param: "select".into(),
                reason: format!("no case with id {id:?}"),
            });
        }
    }
    let tol = g.tolerance.unwrap_or(ALGEBRAIC_TOLERANCE);
    let mut sink = Sink::new(g.out.as_deref())?;
    let mut summary = SymmetrySummary {
        cases: cases.len(),
        passed: 0,
        worst_relative: 0.0,
        worst_id: String::new(),
    };
    let mut failed = false;
    for pc in &cases {
        let mut r = check_inversion_algebraic_with(&pc.case, &pc.grid, spec.t, backend(g))?;
        r.tolerance = tol;
        r.passed = r.relative <= tol;
        if r.passed {
            summary.passed += 1;
        }
        if r.relative >= summary.worst_relative {
            summary.worst_relative = r.relative;
            summary.worst_id = pc.case.id.clone();
        }
        failed |= !r.passed;
        sink.record(&r)?;
    }
    if cfg.inverted_solutions {
        let opts = ResidualOptions {
            backend: backend(g),
            tolerance: SOLUTION_TOLERANCE,
        };
        // only the pairs where the upright solution is exact
        let native = |c: &kdvinv_core::symmetry::InversionCase| match &c.source {
            CaseSource::Recipe { recipe } if c.equation.bottom.is_none() => match recipe {
                SolutionRecipe::GardnerSoliton { .. } => c.equation.kind == EquationKind::Gardner,
                _ => c.equation.kind == EquationKind::Kdv,
            },
            _ => false,
        };
        for pc in cases.iter().filter(|c| native(&c.case)) {
            let r = check_inverted_solution(&pc.case, &pc.grid, spec.t, &opts)?;
            failed |= !r.passed;
            sink.record(&r)?;
        }
    }
    sink.record(&json!({ "summary": summary }))?;
    sink.flush_records("symmetry.jsonl")?;
    Ok(if failed { Outcome::VerificationFailed } else { Outcome::Ok })
}

pub fn fit(g: &GlobalArgs) -> Result<Outcome, CliError> {
    spectral_only(g, "fit")?;
    let cfg: FitCfg = config::load(g.config.as_deref())?;
    let params = params_or_err(cfg.params, "params")?;
    let eq_cfg = required(cfg.equation, "equation")?;
    if eq_cfg.bottom.is_some() {
        return Err(CliError::Config {
            param: "equation.bottom".into(),
            reason: "travelling waves are fitted over a flat bottom only".into(),
        });
    }
    let eq = EquationId::new(eq_cfg.kind).with_frame(eq_cfg.frame);
    let d = FitOptions::default();
    let opts = FitOptions {
        tol: g.tolerance.or(cfg.options.tol).unwrap_or(d.tol),
        max_iterations: cfg.options.max_iterations.unwrap_or(d.max_iterations),
        grid_n: cfg.options.grid_n.unwrap_or(d.grid_n),
        ..d
    };
    let mut sink = Sink::new(g.out.as_deref())?;
    let outcome = if let Some(ms) = cfg.multistart {
        if cfg.shape.is_some_and(|s| s != Shape::Sech2) {
            return Err(CliError::Config {
                param: "shape".into(),
                reason: "multistart searches the sech2 family only".into(),
            });
        }
        let starts = match (ms.amplitudes, ms.hi, ms.count) {
            (Some(a), None, None) => a,
            (None, Some(hi), count) => log_spaced(hi, count.unwrap_or(8)),
            _ => {
                return Err(CliError::Config {
                    param: "multistart".into(),
                    reason: "give either `amplitudes` or `hi` (with optional `count`)".into(),
                })
            }
        };
        let res = sech2_multistart(&eq, &params, &starts, &opts)?;
        for r in &res.results {
            sink.record(r)?;
        }
        sink.record(&json!({ "starts": res.starts, "basins": res.basins }))?;
        if res.basins.is_empty() {
            Outcome::VerificationFailed
        } else {
            Outcome::Ok
        }
    } else {
        let shape = required(cfg.shape, "shape")?;
        let free = required(cfg.free, "free")?;
        let init = required(cfg.init, "init")?;
        let mut family = AnsatzFamily::new(shape, &free);
        if cfg.zero_mean {
            family = family.zero_mean();
        }
        let r = fit_travelling_wave(&family, &eq, &params, &init, &opts)?;
        sink.record(&r)?;
        if r.converged && r.status == FitStatus::Converged {
            Outcome::Ok
        } else {
            Outcome::VerificationFailed
        }
    };
    sink.flush_records("fit.jsonl")?;
    Ok(outcome)
}

#[derive(Serialize)]
struct EvolveSummary {
    equation: String,
    steps: usize,
    dt: f64,
    t_end: f64,
    snapshots: usize,
    monitors: kdvinv_core::evolve::MonitorSummary,
    /// Crest speed from cross-correlation of consecutive snapshots.
    speed: Option<f64>,
    /// Grid position of the largest `|u|`.
    peak_initial: f64,
    peak_final: f64,
    aborted: Option<String>,
}

fn peak(f: &Field) -> f64 {
    let (j, _) = f
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
    f.grid.x(j)
}

fn write_trajectory(sink: &Sink, traj: &Trajectory) -> Result<(), CliError> {
    if !sink.has_dir() {
        return Ok(());
    }
    let mut t = Table::new(&["t", "x", "u"]);
    for s in &traj.snapshots {
        for (x, u) in s.grid.points().iter().zip(&s.values) {
            t.row(&[s.time, *x, *u]);
        }
    }
    sink.file("trajectory.csv", t.as_str())?;
    let mut m = Table::new(&["t", "mass", "momentum", "max", "min"]);
    for s in &traj.monitors {
        m.row(&[s.time, s.mass, s.momentum, s.max, s.min]);
    }
    sink.file("monitors.csv", m.as_str())
}

pub fn evolve(g: &GlobalArgs) -> Result<Outcome, CliError> {
    spectral_only(g, "evolve")?;
    let cfg: EvolveCfg = config::load(g.config.as_deref())?;
    let mut params = params_or_err(cfg.params, "params")?;
    let eq_cfg = required(cfg.equation, "equation")?;
    let dt = required(cfg.dt, "dt")?;
    let t_end = required(cfg.t_end, "t_end")?;

    let (grid, mut u0) = match (&cfg.initial, cfg.random_initial) {
        (Some(recipe), false) => {
            let sol = recipe.build(&params, eq_cfg.frame)?;
            let grid = grid_for(&cfg.grid, &sol, 0.0)?;
            let u0 = Field::from_fn(grid, 0.0, |x| sol.eval(x, 0.0).unwrap_or(f64::NAN))?;
            (grid, u0)
        }
        (None, true) => {
            let grid = cfg.grid.explicit(256)?.ok_or_else(|| CliError::Config {
                param: "grid.length".into(),
                reason: "a random initial field needs an explicit grid".into(),
            })?;
            let seed = g.seed.or(cfg.seed).unwrap_or(0);
            let u0 = random_band_limited(&grid, 0.0, &mut ChaCha8Rng::seed_from_u64(seed))?;
            (grid, u0)
        }
        _ => {
            return Err(CliError::Config {
                param: "initial".into(),
                reason: "give either an `initial` solution or `random_initial = true`".into(),
            })
        }
    };
    if cfg.inverted {
        u0 = u0.negated();
        params = params.inverted();
    }
    let equation = eq_cfg.build(&grid)?;
    let mut ecfg = EvolveConfig::new(equation, params, grid, dt, t_end);
    ecfg.output_stride = cfg.output_stride;
    ecfg.dealias = cfg.dealias;
    let (steps, dt_used) = ecfg.steps();

    let mut sink = Sink::new(g.out.as_deref())?;
    let (traj, abort) = match run_evolve(&u0, &ecfg) {
        Ok(t) => (t, None),
        Err(kdvinv_core::Error::NumericalAbort {
            time,
            step,
            reason,
            partial,
        }) => {
            let msg = format!("numerical abort at t = {time} (step {step}): {reason}");
            (*partial, Some((msg, time, step, reason)))
        }
        Err(e) => return Err(e.into()),
    };
    write_trajectory(&sink, &traj)?;
    let first = traj.initial().expect("trajectory keeps the initial state");
    let last = traj.last().expect("trajectory keeps the initial state");
    let summary = EvolveSummary {
        equation: ecfg.equation.label(),
        steps,
        dt: dt_used,
        t_end,
        snapshots: traj.snapshots.len(),
        monitors: monitors(&traj)?,
        speed: estimate_speed(&traj).ok().filter(|_| traj.snapshots.len() > 1),
        peak_initial: peak(first),
        peak_final: peak(last),
        aborted: abort.as_ref().map(|a| a.0.clone()),
    };
    sink.record(&summary)?;
    sink.flush_records("evolve.jsonl")?;
    match abort {
        None => Ok(Outcome::Ok),
        Some((_, time, step, reason)) => Err(CliError::Core(kdvinv_core::Error::NumericalAbort {
            time,
            step,
            reason,
            partial: Box::default(),
        })),
    }
}
