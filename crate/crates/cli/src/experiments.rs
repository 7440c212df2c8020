//! The experiment drivers behind the CLI subcommands: solver accuracy over
//! random right-hand sides, CG iteration studies, operation-count/wall-time
//! scaling of the DG right-hand side, and plane-wave convergence runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use berndg_core::dg::{
    build_structured_mesh, plane_wave, step_ssprk3, BoundaryKind, Discretization, FluxKind,
    MassSolverKind,
};
use berndg_core::linalg::{norm_2, rel_err_inf, Cholesky};
use berndg_core::mass::{
    cg_solve, condition_number_f64, mass_matrix_f64, FastMassOperator,
};
use berndg_core::mass_solve::BlockLdlt;
use berndg_core::multiindex::dim;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{log_log_slope, Report};

/// Solvers selectable in the accuracy study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccuracySolver {
    /// Block `𝓛Δ𝓛ᵀ` factorization.
    Block,
    /// Dense Cholesky on the assembled matrix.
    Dense,
    /// Matrix-free CG to the requested tolerance.
    Cg,
    /// Matrix-free CG cut off at exactly `n + 1` iterations — one per
    /// distinct eigenvalue, which exact arithmetic would need.
    CgFixed,
}

impl AccuracySolver {
    pub fn name(self) -> &'static str {
        match self {
            Self::Block => "block",
            Self::Dense => "dense",
            Self::Cg => "cg",
            Self::CgFixed => "cg-fixed",
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn rel_err_2(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm_2(b);
    if scale == 0.0 {
        norm_2(&diff)
    } else {
        norm_2(&diff) / scale
    }
}

/// Random-solution accuracy study: draw `trials` exact solutions, form the
/// right-hand side by a dense matrix-vector product, solve with the chosen
/// method, and report the worst relative error per `(dim, degree)`.
pub fn mass_accuracy(
    dims: &[usize],
    degree_max: usize,
    solver: AccuracySolver,
    tol: f64,
    trials: usize,
    seed: u64,
) -> Report {
    assert!(degree_max >= 1 && trials >= 1 && !dims.is_empty());
    let mut report = Report::new(
        "mass-accuracy",
        &["dim", "degree", "matrix_dim", "condition", "err_inf", "err_2"],
    );
    report.push_meta("solver", solver.name());
    report.push_meta("tol", format!("{tol:e}"));
    report.push_meta("trials", trials);
    report.push_meta("seed", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &d in dims {
        for n in 1..=degree_max {
            let nb = dim(d, n);
            let m = mass_matrix_f64(d, n);
            enum Prepared {
                Block(BlockLdlt),
                Dense(Option<Cholesky>),
                Cg(FastMassOperator, usize),
            }
            let prepared = match solver {
                AccuracySolver::Block => Prepared::Block(BlockLdlt::new(d, n)),
                AccuracySolver::Dense => Prepared::Dense(Cholesky::try_new(&m).ok()),
                AccuracySolver::Cg => {
                    Prepared::Cg(FastMassOperator::new(d, n), 1000.max(4 * nb))
                }
                AccuracySolver::CgFixed => Prepared::Cg(FastMassOperator::new(d, n), n + 1),
            };
            let mut err_inf = 0.0f64;
            let mut err_2 = 0.0f64;
            for _ in 0..trials {
                let x_true = random_vector(&mut rng, nb);
                let y = m.matvec(&x_true);
                let x_hat = match &prepared {
                    Prepared::Block(b) => b.solve(&y),
                    Prepared::Dense(Some(ch)) => ch.solve(&y),
                    Prepared::Dense(None) => vec![f64::NAN; nb],
                    Prepared::Cg(fast, max_iter) => {
                        let cg_tol = if solver == AccuracySolver::CgFixed { 0.0 } else { tol };
                        cg_solve(|v| fast.apply(v), &y, cg_tol, *max_iter).x
                    }
                };
                err_inf = err_inf.max(rel_err_inf(&x_hat, &x_true));
                err_2 = err_2.max(rel_err_2(&x_hat, &x_true));
            }
            report.push_row(vec![
                d as f64,
                n as f64,
                nb as f64,
                condition_number_f64(d, n),
                err_inf,
                err_2,
            ]);
        }
    }
    report
}

/// CG iteration counts to a fixed relative-residual tolerance, with the
/// worst case over seeded random right-hand sides.
pub fn cg_study(dims: &[usize], degree_max: usize, tol: f64, trials: usize, seed: u64) -> Report {
    assert!(degree_max >= 1 && trials >= 1 && !dims.is_empty());
    let mut report = Report::new(
        "cg-study",
        &[
            "dim",
            "degree",
            "matrix_dim",
            "condition",
            "iterations",
            "converged",
            "rel_residual",
            "err_inf",
            "err_2",
        ],
    );
    report.push_meta("tol", format!("{tol:e}"));
    report.push_meta("trials", trials);
    report.push_meta("seed", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &d in dims {
        for n in 1..=degree_max {
            let nb = dim(d, n);
            let m = mass_matrix_f64(d, n);
            let fast = FastMassOperator::new(d, n);
            let mut iterations = 0usize;
            let mut all_converged = true;
            let mut rel_residual = 0.0f64;
            let mut err_inf = 0.0f64;
            let mut err_2 = 0.0f64;
            for _ in 0..trials {
                let x_true = random_vector(&mut rng, nb);
                let y = m.matvec(&x_true);
                let res = cg_solve(|v| fast.apply(v), &y, tol, 1000.max(4 * nb));
                iterations = iterations.max(res.iterations);
                all_converged &= res.converged;
                rel_residual = rel_residual.max(res.rel_residual);
                err_inf = err_inf.max(rel_err_inf(&res.x, &x_true));
                err_2 = err_2.max(rel_err_2(&res.x, &x_true));
            }
            report.push_row(vec![
                d as f64,
                n as f64,
                nb as f64,
                condition_number_f64(d, n),
                iterations as f64,
                if all_converged { 1.0 } else { 0.0 },
                rel_residual,
                err_inf,
                err_2,
            ]);
        }
    }
    report
}

fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Cost of one full DG right-hand side (volume, facets, and mass solves)
/// per degree on a fixed mesh: exact multiply-add counts and, unless
/// `opcount_only`, median wall time over `reps` evaluations. The metadata
/// records least-squares log-log slopes over the degree range 5–15.
pub fn timing(
    mesh_m: usize,
    degree_max: usize,
    reps: usize,
    opcount_only: bool,
    solver: MassSolverKind,
) -> Report {
    assert!(degree_max >= 1 && reps >= 1);
    let mut report = Report::new(
        "timing",
        &["degree", "coeffs_per_field", "cells", "dofs", "madds_per_rhs", "median_seconds"],
    );
    report.push_meta("mesh", mesh_m);
    report.push_meta("solver", solver_name(solver));
    report.push_meta("reps", reps);
    report.push_meta("opcount_only", opcount_only);
    let mut madds_points = Vec::new();
    let mut wall_points = Vec::new();
    for n in 1..=degree_max {
        let mesh = build_structured_mesh(mesh_m, true);
        let disc = Discretization::new(mesh, n, FluxKind::Upwind, BoundaryKind::Periodic, solver);
        let state = disc.project(|x, y| plane_wave(x, y, 0.0));
        let mut madds = 0u64;
        std::hint::black_box(disc.rhs_counted(&state, &mut madds));
        let seconds = if opcount_only {
            f64::NAN
        } else {
            let times: Vec<f64> = (0..reps)
                .map(|_| {
                    let t0 = Instant::now();
                    std::hint::black_box(disc.rhs(&state));
                    t0.elapsed().as_secs_f64()
                })
                .collect();
            median(times)
        };
        if (5..=15).contains(&n) {
            madds_points.push((n as f64, madds as f64));
            wall_points.push((n as f64, seconds));
        }
        report.push_row(vec![
            n as f64,
            disc.coeffs_per_field() as f64,
            disc.mesh().num_cells() as f64,
            disc.num_dofs() as f64,
            madds as f64,
            seconds,
        ]);
    }
    report.push_meta("slope_madds_deg5_15", format!("{:.4}", log_log_slope(&madds_points)));
    report.push_meta("slope_seconds_deg5_15", format!("{:.4}", log_log_slope(&wall_points)));
    report
}

fn solver_name(s: MassSolverKind) -> &'static str {
    match s {
        MassSolverKind::Block => "block",
        MassSolverKind::Dense => "dense",
    }
}

fn flux_name(f: FluxKind) -> &'static str {
    match f {
        FluxKind::Rusanov => "rusanov",
        FluxKind::Upwind => "upwind",
    }
}

fn bc_name(b: BoundaryKind) -> &'static str {
    match b {
        BoundaryKind::Periodic => "periodic",
        BoundaryKind::Wall => "wall",
    }
}

pub struct AcousticsConfig {
    pub degrees: Vec<usize>,
    pub meshes: Vec<usize>,
    pub flux: FluxKind,
    pub bc: BoundaryKind,
    pub solver: MassSolverKind,
    pub cfl: f64,
    pub t_final: f64,
    pub snapshot_dir: Option<PathBuf>,
}

/// Plane-wave runs over a degree/mesh grid with SSP-RK3: final per-field
/// L² errors against the exact traveling wave (periodic runs), observed
/// convergence order between consecutive meshes, energy decay,
/// conservation drift, and the multiply-add cost of one right-hand side.
/// Aborts with a diagnostic if the energy grows more than tenfold (CFL
/// instability).
pub fn acoustics(cfg: &AcousticsConfig) -> Result<Report> {
    assert!(!cfg.degrees.is_empty() && !cfg.meshes.is_empty());
    assert!(cfg.cfl > 0.0 && cfg.t_final >= 0.0);
    let mut report = Report::new(
        "acoustics",
        &[
            "degree",
            "mesh",
            "h_min",
            "dt",
            "steps",
            "err_p",
            "err_u",
            "err_v",
            "err_total",
            "order",
            "energy_initial",
            "energy_final",
            "drift_p",
            "drift_u",
            "drift_v",
            "madds_per_rhs",
        ],
    );
    report.push_meta("flux", flux_name(cfg.flux));
    report.push_meta("bc", bc_name(cfg.bc));
    report.push_meta("solver", solver_name(cfg.solver));
    report.push_meta("cfl", cfg.cfl);
    report.push_meta("tfinal", cfg.t_final);
    let periodic = cfg.bc == BoundaryKind::Periodic;
    for &n in &cfg.degrees {
        let mut prev: Option<(usize, f64)> = None;
        for &m in &cfg.meshes {
            let mesh = build_structured_mesh(m, periodic);
            let disc = Discretization::new(mesh, n, cfg.flux, cfg.bc, cfg.solver);
            let state0 = disc.project(|x, y| plane_wave(x, y, 0.0));
            let e0 = disc.energy(&state0);
            let m0 = disc.total_mass(&state0);
            let dt = disc.cfl_dt(cfg.cfl);
            let mut madds = 0u64;
            std::hint::black_box(disc.rhs_counted(&state0, &mut madds));

            let mut q = state0;
            let mut t = 0.0;
            let mut steps = 0usize;
            let mut rhs = |s: &[f64]| disc.rhs(s);
            while t < cfg.t_final - 1e-14 {
                let step = dt.min(cfg.t_final - t);
                q = step_ssprk3(&q, step, &mut rhs);
                t += step;
                steps += 1;
                if steps % 16 == 0 {
                    check_stable(&disc, &q, e0, cfg.cfl, n, m)?;
                }
            }
            check_stable(&disc, &q, e0, cfg.cfl, n, m)?;

            let (errs, err_total, order) = if periodic {
                let tf = cfg.t_final;
                let errs = disc.l2_errors(&q, |x, y| plane_wave(x, y, tf));
                let total =
                    (errs[0] * errs[0] + errs[1] * errs[1] + errs[2] * errs[2]).sqrt();
                let order = match prev {
                    Some((mp, ep)) if total > 0.0 && ep > 0.0 => {
                        (ep / total).ln() / (m as f64 / mp as f64).ln()
                    }
                    _ => f64::NAN,
                };
                prev = Some((m, total));
                (errs, total, order)
            } else {
                ([f64::NAN; 3], f64::NAN, f64::NAN)
            };
            let e1 = disc.energy(&q);
            let m1 = disc.total_mass(&q);
            if let Some(dir) = &cfg.snapshot_dir {
                write_snapshot(dir, n, m, &disc, &q)?;
            }
            report.push_row(vec![
                n as f64,
                m as f64,
                disc.mesh().min_altitude(),
                dt,
                steps as f64,
                errs[0],
                errs[1],
                errs[2],
                err_total,
                order,
                e0,
                e1,
                (m1[0] - m0[0]).abs(),
                (m1[1] - m0[1]).abs(),
                (m1[2] - m0[2]).abs(),
                madds as f64,
            ]);
        }
    }
    Ok(report)
}

fn check_stable(disc: &Discretization, q: &[f64], e0: f64, cfl: f64, n: usize, m: usize) -> Result<()> {
    let e = disc.energy(q);
    if !e.is_finite() || e > 10.0 * e0.max(f64::MIN_POSITIVE) {
        bail!(
            "unstable run at degree {n}, mesh {m}: energy {e:.3e} exceeds 10x the initial {e0:.3e}; lower --cfl (currently {cfl})"
        );
    }
    Ok(())
}

/// Dumps the raw coefficient state as a report with one row per
/// coefficient: `(cell, field, coeff, value)`.
fn write_snapshot(dir: &Path, n: usize, m: usize, disc: &Discretization, state: &[f64]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating snapshot directory {}", dir.display()))?;
    let mut snap = Report::new("acoustics-state", &["cell", "field", "coeff", "value"]);
    snap.push_meta("degree", n);
    snap.push_meta("mesh", m);
    let nb = disc.coeffs_per_field();
    for c in 0..disc.mesh().num_cells() {
        for r in 0..3 {
            for j in 0..nb {
                let v = state[(c * 3 + r) * nb + j];
                snap.push_row(vec![c as f64, r as f64, j as f64, v]);
            }
        }
    }
    let path = dir.join(format!("state_n{n}_m{m}.csv"));
    snap.write_csv(&path)
}
