//! `berndg` — experiment driver for the Bernstein-basis simplicial kernels.
//!
//! Subcommands reproduce the library's headline studies: mass-solver
//! accuracy over random right-hand sides, CG iteration counts, degree
//! scaling of the full DG right-hand side, and plane-wave convergence of
//! the 2-D acoustics solver. Every command prints a table and, with
//! `--out`, writes the same data as a losslessly round-tripping CSV.

mod experiments;
mod report;

use std::path::PathBuf;

use anyhow::Result;
use berndg_core::dg::{BoundaryKind, FluxKind, MassSolverKind};
use clap::{Parser, Subcommand, ValueEnum};

use experiments::{acoustics, cg_study, mass_accuracy, timing, AccuracySolver, AcousticsConfig};
use report::Report;

#[derive(Parser)]
#[command(
    name = "berndg",
    version,
    about = "Bernstein-basis DG kernel experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Block,
    Dense,
    Cg,
    CgFixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum MassSolverArg {
    Block,
    Dense,
}

impl From<MassSolverArg> for MassSolverKind {
    fn from(s: MassSolverArg) -> Self {
        match s {
            MassSolverArg::Block => MassSolverKind::Block,
            MassSolverArg::Dense => MassSolverKind::Dense,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FluxArg {
    Rusanov,
    Upwind,
}

impl From<FluxArg> for FluxKind {
    fn from(f: FluxArg) -> Self {
        match f {
            FluxArg::Rusanov => FluxKind::Rusanov,
            FluxArg::Upwind => FluxKind::Upwind,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Periodic,
    Wall,
}

impl From<BcArg> for BoundaryKind {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Periodic => BoundaryKind::Periodic,
            BcArg::Wall => BoundaryKind::Wall,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Worst-case relative error of a mass solver over random solutions.
    MassAccuracy {
        /// Spatial dimensions to sweep (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "2")]
        dim: Vec<usize>,
        /// Largest polynomial degree.
        #[arg(long, default_value_t = 16)]
        degree_max: usize,
        /// Solver under test.
        #[arg(long, value_enum, default_value_t = SolverArg::Block)]
        solver: SolverArg,
        /// CG relative-residual tolerance (ignored by direct solvers).
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Random trials per (dim, degree); the worst error is reported.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 24601)]
        seed: u64,
        /// Write the report as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conjugate-gradient iteration counts to a fixed tolerance.
    CgStudy {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        dim: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        degree_max: usize,
        /// Relative-residual stopping tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Random trials per (dim, degree).
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 24601)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost of one DG right-hand side per degree on a fixed mesh.
    Timing {
        /// Mesh subdivisions per side (cells = 2·mesh²).
        #[arg(long, default_value_t = 32)]
        mesh: usize,
        #[arg(long, default_value_t = 15)]
        degree_max: usize,
        /// Wall-clock repetitions per degree (median reported).
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Skip wall-clock timing; report hardware-independent
        /// multiply-add counts only.
        #[arg(long)]
        opcount: bool,
        #[arg(long, value_enum, default_value_t = MassSolverArg::Block)]
        solver: MassSolverArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plane-wave convergence runs of the acoustics solver.
    Acoustics {
        /// Polynomial degrees to run (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        degree: Vec<usize>,
        /// Mesh subdivisions per side to run (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        mesh: Vec<usize>,
        #[arg(long, value_enum, default_value_t = FluxArg::Upwind)]
        flux: FluxArg,
        #[arg(long, value_enum, default_value_t = BcArg::Periodic)]
        bc: BcArg,
        /// Time-step safety factor in dt = cfl · h_min / (2n+1).
        #[arg(long, default_value_t = 0.3)]
        cfl: f64,
        #[arg(long, default_value_t = 0.25)]
        tfinal: f64,
        #[arg(long, value_enum, default_value_t = MassSolverArg::Block)]
        solver: MassSolverArg,
        /// Directory for final-state coefficient dumps (one CSV per run).
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (report, out): (Report, Option<PathBuf>) = match cli.cmd {
        Cmd::MassAccuracy { dim, degree_max, solver, tol, reps, seed, out } => {
            let solver = match solver {
                SolverArg::Block => AccuracySolver::Block,
                SolverArg::Dense => AccuracySolver::Dense,
                SolverArg::Cg => AccuracySolver::Cg,
                SolverArg::CgFixed => AccuracySolver::CgFixed,
            };
            (mass_accuracy(&dim, degree_max, solver, tol, reps, seed), out)
        }
        Cmd::CgStudy { dim, degree_max, tol, reps, seed, out } => {
            (cg_study(&dim, degree_max, tol, reps, seed), out)
        }
        Cmd::Timing { mesh, degree_max, reps, opcount, solver, out } => {
            (timing(mesh, degree_max, reps, opcount, solver.into()), out)
        }
        Cmd::Acoustics { degree, mesh, flux, bc, cfl, tfinal, solver, snapshot, out } => {
            let cfg = AcousticsConfig {
                degrees: degree,
                meshes: mesh,
                flux: flux.into(),
                bc: bc.into(),
                solver: solver.into(),
                cfl,
                t_final: tfinal,
                snapshot_dir: snapshot,
            };
            (acoustics(&cfg)?, out)
        }
    };
    print!("{}", report.to_table());
    if let Some(path) = out {
        report.write_csv(&path)?;
        // The CSV is contractually lossless: check the round trip on the
        // bytes actually written.
        let back = Report::parse_csv(&std::fs::read_to_string(&path)?)?;
        anyhow::ensure!(
            back.to_csv() == report.to_csv(),
            "CSV round-trip mismatch for {}",
            path.display()
        );
        eprintln!(
            "wrote {} ({} rows, experiment {})",
            path.display(),
            report.rows.len(),
            report.experiment()
        );
    }
    Ok(())
}
