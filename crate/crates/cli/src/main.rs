//! `gaussmax`: command-line front end. Every command writes one JSON document
//! to standard output; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or domain error.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gaussmax", version, about = "Expected maximum of a 4-D Gaussian vector: closed form, derivatives, geometry, verification")]
#[command(after_help = "Environment: GAUSSMAX_THREADS caps the worker threads (0 or unset = all cores).")]
pub struct Cli {
    /// Pretty-print the JSON and write a short summary to standard error.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Correlation matrix input: inline six-tuple or a file in text or JSON form.
#[derive(Args, Debug, Clone)]
pub struct MatrixArg {
    /// Off-diagonals in the order 12,13,14,23,24,34.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "file")]
    pub corr: Option<String>,
    /// File holding `l12,l13,l14,l23,l24,l34` or `{"offdiag": [...]}`.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// E[max] by the closed form, with the domain class and sum-of-roots bounds.
    Compute(MatrixArg),
    /// Gradient with respect to the six correlations.
    Grad(MatrixArg),
    /// 6×6 Hessian (interior matrices only).
    Hessian(MatrixArg),
    /// Monte Carlo estimate of E[max] or of all four order statistics.
    Mc {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = gaussmax_core::montecarlo::DEFAULT_SHARDS)]
        shards: usize,
        /// Disable antithetic pairing.
        #[arg(long)]
        no_antithetic: bool,
        /// Report all four order statistics instead of the maximum.
        #[arg(long)]
        order_stats: bool,
    },
    /// Mean width of the inscribed tetrahedron of a rank ≤ 3 matrix or of a tetrahedron file.
    Meanwidth {
        #[command(flatten)]
        matrix: MatrixArg,
        /// JSON file `{"vertices": [[x, y, z], ...4]}`.
        #[arg(long, conflicts_with_all = ["corr", "file"])]
        tetra: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        order: usize,
    },
    /// Outer dihedral angles of the tetrahedron {X1..X4}.
    Dihedrals(MatrixArg),
    /// Projected gradient ascent of E[max] over the elliptope.
    Optimize {
        #[arg(long, value_enum, default_value_t = Start::Identity)]
        start: Start,
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Certification distance for the argmax.
        #[arg(long, default_value_t = 1e-4)]
        dist_tol: f64,
        /// Also write the argmax as `{"offdiag": [...]}` to this path.
        #[arg(long)]
        write: Option<PathBuf>,
        /// Include the per-iteration trajectory.
        #[arg(long)]
        trajectory: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Seed of the nonobtuse samples in the hessian suite.
        #[arg(long, default_value_t = gaussmax_core::battery::BATTERY_SEED)]
        seed: u64,
    },
    /// Run one scan with an explicit grid.
    Scan {
        #[command(subcommand)]
        which: ScanKind,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Identity,
    Random,
    File,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identity,
    Monotonicity,
    Inequality,
    Nonconcavity,
    Hessian,
    Bounds,
    All,
}

#[derive(Subcommand, Debug)]
pub enum ScanKind {
    /// H(w1, w2, z) decreasing in z over U.
    H {
        #[arg(long, default_value_t = 50)]
        n_w: usize,
        #[arg(long, default_value_t = 0.05)]
        w_min: f64,
        #[arg(long, default_value_t = 1.5)]
        w_max: f64,
        #[arg(long, default_value_t = 200)]
        z_steps: usize,
        #[arg(long, default_value_t = 400)]
        locate: usize,
    },
    /// Sign of P(u, θ) − P(θ) against u − θ.
    POrdering {
        #[arg(long, default_value_t = 500)]
        n_theta: usize,
        #[arg(long, default_value_t = 500)]
        n_u: usize,
        #[arg(long, default_value_t = 1e-3)]
        band: f64,
    },
    /// Positivity of θ²(cos θ − cos u)⁴ ∂P/∂u.
    PInequality {
        #[arg(long, default_value_t = 500)]
        n_theta: usize,
        #[arg(long, default_value_t = 500)]
        n_u: usize,
        #[arg(long, default_value_t = 1e-3)]
        band: f64,
    },
    /// Runs of det Γ(x, y, ·) > 0.
    U {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
}

fn init_threads() {
    let n = match std::env::var("GAUSSMAX_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("warning: ignoring GAUSSMAX_THREADS={v:?}");
                0
            }
        },
        Err(_) => 0,
    };
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match commands::run(&cli.command) {
        Ok(out) => {
            let text = if cli.pretty {
                serde_json::to_string_pretty(&out.json)
            } else {
                serde_json::to_string(&out.json)
            };
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", text.expect("serializable output"));
            if cli.pretty {
                eprintln!("{}", out.summary);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
