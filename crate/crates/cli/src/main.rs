//! `qlm`: generate test surfaces, embed them into Minkowski space, evaluate
//! and minimize the quasi-local mass, solve radial Jang problems and run the
//! identity suites.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlm_core::QlmError;

#[derive(Parser, Debug)]
#[command(name = "qlm", version, about = "Quasi-local mass laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Weyl solver tolerance (relative metric residual)
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Gravitational constant; defaults to the input file's value
    #[arg(long = "G")]
    pub g: Option<f64>,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an analytic test surface
    Gen {
        /// round-sphere, boosted-sphere, ellipsoid, graph-over-sphere, schwarzschild-sphere or dumbbell
        case: String,
        /// Case parameters in order (r | r rapidity | a b c | r | m r | neck)
        #[arg(allow_negative_numbers = true)]
        params: Vec<f64>,
        /// Grid as NxM (colatitude x longitude)
        #[arg(long, default_value = "32x64")]
        resolution: String,
        /// Time-function profile of a graph over the sphere
        #[arg(long, default_value = "mix:0.1")]
        profile: String,
        /// Gravitational constant stored in the file header
        #[arg(long = "G", default_value_t = 1.0)]
        g: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed (σ, τ) into Minkowski space
    Embed {
        input: PathBuf,
        /// Named profile (zero, cos:ε, p2:ε, mix:ε), "file" for the input's τ, or a path
        #[arg(long)]
        tau: Option<String>,
        /// Result record
        #[arg(long)]
        out: Option<PathBuf>,
        /// Node coordinates of the embedding as CSV
        #[arg(long)]
        coords: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the quasi-local mass at one τ
    Mass {
        input: PathBuf,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Colatitude profiles as CSV
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize the mass functional over τ
    Optimize {
        input: PathBuf,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        gtol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optimized τ as a surface file
        #[arg(long)]
        tau_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the radial Jang equation
    Jang {
        /// flat, schwarzschild:m, constant-trace:c, or a radial data file
        data: String,
        #[arg(long, allow_negative_numbers = true)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        /// Boundary value f(r_max)
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau: f64,
        /// regularity or dirichlet:VALUE
        #[arg(long, default_value = "regularity")]
        inner: String,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solution profile as CSV
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Run identity checks
    Verify {
        /// default, extrinsic, embed, energy, variation or jang
        #[arg(long, default_value = "default")]
        suite: String,
        #[arg(long, default_value = "32x64")]
        resolution: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Exit status for a library error.
fn exit_code(e: &QlmError) -> u8 {
    match e {
        QlmError::InvalidInput(_)
        | QlmError::GridMismatch
        | QlmError::SingularMetric(_)
        | QlmError::IncompleteData(_)
        | QlmError::Parse { .. }
        | QlmError::Io(_) => 2,
        QlmError::Precondition(_) | QlmError::Admissibility(_) | QlmError::AdmissibilityBoundary(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen {
            case,
            params,
            resolution,
            profile,
            g,
            out,
        } => commands::gen(&case, &params, &resolution, &profile, g, &out),
        Command::Embed {
            input,
            tau,
            out,
            coords,
            common,
        } => commands::embed(&input, tau.as_deref(), out.as_deref(), coords.as_deref(), &common),
        Command::Mass {
            input,
            tau,
            out,
            profiles,
            common,
        } => commands::mass(&input, tau.as_deref(), out.as_deref(), profiles.as_deref(), &common),
        Command::Optimize {
            input,
            tau,
            gtol,
            max_iter,
            out,
            tau_out,
            common,
        } => commands::optimize(
            &input,
            tau.as_deref(),
            gtol,
            max_iter,
            out.as_deref(),
            tau_out.as_deref(),
            &common,
        ),
        Command::Jang {
            data,
            r_min,
            r_max,
            tau,
            inner,
            points,
            out,
            profile,
        } => commands::jang(&data, r_min, r_max, tau, &inner, points, out.as_deref(), profile.as_deref()),
        Command::Verify {
            suite,
            resolution,
            out,
            seed,
        } => commands::verify(&suite, &resolution, out.as_deref(), seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qlm: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
