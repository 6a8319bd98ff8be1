use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fredholm_bvp_cli::commands::{load_example_params, Output};
use fredholm_bvp_cli::schema::FileTolerances;
use fredholm_bvp_cli::{analyze, limits, load_problem, solve, verify, CliError, Overrides, Profile, Resolved};

/// Fredholm analysis and solution of linear boundary-value problems for ODE systems.
#[derive(Debug, Parser)]
#[command(name = "fredholm-bvp", version)]
struct Cli {
    #[command(flatten)]
    tolerances: ToleranceFlags,

    /// Directory for JSON reports and CSV exports
    #[arg(short, long, global = true, default_value = ".")]
    output: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ToleranceFlags {
    /// Absolute integrator tolerance (relative tolerance is 100x)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Quadrature tolerance for Caputo and integral boundary terms
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Relative singular-value cut-off for the numerical rank
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Relative residual below which B y = c counts as consistent
    #[arg(long, global = true)]
    consistency_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Characteristic matrix, index, Fredholm numbers and solvability verdict
    Analyze { file: PathBuf },
    /// Solve L y = f, B y = c and export trajectories as CSV
    Solve {
        file: PathBuf,
        /// Number of equispaced output nodes
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Compare numeric and closed-form characteristic matrices of model problem 1..5
    Verify {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        example: u8,
        /// Parameter file; built-in defaults when omitted
        file: Option<PathBuf>,
    },
    /// Run the perturbation sequence of a problem file
    Limits { file: PathBuf },
}

fn emit<R>(out: Output<R>, dir: &Path) -> Result<i32, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Schema(format!("{}: {e}", dir.display())))?;
    for (name, contents) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    }
    print!("{}", out.text);
    for (name, _) in &out.files {
        println!("wrote {}", dir.join(name).display());
    }
    Ok(out.exit_code)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let profile = Profile::from_env()?;
    let flags = Overrides {
        tol: cli.tolerances.tol,
        quad_tol: cli.tolerances.quad_tol,
        rank_tol: cli.tolerances.rank_tol,
        consistency_tol: cli.tolerances.consistency_tol,
    };
    let dir = cli.output.as_path();
    match cli.command {
        Command::Analyze { file } => {
            let (pf, problem) = load_problem(&file)?;
            let tol = Resolved::resolve(profile, &pf.tolerances, &flags)?;
            emit(analyze(&problem, &tol)?, dir)
        }
        Command::Solve { file, points } => {
            let (pf, problem) = load_problem(&file)?;
            let tol = Resolved::resolve(profile, &pf.tolerances, &flags)?;
            let out = solve(&problem, &tol, points)?;
            emit(out, dir)
        }
        Command::Verify { example, file } => {
            let params = file.as_deref().map(load_example_params).transpose()?;
            let tol = Resolved::resolve(profile, &FileTolerances::default(), &flags)?;
            emit(verify(example, params, &tol)?, dir)
        }
        Command::Limits { file } => {
            let (pf, problem) = load_problem(&file)?;
            let tol = Resolved::resolve(profile, &pf.tolerances, &flags)?;
            emit(limits(&problem, &tol)?, dir)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
