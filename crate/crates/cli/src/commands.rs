use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use fredholm_bvp::fredholm::{characteristic_matrix, cokernel_basis};
use fredholm_bvp::limits::run_sequence;
use fredholm_bvp::serde_util::matrix_rows;
use fredholm_bvp::{BvpStatus, CMatrix, ConvergenceReport, ExampleParams, FredholmReport, PreparedProblem};
use serde::Serialize;

use crate::schema::Problem;
use crate::tolerances::Resolved;
use crate::{to_json, CliError, EXIT_INCONSISTENT, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VERIFY_FAIL};

/// Entrywise agreement required by `verify`.
pub const VERIFY_THRESHOLD: f64 = 1e-6;

type Rows = Vec<Vec<[f64; 2]>>;

/// Result of a subcommand: text for the terminal, files to write and the exit code.
#[derive(Debug, Clone)]
pub struct Output<R> {
    pub report: R,
    pub text: String,
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

pub type AnalyzeOutput = Output<AnalyzeReport>;
pub type SolveOutput = Output<SolveReport>;
pub type VerifyOutput = Output<VerifyReport>;
pub type LimitsOutput = Output<LimitsReport>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dimensions {
    pub l: usize,
    pub m: usize,
    pub r: usize,
    pub n: usize,
}

impl Dimensions {
    fn of(problem: &Problem) -> Self {
        let s = &problem.system;
        Self {
            l: problem.boundary.l(),
            m: s.m(),
            r: s.r(),
            n: s.n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub invertible: bool,
    pub solvable_for_every_rhs: bool,
    pub trivial_kernel: bool,
    pub statements: Vec<String>,
}

impl Verdict {
    fn of(report: &FredholmReport) -> Self {
        let mut statements = Vec::new();
        if report.invertible {
            statements.push("the problem is uniquely solvable for every right-hand side".to_string());
        }
        if report.solvable_for_every_rhs() {
            statements.push("solvable for every right-hand side".to_string());
        } else {
            statements.push(format!(
                "solvable only if the right-hand side satisfies {} independent condition(s)",
                report.dim_coker
            ));
        }
        if report.trivial_kernel() {
            statements.push("homogeneous problem has only trivial solution".to_string());
        } else {
            statements.push(format!(
                "homogeneous problem has {} linearly independent solution(s)",
                report.dim_ker
            ));
        }
        Self {
            invertible: report.invertible,
            solvable_for_every_rhs: report.solvable_for_every_rhs(),
            trivial_kernel: report.trivial_kernel(),
            statements,
        }
    }
}

fn report_lines(out: &mut String, dims: &Dimensions, report: &FredholmReport) {
    let _ = writeln!(
        out,
        "dimensions: l = {}, m = {}, r = {}, n = {}",
        dims.l, dims.m, dims.r, dims.n
    );
    let _ = writeln!(out, "index: {}", report.index);
    let _ = writeln!(
        out,
        "fredholm numbers: dim ker = {}, dim coker = {}",
        report.dim_ker, report.dim_coker
    );
    let _ = writeln!(out, "rank: {} (cut-off {:.3e})", report.rank, report.threshold);
    let _ = writeln!(out, "invertible: {}", report.invertible);
}

fn prepare(problem: &Problem, tol: &Resolved) -> Result<PreparedProblem, CliError> {
    Ok(PreparedProblem::new(
        problem.system.clone(),
        problem.boundary.clone(),
        tol.solver_config(),
    )?)
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub dimensions: Dimensions,
    pub tolerances: Resolved,
    pub fredholm: FredholmReport,
    pub verdict: Verdict,
    pub characteristic_matrix: Rows,
    /// Orthonormal basis of the null space of `M`, one column per kernel function.
    pub kernel_coordinates: Rows,
    /// Orthonormal basis of the orthogonal complement of the range of `M`.
    pub cokernel: Rows,
}

pub fn analyze(problem: &Problem, tol: &Resolved) -> Result<AnalyzeOutput, CliError> {
    let prepared = prepare(problem, tol)?;
    let dims = Dimensions::of(problem);
    let fredholm = prepared.report().clone();
    let verdict = Verdict::of(&fredholm);
    let report = AnalyzeReport {
        dimensions: dims,
        tolerances: *tol,
        characteristic_matrix: matrix_rows(prepared.matrix().data()),
        kernel_coordinates: matrix_rows(&prepared.kernel_coordinates()),
        cokernel: matrix_rows(&cokernel_basis(prepared.matrix(), &fredholm)),
        fredholm,
        verdict,
    };
    let mut text = String::new();
    report_lines(&mut text, &dims, &report.fredholm);
    for s in &report.verdict.statements {
        let _ = writeln!(text, "{s}");
    }
    Ok(Output {
        files: vec![("analyze.json".into(), to_json(&report))],
        report,
        text,
        exit_code: EXIT_OK,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub dimensions: Dimensions,
    pub tolerances: Resolved,
    pub status: BvpStatus,
    pub residual: f64,
    pub kernel_dimension: usize,
    /// Cauchy data `(y(a), ..., y^(r-1)(a))` of the exported particular solution.
    pub cauchy_data: Vec<[f64; 2]>,
    pub fredholm: FredholmReport,
}

/// Solves `Ly = f`, `By = c`; trajectories are sampled at `points` equispaced nodes.
pub fn solve(problem: &Problem, tol: &Resolved, points: usize) -> Result<SolveOutput, CliError> {
    let (Some(f), Some(c)) = (&problem.f, &problem.c) else {
        return Err(CliError::Schema("solve needs both f and c in the problem file".into()));
    };
    if points < 2 {
        return Err(CliError::Schema("need at least 2 output points".into()));
    }
    let prepared = prepare(problem, tol)?;
    let sol = prepared.solve(f, c)?;
    let grid = problem.system.interval().grid(points);
    let dims = Dimensions::of(problem);

    let report = SolveReport {
        dimensions: dims,
        tolerances: *tol,
        status: sol.status,
        residual: sol.residual,
        kernel_dimension: sol.kernel_basis.len(),
        cauchy_data: sol.q_particular.iter().map(|z| [z.re, z.im]).collect(),
        fredholm: prepared.report().clone(),
    };

    let mut text = String::new();
    let exit_code = match sol.status {
        BvpStatus::Unique => {
            let _ = writeln!(text, "status: unique solution");
            EXIT_OK
        }
        BvpStatus::Family(d) => {
            let _ = writeln!(text, "status: solution family, kernel dimension {d}");
            EXIT_OK
        }
        BvpStatus::Inconsistent(_) => {
            let _ = writeln!(text, "status: inconsistent, no solution");
            EXIT_INCONSISTENT
        }
    };
    let _ = writeln!(text, "residual: {:.6e}", sol.residual);

    let mut files = vec![("solve.json".to_string(), to_json(&report))];
    if let Some(csv) = sol.particular_csv(&grid)? {
        files.push(("solution.csv".into(), csv));
    }
    if let Some(csv) = sol.kernel_csv(&grid)? {
        files.push(("kernel.csv".into(), csv));
    }
    Ok(Output {
        report,
        text,
        files,
        exit_code,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockGap {
    pub block: usize,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub example: u8,
    pub dimensions: Dimensions,
    pub tolerances: Resolved,
    /// `|M_numeric - M_closed_form|` entrywise, row-major.
    pub entry_abs_diff: Vec<Vec<f64>>,
    pub blocks: Vec<BlockGap>,
    pub max_abs_diff: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn load_example_params(path: &Path) -> Result<ExampleParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))
}

/// Builds model problem `id` numerically and in closed form and compares the two matrices.
pub fn verify(id: u8, params: Option<ExampleParams>, tol: &Resolved) -> Result<VerifyOutput, CliError> {
    let params = match params {
        Some(p) => p,
        None => ExampleParams::default_for(id).map_err(|e| CliError::Schema(e.to_string()))?,
    };
    if params.id() != id {
        return Err(CliError::Schema(format!(
            "parameter file describes example {}, not example {id}",
            params.id()
        )));
    }
    let (m, r, n, l) = params.dimensions().map_err(|e| CliError::Schema(e.to_string()))?;
    let (system, boundary) = params.numeric_problem().map_err(|e| CliError::Schema(e.to_string()))?;
    let cfg = tol.solver_config();
    let numeric = characteristic_matrix(&Arc::new(system), &boundary, &cfg.integrator, cfg.quad_tol)?;
    let oracle = params.oracle_characteristic_matrix()?;
    let diff: CMatrix = numeric.data() - &oracle;

    let entry_abs_diff: Vec<Vec<f64>> = (0..diff.nrows())
        .map(|i| (0..diff.ncols()).map(|j| diff[(i, j)].norm()).collect())
        .collect();
    let blocks: Vec<BlockGap> = (0..r)
        .map(|i| BlockGap {
            block: i + 1,
            max_abs_diff: entry_abs_diff
                .iter()
                .flat_map(|row| row[i * m..(i + 1) * m].iter().copied())
                .fold(0.0, f64::max),
        })
        .collect();
    let max_abs_diff = blocks.iter().map(|b| b.max_abs_diff).fold(0.0, f64::max);
    let pass = max_abs_diff <= VERIFY_THRESHOLD;
    let report = VerifyReport {
        example: id,
        dimensions: Dimensions { l, m, r, n },
        tolerances: *tol,
        entry_abs_diff,
        blocks,
        max_abs_diff,
        threshold: VERIFY_THRESHOLD,
        pass,
    };

    let mut text = String::new();
    let _ = writeln!(text, "example {id}: l = {l}, m = {m}, r = {r}, n = {n}");
    let _ = writeln!(text, "entrywise |numeric - closed form|:");
    for row in &report.entry_abs_diff {
        let cells: Vec<String> = row.iter().map(|d| format!("{d:10.3e}")).collect();
        let _ = writeln!(text, "  {}", cells.join(" "));
    }
    for b in &report.blocks {
        let _ = writeln!(text, "block {}: max abs diff {:.3e}", b.block, b.max_abs_diff);
    }
    let _ = writeln!(
        text,
        "{}: max abs diff {:.3e} (threshold {:.0e})",
        if pass { "PASS" } else { "FAIL" },
        max_abs_diff,
        VERIFY_THRESHOLD
    );
    Ok(Output {
        files: vec![("verify.json".into(), to_json(&report))],
        report,
        text,
        exit_code: if pass { EXIT_OK } else { EXIT_VERIFY_FAIL },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport {
    pub dimensions: Dimensions,
    pub tolerances: Resolved,
    pub norm_order: usize,
    pub norm_exponent: String,
    pub expect_converge: bool,
    pub convergence: ConvergenceReport,
}

pub fn limits(problem: &Problem, tol: &Resolved) -> Result<LimitsOutput, CliError> {
    let Some((seq, expect_converge)) = &problem.perturbation else {
        return Err(CliError::Schema(
            "limits needs a perturbation block in the problem file".into(),
        ));
    };
    let convergence = run_sequence(seq, &problem.norm, &tol.solver_config(), tol.convergence)?;
    let report = LimitsReport {
        dimensions: Dimensions::of(problem),
        tolerances: *tol,
        norm_order: problem.norm.n,
        norm_exponent: if problem.norm.p.is_infinite() {
            "inf".into()
        } else {
            problem.norm.p.to_string()
        },
        expect_converge: *expect_converge,
        convergence,
    };
    let c = &report.convergence;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "base: rank {}, dim ker {}, dim coker {}, index {}",
        c.base.rank, c.base.dim_ker, c.base.dim_coker, c.base.index
    );
    let _ = writeln!(
        text,
        "{:>8} {:>12} {:>5} {:>8} {:>10}",
        "k", "|M_k - M|", "rank", "dim ker", "dim coker"
    );
    for row in &c.rows {
        let _ = writeln!(
            text,
            "{:>8} {:>12.4e} {:>5} {:>8} {:>10}",
            row.k, row.char_matrix_gap, row.rank, row.dim_ker, row.dim_coker
        );
    }
    let _ = writeln!(text, "matrices converge: {}", c.matrices_converge);
    let _ = writeln!(text, "semicontinuity holds: {}", c.semicontinuity_holds);
    match c.fitted_rate {
        Some(rate) => {
            let _ = writeln!(text, "fitted rate: {rate:.4}");
        }
        None => {
            let _ = writeln!(text, "fitted rate: n/a");
        }
    }
    let failed = *expect_converge && !c.matrices_converge;
    if failed {
        let _ = writeln!(text, "expected convergence was not observed");
    }
    Ok(Output {
        files: vec![
            ("limits.json".into(), to_json(&report)),
            ("limits.csv".into(), report.convergence.to_csv()),
        ],
        report,
        text,
        exit_code: if failed { EXIT_NOT_CONVERGED } else { EXIT_OK },
    })
}
