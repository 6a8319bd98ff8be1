//! Inhomogeneous boundary-value problems `Ly = f`, `By = c`: classification and all solutions.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryOperator, DEFAULT_QUAD_TOL};
use crate::fredholm::{
    characteristic_matrix_from, fredholm_report_with_tol, kernel_basis_functions, null_space, CharacteristicMatrix,
    FredholmReport, DEFAULT_RANK_TOL,
};
use crate::linalg::SortedSvd;
use crate::ode_core::{
    fundamental_solutions, solve_inhomogeneous_cauchy, CoefficientFunction, Differentiable, DifferentialSystem,
    FundamentalSet, IntegratorConfig, SystemTrajectory,
};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Default relative threshold on the least-squares residual for declaring `By = c` consistent.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub integrator: IntegratorConfig,
    pub quad_tol: f64,
    pub rank_tol: f64,
    pub consistency_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            quad_tol: DEFAULT_QUAD_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            consistency_tol: DEFAULT_CONSISTENCY_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BvpStatus {
    Unique,
    /// Solutions exist; the solution set is a particular solution plus a kernel of this dimension.
    Family(usize),
    /// No solution; carries the least-squares residual `|M q - (c - B y_p)|`.
    Inconsistent(f64),
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub status: BvpStatus,
    /// `y_p + sum_i Y_i q_i`, absent when inconsistent.
    pub particular: Option<SystemTrajectory>,
    pub kernel_basis: Vec<SystemTrajectory>,
    /// Cauchy data `col(y(a), ..., y^(r-1)(a))` of the particular solution.
    pub q_particular: CVector,
    pub residual: f64,
}

/// A system and boundary operator with their fundamental solutions, characteristic matrix and
/// report computed once; immutable and reusable for many `(f, c)`.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    system: Arc<DifferentialSystem>,
    boundary: BoundaryOperator,
    config: SolverConfig,
    fundamentals: FundamentalSet,
    matrix: CharacteristicMatrix,
    report: FredholmReport,
    svd: SortedSvd,
}

impl PreparedProblem {
    pub fn new(system: Arc<DifferentialSystem>, boundary: BoundaryOperator, config: SolverConfig) -> Result<Self> {
        boundary.check_compatible(&system)?;
        let fundamentals = fundamental_solutions(&system, &config.integrator)?;
        let matrix = characteristic_matrix_from(&fundamentals, &boundary, &config.integrator, config.quad_tol)?;
        let report = fredholm_report_with_tol(&matrix, config.rank_tol);
        let svd = SortedSvd::new(matrix.data());
        Ok(Self {
            system,
            boundary,
            config,
            fundamentals,
            matrix,
            report,
            svd,
        })
    }

    pub fn system(&self) -> &Arc<DifferentialSystem> {
        &self.system
    }
    pub fn boundary(&self) -> &BoundaryOperator {
        &self.boundary
    }
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }
    pub fn fundamentals(&self) -> &FundamentalSet {
        &self.fundamentals
    }
    pub fn matrix(&self) -> &CharacteristicMatrix {
        &self.matrix
    }
    pub fn report(&self) -> &FredholmReport {
        &self.report
    }

    /// Orthonormal null-space basis of `M` (`rm x dim_ker`).
    pub fn kernel_coordinates(&self) -> CMatrix {
        null_space(&self.matrix, &self.report)
    }

    pub fn kernel_basis(&self) -> Result<Vec<SystemTrajectory>> {
        kernel_basis_functions(&self.fundamentals, &self.matrix, &self.report)
    }

    pub fn solve(&self, f: &CoefficientFunction, c: &CVector) -> Result<BvpSolution> {
        let l = self.boundary.l();
        if c.len() != l {
            return Err(Error::shape("right-hand side c", l, c.len()));
        }
        let rm = self.system.rm();
        let yp = solve_inhomogeneous_cauchy(&self.system, f, &CVector::zeros(rm), &self.config.integrator)?;
        let byp = self
            .boundary
            .apply_to_function(&yp, self.system.interval(), self.config.quad_tol)?;
        let rhs = c - byp;
        let q = self.svd.solve_min_norm(&rhs, self.report.rank);
        let residual = (self.matrix.data() * &q - &rhs).norm();

        if residual > self.config.consistency_tol * (1.0 + c.norm()) {
            return Ok(BvpSolution {
                status: BvpStatus::Inconsistent(residual),
                particular: None,
                kernel_basis: Vec::new(),
                q_particular: q,
                residual,
            });
        }
        let particular = yp.add(&self.fundamentals.all().combine(&CMatrix::from_column_slice(
            rm,
            1,
            q.as_slice(),
        ))?)?;
        let status = if self.report.invertible {
            BvpStatus::Unique
        } else {
            BvpStatus::Family(self.report.dim_ker)
        };
        Ok(BvpSolution {
            status,
            particular: Some(particular),
            kernel_basis: self.kernel_basis()?,
            q_particular: q,
            residual,
        })
    }
}

/// One-shot solve of `Ly = f`, `By = c`.
pub fn solve_bvp(
    system: Arc<DifferentialSystem>,
    boundary: BoundaryOperator,
    f: &CoefficientFunction,
    c: &CVector,
    config: SolverConfig,
) -> Result<BvpSolution> {
    PreparedProblem::new(system, boundary, config)?.solve(f, c)
}

/// CSV with header `t,re_y1,im_y1,...`; `t` first, one row per grid point.
pub fn trajectory_csv(y: &dyn Differentiable, grid: &[f64]) -> Result<String> {
    let (rows, cols) = y.shape();
    let mut out = String::from("t");
    for j in 0..cols {
        for i in 0..rows {
            let name = if cols == 1 {
                format!("y{}", i + 1)
            } else {
                format!("y{}_{}", i + 1, j + 1)
            };
            let _ = write!(out, ",re_{name},im_{name}");
        }
    }
    out.push('\n');
    for &t in grid {
        let v = y.value(t)?;
        let _ = write!(out, "{t:e}");
        for j in 0..cols {
            for i in 0..rows {
                let z: C64 = v[(i, j)];
                let _ = write!(out, ",{:e},{:e}", z.re, z.im);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

impl BvpSolution {
    /// The particular solution sampled on `grid`, if one exists.
    pub fn particular_csv(&self, grid: &[f64]) -> Result<Option<String>> {
        self.particular.as_ref().map(|y| trajectory_csv(y, grid)).transpose()
    }

    /// All kernel basis functions side by side (`y{i}_{s}` is component `i` of basis function `s`).
    pub fn kernel_csv(&self, grid: &[f64]) -> Result<Option<String>> {
        let Some(first) = self.kernel_basis.first() else {
            return Ok(None);
        };
        let mut all = first.clone();
        for k in &self.kernel_basis[1..] {
            all = concat_columns(&all, k)?;
        }
        trajectory_csv(&all, grid).map(Some)
    }
}

fn concat_columns(x: &SystemTrajectory, y: &SystemTrajectory) -> Result<SystemTrajectory> {
    let (cx, cy) = (x.cols(), y.cols());
    let mut left = CMatrix::zeros(cx, cx + cy);
    let mut right = CMatrix::zeros(cy, cx + cy);
    for j in 0..cx {
        left[(j, j)] = C64::new(1.0, 0.0);
    }
    for j in 0..cy {
        right[(j, cx + j)] = C64::new(1.0, 0.0);
    }
    x.combine(&left)?.add(&y.combine(&right)?)
}
