//! Characteristic matrix `M(L,B) = ([B Y_1], ..., [B Y_r])`, its numerical rank and the derived
//! index and Fredholm numbers.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryOperator;
use crate::linalg::{full_left_basis, full_right_basis, normalize_phase, SortedSvd};
use crate::ode_core::{fundamental_solutions, DifferentialSystem, FundamentalSet, IntegratorConfig, SystemTrajectory};
use crate::serde_util::cmatrix;
use crate::{CMatrix, CVector, Error, Result};

/// Default relative rank tolerance `tau`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Settings under which a characteristic matrix was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub m: usize,
    pub r: usize,
    pub l: usize,
    pub rtol: f64,
    pub atol: f64,
    pub quad_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicMatrix {
    #[serde(with = "cmatrix")]
    data: CMatrix,
    provenance: Provenance,
    /// Magnitude of the assembled terms before cancellation.
    assembly_scale: f64,
}

impl CharacteristicMatrix {
    /// Wraps an explicitly given `l x rm` matrix (no assembly noise).
    pub fn from_matrix(data: CMatrix, m: usize, r: usize) -> Result<Self> {
        if data.ncols() != r * m {
            return Err(Error::shape("characteristic matrix columns", r * m, data.ncols()));
        }
        if data.nrows() == 0 {
            return Err(Error::invalid("characteristic matrix needs l >= 1 rows"));
        }
        Ok(Self {
            provenance: Provenance {
                m,
                r,
                l: data.nrows(),
                rtol: 0.0,
                atol: 0.0,
                quad_tol: 0.0,
            },
            data,
            assembly_scale: 0.0,
        })
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn assembly_scale(&self) -> f64 {
        self.assembly_scale
    }

    pub fn l(&self) -> usize {
        self.provenance.l
    }

    pub fn m(&self) -> usize {
        self.provenance.m
    }

    pub fn r(&self) -> usize {
        self.provenance.r
    }

    pub fn rm(&self) -> usize {
        self.provenance.r * self.provenance.m
    }

    /// `[B Y_i]`, `1 <= i <= r`.
    pub fn block(&self, i: usize) -> CMatrix {
        let m = self.m();
        self.data.columns((i - 1) * m, m).into_owned()
    }

    pub fn blocks(&self) -> Vec<CMatrix> {
        (1..=self.r()).map(|i| self.block(i)).collect()
    }
}

/// Assembles `M(L,B)` from an existing set of fundamental solutions; blocks in parallel.
pub fn characteristic_matrix_from(
    fundamentals: &FundamentalSet,
    boundary: &BoundaryOperator,
    integrator: &IntegratorConfig,
    quad_tol: f64,
) -> Result<CharacteristicMatrix> {
    let system = fundamentals.system();
    boundary.check_compatible(system)?;
    let iv = system.interval();
    let blocks: Vec<(CMatrix, f64)> = fundamentals
        .solutions()
        .par_iter()
        .map(|sol| boundary.apply_with_scale(&sol.trajectory, iv, quad_tol))
        .collect::<Result<_>>()?;
    let (l, m, r) = (boundary.l(), system.m(), system.r());
    let mut data = CMatrix::zeros(l, r * m);
    let mut scale = 0.0;
    for (i, (blk, s)) in blocks.iter().enumerate() {
        data.view_mut((0, i * m), (l, m)).copy_from(blk);
        scale += s;
    }
    Ok(CharacteristicMatrix {
        data,
        provenance: Provenance {
            m,
            r,
            l,
            rtol: integrator.rtol,
            atol: integrator.atol,
            quad_tol,
        },
        assembly_scale: scale,
    })
}

/// Integrates the fundamental solutions and assembles `M(L,B)`.
pub fn characteristic_matrix(
    system: &Arc<DifferentialSystem>,
    boundary: &BoundaryOperator,
    integrator: &IntegratorConfig,
    quad_tol: f64,
) -> Result<CharacteristicMatrix> {
    boundary.check_compatible(system)?;
    let fset = fundamental_solutions(system, integrator)?;
    characteristic_matrix_from(&fset, boundary, integrator, quad_tol)
}

/// Index, Fredholm numbers and spectrum of a characteristic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmReport {
    pub index: i64,
    pub rank: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rank_tol: f64,
    pub invertible: bool,
    /// Absolute cut-off actually applied to the singular values.
    #[serde(skip)]
    pub threshold: f64,
    #[serde(skip)]
    pub l: usize,
    #[serde(skip)]
    pub rm: usize,
}

impl FredholmReport {
    /// Counts `sigma_i > tau * max(sigma_max, scale) * max(l, rm)`. `scale` is the assembly scale
    /// of the matrix, which keeps matrices that vanish by cancellation at rank 0.
    pub fn from_singular_values(singular_values: Vec<f64>, l: usize, rm: usize, rank_tol: f64, scale: f64) -> Self {
        let sigma_max = singular_values.first().copied().unwrap_or(0.0);
        let threshold = rank_tol * sigma_max.max(scale) * l.max(rm) as f64;
        let rank = singular_values.iter().filter(|&&s| s > threshold).count();
        Self {
            index: rm as i64 - l as i64,
            rank,
            dim_ker: rm - rank,
            dim_coker: l - rank,
            singular_values,
            rank_tol,
            invertible: l == rm && rank == rm,
            threshold,
            l,
            rm,
        }
    }

    /// Smallest kept singular value `sigma_rank`, if the rank is positive.
    pub fn smallest_kept(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|i| self.singular_values[i])
    }

    /// "solvable for every right-hand side" iff the cokernel is trivial.
    pub fn solvable_for_every_rhs(&self) -> bool {
        self.dim_coker == 0
    }

    /// "homogeneous problem has only the trivial solution" iff the kernel is trivial.
    pub fn trivial_kernel(&self) -> bool {
        self.dim_ker == 0
    }
}

pub fn fredholm_report(m: &CharacteristicMatrix) -> FredholmReport {
    fredholm_report_with_tol(m, DEFAULT_RANK_TOL)
}

pub fn fredholm_report_with_tol(m: &CharacteristicMatrix, rank_tol: f64) -> FredholmReport {
    let svd = SortedSvd::new(&m.data);
    FredholmReport::from_singular_values(svd.singular_values, m.l(), m.rm(), rank_tol, m.assembly_scale)
}

/// Orthonormal basis (`rm x dim_ker`) of the numerical null space, phase-normalized.
pub fn null_space(m: &CharacteristicMatrix, report: &FredholmReport) -> CMatrix {
    trailing_columns(&full_right_basis(&m.data), report.dim_ker)
}

/// Orthonormal basis (`l x dim_coker`) of the complement of the range, phase-normalized.
pub fn cokernel_basis(m: &CharacteristicMatrix, report: &FredholmReport) -> CMatrix {
    trailing_columns(&full_left_basis(&m.data), report.dim_coker)
}

fn trailing_columns(basis: &CMatrix, count: usize) -> CMatrix {
    let n = basis.ncols();
    let mut out = basis.columns(n - count, count).into_owned();
    for j in 0..count {
        let mut v: CVector = out.column(j).into_owned();
        normalize_phase(&mut v);
        out.set_column(j, &v);
    }
    out
}

/// `y_s = sum_i Y_i q_i^(s)` for an orthonormal null-space basis `{q^(s)}` of `M`.
pub fn kernel_basis_functions(
    fundamentals: &FundamentalSet,
    m: &CharacteristicMatrix,
    report: &FredholmReport,
) -> Result<Vec<SystemTrajectory>> {
    let basis = null_space(m, report);
    (0..basis.ncols())
        .map(|s| fundamentals.all().combine(&basis.columns(s, 1).into_owned()))
        .collect()
}
