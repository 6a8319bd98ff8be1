//! Sobolev norms and perturbation-sequence experiments: convergence of characteristic matrices
//! and semicontinuity of the Fredholm numbers.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryOperator, BoundaryTerm};
use crate::fredholm::{
    characteristic_matrix_from, cokernel_basis, fredholm_report_with_tol, null_space, FredholmReport,
};
use crate::linalg::frobenius;
use crate::ode_core::{
    fundamental_solutions, CoefficientFunction, Difference, Differentiable, DifferentialSystem, FundamentalSet,
    Interval,
};
use crate::quadrature::gl16;
use crate::solver::SolverConfig;
use crate::{CMatrix, Error, Result};

/// Final characteristic-matrix gap below which a sequence counts as converged.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;

/// `|y|_{n,p} = sum_{k<=n} |y^(k)|_p` with the pointwise Frobenius norm.
///
/// Finite `p` uses composite 16-point Gauss–Legendre on `panels` equal panels. `p = inf` takes
/// the maximum over `16 * panels + 1` equally spaced points, a lower bound of the true supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    pub n: usize,
    pub p: f64,
    pub panels: usize,
}

impl SobolevNorm {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("Sobolev exponent must satisfy p >= 1, got {p}")));
        }
        Ok(Self { n, p, panels: 32 })
    }

    pub fn with_order(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

pub fn sobolev_norm(y: &dyn Differentiable, norm: &SobolevNorm, interval: Interval) -> Result<f64> {
    y.check_order(norm.n)?;
    let mut parts = vec![0.0f64; norm.n + 1];
    let panels = norm.panels.max(1);
    let h = interval.length() / panels as f64;
    if norm.p.is_infinite() {
        for t in interval.grid(16 * panels + 1) {
            for (acc, d) in parts.iter_mut().zip(y.derivatives_upto(t, norm.n)?) {
                *acc = acc.max(frobenius(&d));
            }
        }
        return Ok(parts.iter().sum());
    }
    let rule = gl16();
    for i in 0..panels {
        let lo = interval.a + i as f64 * h;
        let hi = if i + 1 == panels { interval.b } else { lo + h };
        for (t, w) in rule.mapped(lo, hi) {
            for (acc, d) in parts.iter_mut().zip(y.derivatives_upto(t, norm.n)?) {
                *acc += w * frobenius(&d).powf(norm.p);
            }
        }
    }
    Ok(parts.iter().map(|s| s.powf(1.0 / norm.p)).sum())
}

/// Family `k -> (A_j + k^-rate dA_j, B + k^-rate dB)` evaluated at `k_values`.
#[derive(Debug, Clone)]
pub struct PerturbationSequence {
    pub system: Arc<DifferentialSystem>,
    pub boundary: BoundaryOperator,
    pub coefficient_deltas: Option<Vec<CoefficientFunction>>,
    pub boundary_delta: Option<BoundaryOperator>,
    pub rate: f64,
    pub k_values: Vec<u64>,
}

impl PerturbationSequence {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(Error::invalid("k_values must be a non-empty list of positive integers"));
        }
        if !self.rate.is_finite() {
            return Err(Error::invalid("perturbation rate must be finite"));
        }
        self.boundary.check_compatible(&self.system)?;
        if let Some(d) = &self.coefficient_deltas {
            if d.len() != self.system.r() {
                return Err(Error::shape("coefficient deltas", self.system.r(), d.len()));
            }
        }
        Ok(())
    }

    pub fn weight(&self, k: u64) -> f64 {
        (k as f64).powf(-self.rate)
    }

    /// Member `k`; shares `(m, r, n, l, interval)` with the base problem.
    pub fn member(&self, k: u64) -> Result<(Arc<DifferentialSystem>, BoundaryOperator)> {
        let w = self.weight(k);
        let system = match &self.coefficient_deltas {
            Some(deltas) => Arc::new(
                self.system.with_coefficients(
                    self.system
                        .coefficients()
                        .iter()
                        .zip(deltas)
                        .map(|(a, d)| a.plus_scaled(w, d))
                        .collect(),
                )?,
            ),
            None => self.system.clone(),
        };
        let boundary = match &self.boundary_delta {
            Some(d) => self.boundary.plus_scaled(w, d)?,
            None => self.boundary.clone(),
        };
        boundary.check_compatible(&system)?;
        Ok((system, boundary))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: u64,
    /// `|A_j(k) - A_j|_{n,p}` for `j = 0..r`.
    pub coeff_norm_gaps: Vec<f64>,
    /// `|Y_i(k) - Y_i|_{n+r,p}` for `i = 1..=r`.
    pub fundsol_gaps: Vec<f64>,
    /// `|M_k - M|_F`.
    pub char_matrix_gap: f64,
    pub rank: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub base: FredholmReport,
    pub rows: Vec<ConvergenceRow>,
    /// Gaps non-increasing in row order and the last one below `convergence_tol`.
    pub matrices_converge: bool,
    /// `rank_k >= rank` for every row from the first one with gap below `semicontinuity_threshold`.
    pub semicontinuity_holds: bool,
    /// Half the smallest kept singular value of the base matrix; absent when its rank is 0.
    pub semicontinuity_threshold: Option<f64>,
    /// Whether any row reached the threshold (otherwise semicontinuity holds vacuously).
    pub threshold_reached: bool,
    /// Least-squares slope of `log gap` against `log k`; needs 4 rows with positive gap.
    pub fitted_rate: Option<f64>,
    pub convergence_tol: f64,
}

impl ConvergenceReport {
    /// Derives all verdicts from the rows alone.
    pub fn from_rows(base: FredholmReport, rows: Vec<ConvergenceRow>, convergence_tol: f64) -> Self {
        let gaps: Vec<f64> = rows.iter().map(|r| r.char_matrix_gap).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        let matrices_converge = monotone && gaps.last().is_some_and(|&g| g < convergence_tol);

        let threshold = base.smallest_kept().map(|s| s / 2.0);
        let start = match threshold {
            Some(th) => gaps.iter().position(|&g| g < th),
            None => (!rows.is_empty()).then_some(0),
        };
        let semicontinuity_holds = match start {
            Some(i) => rows[i..].iter().all(|r| r.rank >= base.rank),
            None => true,
        };

        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.char_matrix_gap > 0.0)
            .map(|r| ((r.k as f64).ln(), r.char_matrix_gap.ln()))
            .collect();
        let fitted_rate = (pts.len() >= 4).then(|| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });

        Self {
            base,
            rows,
            matrices_converge,
            semicontinuity_holds,
            semicontinuity_threshold: threshold,
            threshold_reached: start.is_some(),
            fitted_rate,
            convergence_tol,
        }
    }

    /// One row per `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,char_matrix_gap,rank,dim_ker,dim_coker,index");
        if let Some(r) = self.rows.first() {
            for j in 0..r.coeff_norm_gaps.len() {
                let _ = write!(out, ",coeff_gap_A{j}");
            }
            for i in 0..r.fundsol_gaps.len() {
                let _ = write!(out, ",fundsol_gap_Y{}", i + 1);
            }
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{:e},{},{},{},{}",
                r.k, r.char_matrix_gap, r.rank, r.dim_ker, r.dim_coker, r.index
            );
            for g in r.coeff_norm_gaps.iter().chain(&r.fundsol_gaps) {
                let _ = write!(out, ",{g:e}");
            }
            out.push('\n');
        }
        out
    }
}

fn member_row(
    seq: &PerturbationSequence,
    base_fset: &FundamentalSet,
    base_m: &CMatrix,
    norm: &SobolevNorm,
    config: &SolverConfig,
    k: u64,
) -> Result<ConvergenceRow> {
    let (system, boundary) = seq.member(k)?;
    let iv = system.interval();
    let fset = fundamental_solutions(&system, &config.integrator)?;
    let m = characteristic_matrix_from(&fset, &boundary, &config.integrator, config.quad_tol)?;
    let report = fredholm_report_with_tol(&m, config.rank_tol);

    let coeff_norm_gaps = system
        .coefficients()
        .iter()
        .zip(seq.system.coefficients())
        .map(|(ak, a)| sobolev_norm(&Difference { lhs: ak, rhs: a }, norm, iv))
        .collect::<Result<Vec<_>>>()?;
    let sol_norm = norm.with_order(system.max_solution_order());
    let fundsol_gaps = fset
        .solutions()
        .iter()
        .zip(base_fset.solutions())
        .map(|(yk, y)| {
            sobolev_norm(
                &Difference {
                    lhs: &yk.trajectory,
                    rhs: &y.trajectory,
                },
                &sol_norm,
                iv,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceRow {
        k,
        coeff_norm_gaps,
        fundsol_gaps,
        char_matrix_gap: frobenius(&(m.data() - base_m)),
        rank: report.rank,
        dim_ker: report.dim_ker,
        dim_coker: report.dim_coker,
        index: report.index,
    })
}

/// Computes every member of the sequence (in parallel) and the verdicts.
pub fn run_sequence(
    seq: &PerturbationSequence,
    norm: &SobolevNorm,
    config: &SolverConfig,
    convergence_tol: f64,
) -> Result<ConvergenceReport> {
    seq.validate()?;
    let base_fset = fundamental_solutions(&seq.system, &config.integrator)?;
    let base_m = characteristic_matrix_from(&base_fset, &seq.boundary, &config.integrator, config.quad_tol)?;
    let base = fredholm_report_with_tol(&base_m, config.rank_tol);
    let rows = seq
        .k_values
        .par_iter()
        .map(|&k| member_row(seq, &base_fset, base_m.data(), norm, config, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_rows(base, rows, convergence_tol))
}

#[derive(Debug, Clone)]
pub struct InstabilityDemo {
    pub before: FredholmReport,
    pub after: FredholmReport,
    /// `dB` with `[dB Y_i] = eps u v_i^H`.
    pub perturbation: BoundaryOperator,
    /// `|M(L, B + dB) - M(L, B)|_2`.
    pub perturbation_norm: f64,
}

/// Adds a rank-one boundary term of norm `epsilon` that couples a cokernel direction `u` of `M`
/// with a kernel direction `v`, raising the rank by one while the index stays `rm - l`.
///
/// The perturbation is `sum_j eps u v_j^H y^(j)(a)`, `v_j` the `j`-th block of `v`.
pub fn finite_rank_instability_demo(
    system: &Arc<DifferentialSystem>,
    boundary: &BoundaryOperator,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<InstabilityDemo> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let fset = fundamental_solutions(system, &config.integrator)?;
    let m = characteristic_matrix_from(&fset, boundary, &config.integrator, config.quad_tol)?;
    let before = fredholm_report_with_tol(&m, config.rank_tol);
    let (l, rm) = (m.l(), m.rm());
    if before.rank == l.min(rm) {
        return Err(Error::NotApplicable(format!(
            "characteristic matrix already has full rank {} = min(l, rm)",
            before.rank
        )));
    }
    let u = cokernel_basis(&m, &before).column(0).into_owned();
    let v = null_space(&m, &before).column(0).into_owned();
    let (mm, r, n) = boundary.signature();
    let a = system.interval().a;
    let terms = (0..r)
        .map(|j| {
            let vj = v.rows(j * mm, mm);
            BoundaryTerm::Point {
                point: a,
                order: j as f64,
                alpha: &u * vj.adjoint() * crate::C64::new(epsilon, 0.0),
            }
        })
        .collect();
    let perturbation = BoundaryOperator::new(l, mm, r, n, terms)?;
    let perturbed = boundary.plus_scaled(1.0, &perturbation)?;
    let m_after = characteristic_matrix_from(&fset, &perturbed, &config.integrator, config.quad_tol)?;
    let after = fredholm_report_with_tol(&m_after, config.rank_tol);
    let delta = m_after.data() - m.data();
    let perturbation_norm = crate::linalg::SortedSvd::new(&delta).max_singular_value();
    Ok(InstabilityDemo {
        before,
        after,
        perturbation,
        perturbation_norm,
    })
}
