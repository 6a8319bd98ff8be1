use std::sync::Arc;

use super::integrator::integrate;
use super::{
    build_companion, solve_matrix_cauchy, CoefficientFunction, DenseOutput, Differentiable, DifferentialSystem,
    IntegratorConfig,
};
use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Debug, Clone)]
struct Part {
    dense: Arc<DenseOutput>,
    /// Right factor applied to the dense state, `(dense cols) x (trajectory cols)`.
    weight: CMatrix,
    /// Forcing of the underlying dense solve; the part's own forcing is `f * weight`.
    forcing: Option<Arc<CoefficientFunction>>,
}

/// `f(t) * weight` as a differentiable function.
struct WeightedForcing<'a> {
    f: &'a CoefficientFunction,
    weight: &'a CMatrix,
}

impl Differentiable for WeightedForcing<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.f.shape().0, self.weight.ncols())
    }
    fn max_order(&self) -> Option<usize> {
        self.f.max_order()
    }
    fn derivative(&self, t: f64, order: usize) -> Result<CMatrix> {
        Ok(self.f.derivative(t, order)? * self.weight)
    }
}

/// A linear combination of companion-form dense solutions of one differential system.
///
/// Values are `m x cols`; derivatives below `r` are read from the companion state, higher
/// ones come from differentiating the equation.
#[derive(Debug, Clone)]
pub struct SystemTrajectory {
    system: Arc<DifferentialSystem>,
    parts: Vec<Part>,
    cols: usize,
}

impl SystemTrajectory {
    fn from_dense(
        system: Arc<DifferentialSystem>,
        dense: DenseOutput,
        forcing: Option<Arc<CoefficientFunction>>,
    ) -> Self {
        let cols = dense.shape().1;
        Self {
            system,
            parts: vec![Part {
                dense: Arc::new(dense),
                weight: CMatrix::identity(cols, cols),
                forcing,
            }],
            cols,
        }
    }

    /// Identically zero trajectory with `cols` columns.
    pub fn zero(system: Arc<DifferentialSystem>, cols: usize) -> Self {
        Self {
            system,
            parts: Vec::new(),
            cols,
        }
    }

    pub fn system(&self) -> &Arc<DifferentialSystem> {
        &self.system
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Companion state `col(y, y', ..., y^(r-1))(t)`, `rm x cols`.
    pub fn state(&self, t: f64) -> Result<CMatrix> {
        let t = self.system.interval().clamp_checked(t)?;
        let mut acc = CMatrix::zeros(self.system.rm(), self.cols);
        for p in &self.parts {
            acc += p.dense.eval(t)? * &p.weight;
        }
        Ok(acc)
    }

    /// Time derivative of the dense interpolant of the companion state.
    pub fn state_rate(&self, t: f64) -> Result<CMatrix> {
        let t = self.system.interval().clamp_checked(t)?;
        let mut acc = CMatrix::zeros(self.system.rm(), self.cols);
        for p in &self.parts {
            acc += p.dense.eval_derivative(t)? * &p.weight;
        }
        Ok(acc)
    }

    /// All derivatives `y, ..., y^(upto)` at `t`.
    pub fn derivatives(&self, t: f64, upto: usize) -> Result<Vec<CMatrix>> {
        let sys = &self.system;
        let limit = sys.max_solution_order();
        if upto > limit {
            return Err(Error::OrderUnavailable {
                requested: upto,
                available: limit,
            });
        }
        let t = sys.interval().clamp_checked(t)?;
        let (m, r) = (sys.m(), sys.r());
        let mut total: Vec<CMatrix> = vec![CMatrix::zeros(m, self.cols); upto + 1];
        for p in &self.parts {
            let x = p.dense.eval(t)? * &p.weight;
            let mut derivs: Vec<CMatrix> = (0..r)
                .map(|j| x.view((j * m, 0), (m, self.cols)).into_owned())
                .collect();
            if upto >= r {
                match &p.forcing {
                    Some(f) => {
                        let wf = WeightedForcing { f, weight: &p.weight };
                        sys.extend_derivatives(t, &mut derivs, upto, Some(&wf))?;
                    }
                    None => sys.extend_derivatives(t, &mut derivs, upto, None)?,
                }
            }
            for (acc, d) in total.iter_mut().zip(derivs) {
                *acc += d;
            }
        }
        Ok(total)
    }

    /// Forcing `f(t)` carried by this trajectory, `m x cols`.
    pub fn forcing(&self, t: f64) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.system.m(), self.cols);
        for p in &self.parts {
            if let Some(f) = &p.forcing {
                acc += f.value(t)? * &p.weight;
            }
        }
        Ok(acc)
    }

    /// `y^(r) + sum_k A_k y^(k) - f` with `y^(r)` taken from the interpolant, not the equation.
    pub fn ode_residual(&self, t: f64) -> Result<CMatrix> {
        let (m, r) = (self.system.m(), self.system.r());
        let x = self.state(t)?;
        let rate = self.state_rate(t)?;
        let lower: Vec<CMatrix> = (0..r)
            .map(|j| x.view((j * m, 0), (m, self.cols)).into_owned())
            .collect();
        let top = rate.view(((r - 1) * m, 0), (m, self.cols)).into_owned();
        Ok(top + self.system.apply_coefficients(t, &lower)? - self.forcing(t)?)
    }

    /// `self * weights`, i.e. column combinations.
    pub fn combine(&self, weights: &CMatrix) -> Result<Self> {
        if weights.nrows() != self.cols {
            return Err(Error::shape(
                "trajectory combination weights",
                self.cols,
                weights.nrows(),
            ));
        }
        Ok(Self {
            system: self.system.clone(),
            parts: self
                .parts
                .iter()
                .map(|p| Part {
                    dense: p.dense.clone(),
                    weight: &p.weight * weights,
                    forcing: p.forcing.clone(),
                })
                .collect(),
            cols: weights.ncols(),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for p in &mut out.parts {
            p.weight *= s;
        }
        out
    }

    /// Columns `start..start+count`.
    pub fn columns(&self, start: usize, count: usize) -> Result<Self> {
        if start + count > self.cols {
            return Err(Error::shape("trajectory column range", self.cols, start + count));
        }
        let mut sel = CMatrix::zeros(self.cols, count);
        for j in 0..count {
            sel[(start + j, j)] = C64::new(1.0, 0.0);
        }
        self.combine(&sel)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.system, &other.system) && self.system.rm() != other.system.rm() {
            return Err(Error::shape(
                "trajectory sum system",
                self.system.rm(),
                other.system.rm(),
            ));
        }
        if self.cols != other.cols {
            return Err(Error::shape("trajectory sum columns", self.cols, other.cols));
        }
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Ok(Self {
            system: self.system.clone(),
            parts,
            cols: self.cols,
        })
    }

    /// Total accepted steps over the underlying solves.
    pub fn accepted_steps(&self) -> usize {
        let mut seen: Vec<*const DenseOutput> = Vec::new();
        let mut total = 0;
        for p in &self.parts {
            let ptr = Arc::as_ptr(&p.dense);
            if !seen.contains(&ptr) {
                seen.push(ptr);
                total += p.dense.stats().accepted;
            }
        }
        total
    }
}

impl Differentiable for SystemTrajectory {
    fn shape(&self) -> (usize, usize) {
        (self.system.m(), self.cols)
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.system.max_solution_order())
    }

    fn derivative(&self, t: f64, order: usize) -> Result<CMatrix> {
        let sys = &self.system;
        if order < sys.r() {
            let m = sys.m();
            let x = self.state(t)?;
            return Ok(x.view((order * m, 0), (m, self.cols)).into_owned());
        }
        Ok(self.derivatives(t, order)?.pop().expect("nonempty"))
    }

    fn derivatives_upto(&self, t: f64, upto: usize) -> Result<Vec<CMatrix>> {
        self.derivatives(t, upto)
    }
}

/// `Y_i`, the solution with `Y_i^(j-1)(a) = delta_ij I_m`; `index` runs over `1..=r`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub index: usize,
    pub trajectory: SystemTrajectory,
}

impl FundamentalSolution {
    pub fn derivative(&self, t: f64, order: usize) -> Result<CMatrix> {
        self.trajectory.derivative(t, order)
    }
}

/// The `r` fundamental solutions, all taken from one `Z(a) = I_rm` companion solve.
#[derive(Debug, Clone)]
pub struct FundamentalSet {
    all: SystemTrajectory,
    solutions: Vec<FundamentalSolution>,
}

impl FundamentalSet {
    /// `Z = (Z_1, ..., Z_r)`; its value is the `m x rm` row `(Y_1, ..., Y_r)`.
    pub fn all(&self) -> &SystemTrajectory {
        &self.all
    }

    pub fn solutions(&self) -> &[FundamentalSolution] {
        &self.solutions
    }

    /// `Y_i`, `1 <= i <= r`.
    pub fn solution(&self, i: usize) -> &FundamentalSolution {
        &self.solutions[i - 1]
    }

    pub fn system(&self) -> &Arc<DifferentialSystem> {
        self.all.system()
    }

    /// `det Z(t)`.
    pub fn wronskian_det(&self, t: f64) -> Result<C64> {
        Ok(self.all.state(t)?.determinant())
    }
}

pub fn fundamental_solutions(system: &Arc<DifferentialSystem>, cfg: &IntegratorConfig) -> Result<FundamentalSet> {
    let companion = build_companion(system.clone());
    let rm = system.rm();
    let dense = solve_matrix_cauchy(&companion, CMatrix::identity(rm, rm), cfg)?;
    let all = SystemTrajectory::from_dense(system.clone(), dense, None);
    let m = system.m();
    let solutions = (0..system.r())
        .map(|i| {
            Ok(FundamentalSolution {
                index: i + 1,
                trajectory: all.columns(i * m, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FundamentalSet { all, solutions })
}

/// `Y_i^(order)(t)`.
pub fn derivative_at(sol: &FundamentalSolution, t: f64, order: usize) -> Result<CMatrix> {
    sol.derivative(t, order)
}

/// Solves `Ly = f` with `col(y(a), ..., y^(r-1)(a)) = initial`; `f` is `m x 1`.
pub fn solve_inhomogeneous_cauchy(
    system: &Arc<DifferentialSystem>,
    f: &CoefficientFunction,
    initial: &CVector,
    cfg: &IntegratorConfig,
) -> Result<SystemTrajectory> {
    f.validate()?;
    let (m, rm) = (system.m(), system.rm());
    if f.shape() != (m, 1) {
        return Err(Error::shape(
            "forcing f",
            format!("({m}, 1)"),
            format!("{:?}", f.shape()),
        ));
    }
    if initial.len() != rm {
        return Err(Error::shape("Cauchy initial vector", rm, initial.len()));
    }
    if let Some(max) = f.max_order() {
        if max < system.n() {
            return Err(Error::invalid(format!(
                "forcing provides {max} derivatives, smoothness n = {} needs them",
                system.n()
            )));
        }
    }
    let companion = build_companion(system.clone());
    let iv = system.interval();
    let x0 = CMatrix::from_column_slice(rm, 1, initial.as_slice());
    let dense = integrate(|t, x| companion.rate(t, x, Some(f)), iv.a, iv.b, x0, cfg)?;
    Ok(SystemTrajectory::from_dense(
        system.clone(),
        dense,
        Some(Arc::new(f.clone())),
    ))
}
