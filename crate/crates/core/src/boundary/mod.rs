//! Linear boundary operators `B: y -> C^l` built from point terms (integer or Caputo order)
//! and integral terms.

mod caputo;

pub use caputo::caputo_derivative;

use crate::linalg::frobenius;
use crate::ode_core::{CoefficientFunction, Differentiable, DifferentialSystem, Interval, SystemTrajectory};
use crate::quadrature::integrate_adaptive;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Default absolute/relative tolerance of boundary quadratures.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryTerm {
    /// `alpha * (D^order y)(point)`; non-integer orders are Caputo derivatives from `a`.
    Point { point: f64, order: f64, alpha: CMatrix },
    /// `int_a^b kernel(t) y^(derivative_order)(t) dt`.
    Integral {
        kernel: CoefficientFunction,
        derivative_order: usize,
    },
}

impl BoundaryTerm {
    /// Classical derivative order the term needs.
    pub fn required_order(&self) -> usize {
        match self {
            Self::Point { order, .. } => order.ceil() as usize,
            Self::Integral { derivative_order, .. } => *derivative_order,
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Self::Point { alpha, .. } => alpha.shape(),
            Self::Integral { kernel, .. } => kernel.shape(),
        }
    }

    /// Same term multiplied by `w`.
    pub fn scaled(&self, w: f64) -> Self {
        match self {
            Self::Point { point, order, alpha } => Self::Point {
                point: *point,
                order: *order,
                alpha: alpha * C64::new(w, 0.0),
            },
            Self::Integral {
                kernel,
                derivative_order,
            } => Self::Integral {
                kernel: CoefficientFunction::Sum(vec![(w, kernel.clone())]),
                derivative_order: *derivative_order,
            },
        }
    }
}

/// `B y = sum_terms`, mapping `C^m`-valued functions of smoothness `n + r` to `C^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator {
    l: usize,
    m: usize,
    r: usize,
    n: usize,
    terms: Vec<BoundaryTerm>,
}

impl BoundaryOperator {
    pub fn new(l: usize, m: usize, r: usize, n: usize, terms: Vec<BoundaryTerm>) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("a boundary operator needs l >= 1 conditions"));
        }
        let top = n + r;
        for (i, term) in terms.iter().enumerate() {
            if term.shape() != (l, m) {
                return Err(Error::shape(
                    format!("boundary term {i}"),
                    format!("({l}, {m})"),
                    format!("{:?}", term.shape()),
                ));
            }
            match term {
                BoundaryTerm::Point { point, order, .. } => {
                    if !point.is_finite() {
                        return Err(Error::invalid(format!("boundary term {i}: point must be finite")));
                    }
                    if !(*order >= 0.0 && order.is_finite()) {
                        return Err(Error::invalid(format!(
                            "boundary term {i}: order must be finite and >= 0, got {order}"
                        )));
                    }
                }
                BoundaryTerm::Integral { kernel, .. } => kernel.validate()?,
            }
            if term.required_order() > top {
                return Err(Error::OrderUnavailable {
                    requested: term.required_order(),
                    available: top,
                });
            }
        }
        Ok(Self { l, m, r, n, terms })
    }

    /// The initial-value operator `y -> col(y(a), ..., y^(r-1)(a))`, `l = rm`.
    pub fn cauchy(m: usize, r: usize, n: usize, a: f64) -> Result<Self> {
        let terms = (0..r)
            .map(|j| {
                let mut alpha = CMatrix::zeros(r * m, m);
                for d in 0..m {
                    alpha[(j * m + d, d)] = C64::new(1.0, 0.0);
                }
                BoundaryTerm::Point {
                    point: a,
                    order: j as f64,
                    alpha,
                }
            })
            .collect();
        Self::new(r * m, m, r, n, terms)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// `(m, r, n)` of the systems this operator applies to.
    pub fn signature(&self) -> (usize, usize, usize) {
        (self.m, self.r, self.n)
    }

    pub fn terms(&self) -> &[BoundaryTerm] {
        &self.terms
    }

    pub fn max_required_order(&self) -> usize {
        self.terms.iter().map(BoundaryTerm::required_order).max().unwrap_or(0)
    }

    /// `self + w * other` (term lists concatenated).
    pub fn plus_scaled(&self, w: f64, other: &BoundaryOperator) -> Result<Self> {
        if (other.l, other.m, other.r, other.n) != (self.l, self.m, self.r, self.n) {
            return Err(Error::shape(
                "boundary operator sum",
                format!("l = {}, (m, r, n) = {:?}", self.l, self.signature()),
                format!("l = {}, (m, r, n) = {:?}", other.l, other.signature()),
            ));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| t.scaled(w)));
        Ok(Self { terms, ..self.clone() })
    }

    /// Checks the `(m, r, n)` signature, that points lie in the interval and kernels cover it.
    pub fn check_compatible(&self, system: &DifferentialSystem) -> Result<()> {
        let sig = (system.m(), system.r(), system.n());
        if sig != self.signature() {
            return Err(Error::shape(
                "boundary operator signature (m, r, n)",
                format!("{sig:?}"),
                format!("{:?}", self.signature()),
            ));
        }
        let iv = system.interval();
        for term in &self.terms {
            match term {
                BoundaryTerm::Point { point, .. } => {
                    iv.clamp_checked(*point)?;
                }
                BoundaryTerm::Integral { kernel, .. } => {
                    if let Some((lo, hi)) = kernel.domain() {
                        if lo > iv.a || hi < iv.b {
                            return Err(Error::invalid(format!(
                                "integral kernel defined on [{lo}, {hi}] does not cover [{}, {}]",
                                iv.a, iv.b
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `[B Y]` together with an assembly scale: the sum over terms of the magnitudes of their
    /// contributions before cancellation. The scale bounds the rounding noise of the result.
    pub fn apply_with_scale(
        &self,
        y: &dyn Differentiable,
        interval: Interval,
        quad_tol: f64,
    ) -> Result<(CMatrix, f64)> {
        let (rows, cols) = y.shape();
        if rows != self.m {
            return Err(Error::shape("boundary operand rows", self.m, rows));
        }
        let mut acc = CMatrix::zeros(self.l, cols);
        let mut scale = 0.0;
        for term in &self.terms {
            match term {
                BoundaryTerm::Point { point, order, alpha } => {
                    let v = caputo_derivative(y, *order, *point, interval, quad_tol)?;
                    scale += frobenius(alpha) * frobenius(&v);
                    acc += alpha * v;
                }
                BoundaryTerm::Integral {
                    kernel,
                    derivative_order,
                } => {
                    y.check_order(*derivative_order)?;
                    let v = integrate_adaptive(
                        |t| Ok(kernel.value(t)? * y.derivative(t, *derivative_order)?),
                        interval.a,
                        interval.b,
                        quad_tol,
                    )?;
                    scale += frobenius(&v);
                    acc += v;
                }
            }
        }
        Ok((acc, scale))
    }

    /// `[B Y]`: column `j` is `B` applied to column `j` of `Y`.
    pub fn apply_to_matrix(&self, y: &dyn Differentiable, interval: Interval, quad_tol: f64) -> Result<CMatrix> {
        Ok(self.apply_with_scale(y, interval, quad_tol)?.0)
    }

    /// `B y` for a vector function (`m x 1`).
    pub fn apply_to_function(&self, y: &dyn Differentiable, interval: Interval, quad_tol: f64) -> Result<CVector> {
        if y.shape().1 != 1 {
            return Err(Error::shape("boundary operand columns", 1, y.shape().1));
        }
        Ok(self.apply_to_matrix(y, interval, quad_tol)?.column(0).into_owned())
    }

    /// [`apply_to_matrix`](Self::apply_to_matrix) on the interval of the trajectory's system.
    pub fn apply_to_trajectory(&self, y: &SystemTrajectory, quad_tol: f64) -> Result<CMatrix> {
        self.apply_to_matrix(y, y.system().interval(), quad_tol)
    }
}
