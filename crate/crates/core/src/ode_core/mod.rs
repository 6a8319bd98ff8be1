//! Differential systems, companion reduction and fundamental matrix solutions.

mod coefficient;
mod integrator;
mod system;
mod trajectory;

pub use coefficient::CoefficientFunction;
pub use integrator::{solve_matrix_cauchy, DenseOutput, IntegratorConfig, IntegratorStats};
pub use system::{build_companion, CompanionSystem, DifferentialSystem};
pub use trajectory::{
    derivative_at, fundamental_solutions, solve_inhomogeneous_cauchy, FundamentalSet, FundamentalSolution,
    SystemTrajectory,
};

use crate::{CMatrix, Error, Result};

/// Finite interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(format!("interval endpoints must be finite: [{a}, {b}]")));
        }
        if a >= b {
            return Err(Error::invalid(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }

    /// Accepts points within a relative `1e-12` of the endpoints and clamps them in.
    pub fn clamp_checked(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.length().max(self.a.abs()).max(self.b.abs());
        if t.is_nan() || t < self.a - slack || t > self.b + slack {
            return Err(Error::DomainError {
                t,
                a: self.a,
                b: self.b,
            });
        }
        Ok(t.clamp(self.a, self.b))
    }

    /// `count` equally spaced points including both endpoints.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.a],
            _ => (0..count)
                .map(|i| {
                    if i == count - 1 {
                        self.b
                    } else {
                        self.a + self.length() * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// A matrix-valued function of one real variable with access to derivatives.
pub trait Differentiable: Send + Sync {
    /// `(rows, cols)` of every value.
    fn shape(&self) -> (usize, usize);

    /// Highest derivative order available, `None` when unbounded.
    fn max_order(&self) -> Option<usize>;

    fn derivative(&self, t: f64, order: usize) -> Result<CMatrix>;

    fn value(&self, t: f64) -> Result<CMatrix> {
        self.derivative(t, 0)
    }

    /// `[f(t), f'(t), ..., f^(upto)(t)]`.
    fn derivatives_upto(&self, t: f64, upto: usize) -> Result<Vec<CMatrix>> {
        (0..=upto).map(|k| self.derivative(t, k)).collect()
    }

    fn check_order(&self, order: usize) -> Result<()> {
        match self.max_order() {
            Some(max) if order > max => Err(Error::OrderUnavailable {
                requested: order,
                available: max,
            }),
            _ => Ok(()),
        }
    }
}

/// Pointwise difference `lhs - rhs` of two functions of equal shape.
pub struct Difference<'a> {
    pub lhs: &'a dyn Differentiable,
    pub rhs: &'a dyn Differentiable,
}

impl Differentiable for Difference<'_> {
    fn shape(&self) -> (usize, usize) {
        self.lhs.shape()
    }

    fn max_order(&self) -> Option<usize> {
        match (self.lhs.max_order(), self.rhs.max_order()) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn derivative(&self, t: f64, order: usize) -> Result<CMatrix> {
        Ok(self.lhs.derivative(t, order)? - self.rhs.derivative(t, order)?)
    }

    fn derivatives_upto(&self, t: f64, upto: usize) -> Result<Vec<CMatrix>> {
        let rhs = self.rhs.derivatives_upto(t, upto)?;
        Ok(self
            .lhs
            .derivatives_upto(t, upto)?
            .into_iter()
            .zip(rhs)
            .map(|(x, y)| x - y)
            .collect())
    }
}
