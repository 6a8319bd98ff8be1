use std::sync::Arc;

use super::{CoefficientFunction, Differentiable, Interval};
use crate::{CMatrix, Error, Result, C64};

/// `y^(r) + sum_{k<r} A_k(t) y^(k) = f(t)` on `interval`, `y` in `C^m`, coefficients of
/// Sobolev smoothness `n`.
#[derive(Debug, Clone)]
pub struct DifferentialSystem {
    interval: Interval,
    m: usize,
    r: usize,
    n: usize,
    /// `coefficients[k]` multiplies `y^(k)`.
    coefficients: Vec<CoefficientFunction>,
}

impl DifferentialSystem {
    pub fn new(
        interval: Interval,
        m: usize,
        r: usize,
        n: usize,
        coefficients: Vec<CoefficientFunction>,
    ) -> Result<Self> {
        if m == 0 || r == 0 {
            return Err(Error::invalid(format!("need m >= 1 and r >= 1, got m = {m}, r = {r}")));
        }
        if coefficients.len() != r {
            return Err(Error::shape("coefficient list", r, coefficients.len()));
        }
        for (k, c) in coefficients.iter().enumerate() {
            c.validate()?;
            if c.shape() != (m, m) {
                return Err(Error::shape(
                    format!("coefficient A_{k}"),
                    format!("({m}, {m})"),
                    format!("{:?}", c.shape()),
                ));
            }
            if let Some(max) = c.max_order() {
                if max < n {
                    return Err(Error::invalid(format!(
                        "coefficient A_{k} provides {max} derivatives, smoothness n = {n} needs {n}"
                    )));
                }
            }
            if let Some((lo, hi)) = c.domain() {
                if lo > interval.a || hi < interval.b {
                    return Err(Error::invalid(format!(
                        "coefficient A_{k} is defined on [{lo}, {hi}], which does not cover [{}, {}]",
                        interval.a, interval.b
                    )));
                }
            }
        }
        Ok(Self {
            interval,
            m,
            r,
            n,
            coefficients,
        })
    }

    /// Constant-coefficient convenience constructor; `coefficients[k]` multiplies `y^(k)`.
    pub fn constant(interval: Interval, n: usize, coefficients: Vec<CMatrix>) -> Result<Self> {
        let m = coefficients.first().map(|c| c.nrows()).unwrap_or(0);
        let r = coefficients.len();
        Self::new(
            interval,
            m,
            r,
            n,
            coefficients.into_iter().map(CoefficientFunction::Constant).collect(),
        )
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn rm(&self) -> usize {
        self.r * self.m
    }
    pub fn coefficients(&self) -> &[CoefficientFunction] {
        &self.coefficients
    }
    pub fn coefficient(&self, k: usize) -> &CoefficientFunction {
        &self.coefficients[k]
    }

    /// Highest derivative order of a solution that the library exposes, `n + r`.
    pub fn max_solution_order(&self) -> usize {
        self.n + self.r
    }

    /// Same system with different coefficients (shape and smoothness re-validated).
    pub fn with_coefficients(&self, coefficients: Vec<CoefficientFunction>) -> Result<Self> {
        Self::new(self.interval, self.m, self.r, self.n, coefficients)
    }

    /// `sum_k A_k(t) y^(k)` for the lower derivatives `lower[0..r]` (each `m x c`).
    pub fn apply_coefficients(&self, t: f64, lower: &[CMatrix]) -> Result<CMatrix> {
        let cols = lower[0].ncols();
        let mut acc = CMatrix::zeros(self.m, cols);
        for (k, y) in lower.iter().enumerate().take(self.r) {
            acc += self.coefficients[k].value(t)? * y;
        }
        Ok(acc)
    }

    /// Extends `derivs` (holding `y, y', ..., y^(r-1)` at `t`, each `m x c`) up to order `upto`
    /// by differentiating the equation:
    /// `y^(r+s) = f^(s) - sum_k sum_{q<=s} binom(s,q) A_k^(q) y^(k+s-q)`.
    pub(crate) fn extend_derivatives(
        &self,
        t: f64,
        derivs: &mut Vec<CMatrix>,
        upto: usize,
        forcing: Option<&dyn Differentiable>,
    ) -> Result<()> {
        let limit = self.max_solution_order();
        if upto > limit {
            return Err(Error::OrderUnavailable {
                requested: upto,
                available: limit,
            });
        }
        let cols = derivs[0].ncols();
        while derivs.len() <= upto {
            let s = derivs.len() - self.r;
            let mut next = match forcing {
                Some(f) => f.derivative(t, s)?,
                None => CMatrix::zeros(self.m, cols),
            };
            for (k, a) in self.coefficients.iter().enumerate() {
                let mut binom = 1.0;
                for q in 0..=s {
                    if q > 0 {
                        binom = binom * (s - q + 1) as f64 / q as f64;
                    }
                    let aq = a.derivative(t, q)?;
                    next -= aq * &derivs[k + s - q] * C64::new(binom, 0.0);
                }
            }
            derivs.push(next);
        }
        Ok(())
    }
}

/// First-order companion form `x' + K(t) x = g(t)` of a system, `x = col(y, ..., y^(r-1))`.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    system: Arc<DifferentialSystem>,
}

impl CompanionSystem {
    pub fn dimension(&self) -> usize {
        self.system.rm()
    }

    pub fn system(&self) -> &Arc<DifferentialSystem> {
        &self.system
    }

    /// `K(t)`: `-I_m` on the block superdiagonal, `(A_0, ..., A_{r-1})` in the last block row.
    pub fn matrix(&self, t: f64) -> Result<CMatrix> {
        self.matrix_derivative(t, 0)
    }

    /// `K^(q)(t)`; the constant `-I` blocks only appear for `q = 0`.
    pub fn matrix_derivative(&self, t: f64, q: usize) -> Result<CMatrix> {
        let (m, r) = (self.system.m(), self.system.r());
        let mut k = CMatrix::zeros(r * m, r * m);
        if q == 0 {
            for blk in 0..r - 1 {
                for d in 0..m {
                    k[(blk * m + d, (blk + 1) * m + d)] = C64::new(-1.0, 0.0);
                }
            }
        }
        for j in 0..r {
            let a = self.system.coefficient(j).derivative(t, q)?;
            k.view_mut(((r - 1) * m, j * m), (m, m)).copy_from(&a);
        }
        Ok(k)
    }

    /// `-K(t) x + g(t)` evaluated block-wise, with `g = col(0, ..., 0, f)`.
    pub(crate) fn rate(&self, t: f64, x: &CMatrix, forcing: Option<&CoefficientFunction>) -> Result<CMatrix> {
        let (m, r) = (self.system.m(), self.system.r());
        let cols = x.ncols();
        let mut out = CMatrix::zeros(r * m, cols);
        if r > 1 {
            out.view_mut((0, 0), ((r - 1) * m, cols))
                .copy_from(&x.view((m, 0), ((r - 1) * m, cols)));
        }
        let mut last = match forcing {
            Some(f) => f.value(t)?,
            None => CMatrix::zeros(m, cols),
        };
        for j in 0..r {
            let a = self.system.coefficient(j).value(t)?;
            last -= a * x.view((j * m, 0), (m, cols));
        }
        out.view_mut(((r - 1) * m, 0), (m, cols)).copy_from(&last);
        Ok(out)
    }
}

pub fn build_companion(system: Arc<DifferentialSystem>) -> CompanionSystem {
    CompanionSystem { system }
}
