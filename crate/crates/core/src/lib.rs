//! Solvability analysis for linear boundary-value problems
//!
//! ```text
//! y^(r)(t) + A_{r-1}(t) y^(r-1)(t) + ... + A_0(t) y(t) = f(t),   t in (a, b)
//! B y = c
//! ```
//!
//! where `y` is `C^m`-valued and `B` is an arbitrary linear boundary operator producing `l`
//! scalar conditions. The problem is reduced to its characteristic matrix
//! `M(L,B) = ([B Y_1], ..., [B Y_r])`, an `l x rm` complex matrix built from the fundamental
//! matrix solutions `Y_i`. The rank of that matrix gives the index and both Fredholm numbers of
//! the problem; its null space lifts to the kernel of the problem.
//!
//! Module map:
//! - [`ode_core`]: systems, companion reduction, adaptive integration, fundamental solutions
//! - [`boundary`]: multi-point / Caputo / integral boundary operators
//! - [`fredholm`]: characteristic matrix, Fredholm report, kernel basis
//! - [`solver`]: full inhomogeneous BVP solutions
//! - [`matfun`]: matrix functions and closed-form characteristic matrices
//! - [`limits`]: Sobolev norms and perturbation-sequence experiments

pub mod boundary;
mod error;
pub mod fredholm;
pub mod limits;
pub mod linalg;
pub mod matfun;
pub mod ode_core;
pub mod quadrature;
pub mod serde_util;
pub mod solver;

pub use error::{Error, Result};

pub use boundary::{BoundaryOperator, BoundaryTerm};
pub use fredholm::{CharacteristicMatrix, FredholmReport};
pub use limits::{ConvergenceReport, PerturbationSequence, SobolevNorm};
pub use matfun::closed_form::ExampleParams;
pub use ode_core::{
    CoefficientFunction, Differentiable, DifferentialSystem, FundamentalSolution, IntegratorConfig, Interval,
    SystemTrajectory,
};
pub use solver::{BvpSolution, BvpStatus, PreparedProblem, SolverConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
