//! JSON problem files.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real), matrices are
//! row-major nested arrays. See the README for a complete example.

use std::sync::Arc;

use fredholm_bvp::serde_util::{cmatrix, complex};
use fredholm_bvp::{
    BoundaryOperator, BoundaryTerm, CMatrix, CVector, CoefficientFunction, Differentiable, DifferentialSystem,
    Interval, PerturbationSequence, SobolevNorm, C64,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix(#[serde(with = "cmatrix")] pub CMatrix);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Complex(#[serde(with = "complex")] pub C64);

/// Exponent `p` of the Sobolev norm: a number `>= 1` or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(String),
}

impl Default for Exponent {
    fn default() -> Self {
        Exponent::Finite(2.0)
    }
}

impl Exponent {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Exponent::Finite(p) => Ok(*p),
            Exponent::Named(s) if s == "inf" => Ok(f64::INFINITY),
            Exponent::Named(s) => Err(CliError::Schema(format!("p must be a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant {
        value: Matrix,
    },
    /// `sum_j coefficients[j] (t - origin)^j`; `origin` defaults to the left endpoint.
    Polynomial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<f64>,
        coefficients: Vec<Matrix>,
    },
    /// Piecewise Lagrange interpolation of degree `order` through the samples.
    Sampled {
        grid: Vec<f64>,
        values: Vec<Matrix>,
        order: usize,
    },
}

impl CoefficientSpec {
    pub fn build(&self, a: f64) -> fredholm_bvp::Result<CoefficientFunction> {
        let f = match self {
            Self::Constant { value } => CoefficientFunction::Constant(value.0.clone()),
            Self::Polynomial { origin, coefficients } => CoefficientFunction::polynomial(
                origin.unwrap_or(a),
                coefficients.iter().map(|c| c.0.clone()).collect(),
            )?,
            Self::Sampled { grid, values, order } => {
                CoefficientFunction::sampled(grid.clone(), values.iter().map(|v| v.0.clone()).collect(), *order)?
            }
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermSpec {
    /// `alpha (D^order y)(point)`; fractional orders are Caputo derivatives from `a`.
    Point {
        point: f64,
        #[serde(default)]
        order: f64,
        alpha: Matrix,
    },
    /// `int_a^b kernel(t) y^(derivative_order)(t) dt`.
    Integral {
        kernel: CoefficientSpec,
        #[serde(default)]
        derivative_order: usize,
    },
}

impl TermSpec {
    fn build(&self, a: f64) -> fredholm_bvp::Result<BoundaryTerm> {
        Ok(match self {
            Self::Point { point, order, alpha } => BoundaryTerm::Point {
                point: *point,
                order: *order,
                alpha: alpha.0.clone(),
            },
            Self::Integral {
                kernel,
                derivative_order,
            } => BoundaryTerm::Integral {
                kernel: kernel.build(a)?,
                derivative_order: *derivative_order,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub l: usize,
    pub terms: Vec<TermSpec>,
}

/// Parametric family `A_j + k^-rate dA_j`, `B + k^-rate dB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub k_values: Vec<u64>,
    #[serde(default = "one")]
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_deltas: Option<Vec<CoefficientSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_deltas: Option<Vec<TermSpec>>,
    #[serde(default)]
    pub expect_converge: bool,
}

fn one() -> f64 {
    1.0
}

/// Tolerances stored in the file; absent entries fall back to the active profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileTolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub interval: [f64; 2],
    pub m: usize,
    pub r: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub p: Exponent,
    /// `coefficients[k]` multiplies `y^(k)`.
    pub coefficients: Vec<CoefficientSpec>,
    pub boundary: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerances: FileTolerances,
}

fn is_default(t: &FileTolerances) -> bool {
    *t == FileTolerances::default()
}

/// Validated problem ready for computation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: Arc<DifferentialSystem>,
    pub boundary: BoundaryOperator,
    pub norm: SobolevNorm,
    pub f: Option<CoefficientFunction>,
    pub c: Option<CVector>,
    pub perturbation: Option<(PerturbationSequence, bool)>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    pub fn build(&self) -> Result<Problem, CliError> {
        let schema = |e: fredholm_bvp::Error| CliError::Schema(e.to_string());
        if self.version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        let [a, b] = self.interval;
        let interval = Interval::new(a, b).map_err(schema)?;
        if self.coefficients.len() != self.r {
            return Err(CliError::Schema(format!(
                "expected r = {} coefficients, found {}",
                self.r,
                self.coefficients.len()
            )));
        }
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| c.build(a))
            .collect::<fredholm_bvp::Result<Vec<_>>>()
            .map_err(schema)?;
        let system = Arc::new(DifferentialSystem::new(interval, self.m, self.r, self.n, coefficients).map_err(schema)?);
        let boundary = self.boundary_operator(&self.boundary.terms, a).map_err(schema)?;
        boundary.check_compatible(&system).map_err(schema)?;
        let norm = SobolevNorm::new(self.n, self.p.value()?).map_err(schema)?;

        let f = match &self.f {
            Some(spec) => {
                let f = spec.build(a).map_err(schema)?;
                if f.shape() != (self.m, 1) {
                    return Err(CliError::Schema(format!(
                        "f must be {} x 1, found {:?}",
                        self.m,
                        f.shape()
                    )));
                }
                Some(f)
            }
            None => None,
        };
        let c = match &self.c {
            Some(values) => {
                if values.len() != self.boundary.l {
                    return Err(CliError::Schema(format!(
                        "c must have l = {} entries, found {}",
                        self.boundary.l,
                        values.len()
                    )));
                }
                Some(CVector::from_iterator(values.len(), values.iter().map(|z| z.0)))
            }
            None => None,
        };

        let perturbation = match &self.perturbation {
            Some(p) => {
                let coefficient_deltas = p
                    .coefficient_deltas
                    .as_ref()
                    .map(|d| d.iter().map(|c| c.build(a)).collect::<fredholm_bvp::Result<Vec<_>>>())
                    .transpose()
                    .map_err(schema)?;
                let boundary_delta = p
                    .boundary_deltas
                    .as_ref()
                    .map(|t| self.boundary_operator(t, a))
                    .transpose()
                    .map_err(schema)?;
                let seq = PerturbationSequence {
                    system: system.clone(),
                    boundary: boundary.clone(),
                    coefficient_deltas,
                    boundary_delta,
                    rate: p.rate,
                    k_values: p.k_values.clone(),
                };
                seq.validate().map_err(schema)?;
                // every member must be a valid problem before anything is integrated
                for &k in &seq.k_values {
                    seq.member(k).map_err(schema)?;
                }
                Some((seq, p.expect_converge))
            }
            None => None,
        };

        Ok(Problem {
            system,
            boundary,
            norm,
            f,
            c,
            perturbation,
        })
    }

    fn boundary_operator(&self, terms: &[TermSpec], a: f64) -> fredholm_bvp::Result<BoundaryOperator> {
        let terms = terms
            .iter()
            .map(|t| t.build(a))
            .collect::<fredholm_bvp::Result<Vec<_>>>()?;
        BoundaryOperator::new(self.boundary.l, self.m, self.r, self.n, terms)
    }
}
