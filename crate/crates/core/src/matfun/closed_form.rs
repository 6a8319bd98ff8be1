//! Closed-form characteristic matrices of five constant-coefficient model problems, built
//! from matrix functions only, plus builders for the same problems as numeric inputs.

use serde::{Deserialize, Serialize};

use super::{matrix_exponential, matrix_power, phi_function, sqrt_trig};
use crate::boundary::{BoundaryOperator, BoundaryTerm};
use crate::linalg::real_matrix;
use crate::ode_core::{CoefficientFunction, DifferentialSystem, Interval};
use crate::serde_util::{cmatrix, cmatrix_vec};
use crate::{CMatrix, Error, Result};

/// Point terms of one boundary point in the multi-point fractional problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalPoint {
    pub point: f64,
    /// Caputo orders `beta_{k,j}` (0 means evaluation).
    pub orders: Vec<f64>,
    #[serde(with = "cmatrix_vec")]
    pub alphas: Vec<CMatrix>,
}

/// Data of the five model problems. Every variant carries its interval `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "example", rename_all = "snake_case")]
pub enum ExampleParams {
    /// `y' + A y = f`, `B y = sum_{k<n} alpha_k y^(k)(a)`; `n = alphas.len()`.
    OnePointFirstOrder {
        a: f64,
        b: f64,
        #[serde(with = "cmatrix")]
        matrix: CMatrix,
        #[serde(with = "cmatrix_vec")]
        alphas: Vec<CMatrix>,
    },
    /// `y' = f`, Caputo point terms at several points.
    MultiPointCaputo {
        a: f64,
        b: f64,
        m: usize,
        n: usize,
        points: Vec<FractionalPoint>,
    },
    /// `y'' + A y' = f`, `B y = sum_{k<=n+1} alpha_k y^(k)(a) + beta_k y^(k)(b)`.
    TwoPointDamped {
        a: f64,
        b: f64,
        #[serde(with = "cmatrix")]
        matrix: CMatrix,
        #[serde(with = "cmatrix_vec")]
        alphas: Vec<CMatrix>,
        #[serde(with = "cmatrix_vec")]
        betas: Vec<CMatrix>,
    },
    /// `y'' + A y = f` with the same boundary operator as `TwoPointDamped`.
    TwoPointOscillator {
        a: f64,
        b: f64,
        #[serde(with = "cmatrix")]
        matrix: CMatrix,
        #[serde(with = "cmatrix_vec")]
        alphas: Vec<CMatrix>,
        #[serde(with = "cmatrix_vec")]
        betas: Vec<CMatrix>,
    },
    /// `y' = f`, `B y = sum_{i<=n} alpha_i y^(i)(a) + int_a^b Phi(t) y^(n+1)(t) dt` with a
    /// polynomial kernel in `t - a`; `n = alphas.len() - 1`.
    GeneralFirstOrder {
        a: f64,
        b: f64,
        #[serde(with = "cmatrix_vec")]
        alphas: Vec<CMatrix>,
        #[serde(with = "cmatrix_vec", default)]
        kernel: Vec<CMatrix>,
    },
}

fn shape_of(x: &CMatrix) -> String {
    format!("({}, {})", x.nrows(), x.ncols())
}

fn expect_shape(x: &CMatrix, rows: usize, cols: usize, context: &str) -> Result<()> {
    if x.nrows() != rows || x.ncols() != cols {
        return Err(Error::shape(context, format!("({rows}, {cols})"), shape_of(x)));
    }
    Ok(())
}

fn first_rows(list: &[CMatrix], context: &str) -> Result<usize> {
    list.first()
        .map(|x| x.nrows())
        .ok_or_else(|| Error::shape(context, "at least one matrix", "none"))
}

impl ExampleParams {
    /// Example number 1..=5.
    pub fn id(&self) -> u8 {
        match self {
            Self::OnePointFirstOrder { .. } => 1,
            Self::MultiPointCaputo { .. } => 2,
            Self::TwoPointDamped { .. } => 3,
            Self::TwoPointOscillator { .. } => 4,
            Self::GeneralFirstOrder { .. } => 5,
        }
    }

    pub fn interval(&self) -> Result<Interval> {
        let (a, b) = match self {
            Self::OnePointFirstOrder { a, b, .. }
            | Self::MultiPointCaputo { a, b, .. }
            | Self::TwoPointDamped { a, b, .. }
            | Self::TwoPointOscillator { a, b, .. }
            | Self::GeneralFirstOrder { a, b, .. } => (*a, *b),
        };
        Interval::new(a, b)
    }

    /// Same data on `[a, b]`.
    pub fn with_interval(&self, a_new: f64, b_new: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::OnePointFirstOrder { a, b, .. }
            | Self::MultiPointCaputo { a, b, .. }
            | Self::TwoPointDamped { a, b, .. }
            | Self::TwoPointOscillator { a, b, .. }
            | Self::GeneralFirstOrder { a, b, .. } => {
                *a = a_new;
                *b = b_new;
            }
        }
        out
    }

    /// `(m, r, n, l)`, after checking that all matrices have consistent shapes.
    pub fn dimensions(&self) -> Result<(usize, usize, usize, usize)> {
        self.interval()?;
        match self {
            Self::OnePointFirstOrder { matrix, alphas, .. } => {
                let m = matrix.nrows();
                expect_shape(matrix, m, m, "coefficient A")?;
                let l = first_rows(alphas, "alpha list")?;
                for (k, x) in alphas.iter().enumerate() {
                    expect_shape(x, l, m, &format!("alpha_{k}"))?;
                }
                Ok((m, 1, alphas.len(), l))
            }
            Self::MultiPointCaputo { m, n, points, a, b } => {
                let first = points
                    .first()
                    .ok_or_else(|| Error::shape("boundary points", "at least one", "none"))?;
                let l = first_rows(&first.alphas, "alpha list")?;
                for (k, p) in points.iter().enumerate() {
                    if p.orders.len() != p.alphas.len() {
                        return Err(Error::shape(
                            format!("orders at point {k}"),
                            p.alphas.len(),
                            p.orders.len(),
                        ));
                    }
                    if !(p.point >= *a && p.point <= *b) {
                        return Err(Error::DomainError {
                            t: p.point,
                            a: *a,
                            b: *b,
                        });
                    }
                    for (j, x) in p.alphas.iter().enumerate() {
                        expect_shape(x, l, *m, &format!("alpha_{{{k},{j}}}"))?;
                    }
                }
                Ok((*m, 1, *n, l))
            }
            Self::TwoPointDamped {
                matrix, alphas, betas, ..
            }
            | Self::TwoPointOscillator {
                matrix, alphas, betas, ..
            } => {
                let m = matrix.nrows();
                expect_shape(matrix, m, m, "coefficient A")?;
                if alphas.len() != betas.len() {
                    return Err(Error::shape("beta list", alphas.len(), betas.len()));
                }
                if alphas.len() < 2 {
                    return Err(Error::shape("alpha list (n + 2 entries)", ">= 2", alphas.len()));
                }
                let l = first_rows(alphas, "alpha list")?;
                for (k, (x, y)) in alphas.iter().zip(betas).enumerate() {
                    expect_shape(x, l, m, &format!("alpha_{k}"))?;
                    expect_shape(y, l, m, &format!("beta_{k}"))?;
                }
                Ok((m, 2, alphas.len() - 2, l))
            }
            Self::GeneralFirstOrder { alphas, kernel, .. } => {
                let l = first_rows(alphas, "alpha list")?;
                let m = alphas[0].ncols();
                for (k, x) in alphas.iter().enumerate() {
                    expect_shape(x, l, m, &format!("alpha_{k}"))?;
                }
                for (k, x) in kernel.iter().enumerate() {
                    expect_shape(x, l, m, &format!("kernel coefficient {k}"))?;
                }
                Ok((m, 1, alphas.len() - 1, l))
            }
        }
    }

    /// The closed-form characteristic matrix, computed without integrating anything.
    pub fn oracle_characteristic_matrix(&self) -> Result<CMatrix> {
        let (m, r, _n, l) = self.dimensions()?;
        let iv = self.interval()?;
        let h = iv.length();
        let out = match self {
            Self::OnePointFirstOrder { matrix, alphas, .. } => {
                let neg = -matrix;
                let mut acc = CMatrix::zeros(l, m);
                for (k, al) in alphas.iter().enumerate() {
                    acc += al * matrix_power(&neg, k);
                }
                acc
            }
            Self::MultiPointCaputo { points, .. } => {
                // Y = I: only order-0 terms survive
                let mut acc = CMatrix::zeros(l, m);
                for p in points {
                    for (beta, al) in p.orders.iter().zip(&p.alphas) {
                        if *beta == 0.0 {
                            acc += al;
                        }
                    }
                }
                acc
            }
            Self::TwoPointDamped {
                matrix, alphas, betas, ..
            } => {
                // Y_1 = I; Y_2 = phi(A, t), Y_2^(k) = (-A)^(k-1) exp(-A (t - a)) for k >= 1
                let neg = -matrix;
                let e = matrix_exponential(matrix, -h);
                let b1 = &alphas[0] + &betas[0];
                let mut b2 = &betas[0] * phi_function(matrix, iv.b, iv.a);
                for k in 1..alphas.len() {
                    b2 += (&alphas[k] + &betas[k] * &e) * matrix_power(&neg, k - 1);
                }
                hstack(&[b1, b2])
            }
            Self::TwoPointOscillator {
                matrix, alphas, betas, ..
            } => {
                // Y_1 = C, Y_2 = S with C' = -A S, S' = C
                let neg = -matrix;
                let (c, s) = sqrt_trig(matrix, h);
                let mut b1 = CMatrix::zeros(l, m);
                let mut b2 = CMatrix::zeros(l, m);
                for k in 0..alphas.len() {
                    let half = matrix_power(&neg, k / 2);
                    if k % 2 == 0 {
                        b1 += &alphas[k] * &half;
                        b1 += &betas[k] * &half * &c;
                        b2 += &betas[k] * &half * &s;
                    } else {
                        b1 += &betas[k] * matrix_power(&neg, k.div_ceil(2)) * &s;
                        b2 += &alphas[k] * &half;
                        b2 += &betas[k] * &half * &c;
                    }
                }
                hstack(&[b1, b2])
            }
            Self::GeneralFirstOrder { alphas, .. } => alphas[0].clone(),
        };
        debug_assert_eq!(out.shape(), (l, r * m));
        Ok(out)
    }

    /// The same problem as a differential system and boundary operator.
    pub fn numeric_problem(&self) -> Result<(DifferentialSystem, BoundaryOperator)> {
        let (m, r, n, l) = self.dimensions()?;
        let iv = self.interval()?;
        let zero = CMatrix::zeros(m, m);
        let point = |point: f64, order: usize, alpha: &CMatrix| BoundaryTerm::Point {
            point,
            order: order as f64,
            alpha: alpha.clone(),
        };
        let (coefficients, terms) = match self {
            Self::OnePointFirstOrder { matrix, alphas, .. } => (
                vec![matrix.clone()],
                alphas.iter().enumerate().map(|(k, al)| point(iv.a, k, al)).collect(),
            ),
            Self::MultiPointCaputo { points, .. } => (
                vec![zero],
                points
                    .iter()
                    .flat_map(|p| {
                        p.orders.iter().zip(&p.alphas).map(|(&beta, al)| BoundaryTerm::Point {
                            point: p.point,
                            order: beta,
                            alpha: al.clone(),
                        })
                    })
                    .collect(),
            ),
            Self::TwoPointDamped {
                matrix, alphas, betas, ..
            } => (vec![zero, matrix.clone()], two_point_terms(iv, alphas, betas)),
            Self::TwoPointOscillator {
                matrix, alphas, betas, ..
            } => (vec![matrix.clone(), zero], two_point_terms(iv, alphas, betas)),
            Self::GeneralFirstOrder { alphas, kernel, .. } => {
                let mut terms: Vec<BoundaryTerm> =
                    alphas.iter().enumerate().map(|(k, al)| point(iv.a, k, al)).collect();
                if !kernel.is_empty() {
                    terms.push(BoundaryTerm::Integral {
                        kernel: CoefficientFunction::polynomial(iv.a, kernel.clone())?,
                        derivative_order: n + 1,
                    });
                }
                (vec![zero], terms)
            }
        };
        let system = DifferentialSystem::constant(iv, n, coefficients)?;
        let boundary = BoundaryOperator::new(l, m, r, n, terms)?;
        Ok((system, boundary))
    }

    /// Small fixed parameter sets for each example, used when no parameter file is given.
    pub fn default_for(id: u8) -> Result<Self> {
        let a2 = real_matrix(2, 2, &[0.6, -0.4, 0.3, 1.1]);
        let r = |rows: usize, cols: usize, data: &[f64]| real_matrix(rows, cols, data);
        Ok(match id {
            1 => Self::OnePointFirstOrder {
                a: 0.0,
                b: 1.0,
                matrix: a2,
                alphas: vec![
                    r(2, 2, &[1.0, 0.5, 0.0, 1.0]),
                    r(2, 2, &[0.2, -0.3, 0.7, 0.1]),
                    r(2, 2, &[-0.4, 0.0, 0.25, 0.3]),
                ],
            },
            2 => Self::MultiPointCaputo {
                a: 0.0,
                b: 2.0,
                m: 2,
                n: 2,
                points: vec![
                    FractionalPoint {
                        point: 0.5,
                        orders: vec![0.0, 0.5, 1.5],
                        alphas: vec![
                            r(2, 2, &[1.0, 0.2, 0.0, 0.7]),
                            r(2, 2, &[0.3, 0.3, -1.0, 0.5]),
                            r(2, 2, &[0.9, 0.0, 0.1, -0.2]),
                        ],
                    },
                    FractionalPoint {
                        point: 1.25,
                        orders: vec![0.0, 2.5],
                        alphas: vec![r(2, 2, &[0.0, -0.6, 0.4, 0.1]), r(2, 2, &[2.0, 1.0, 1.0, 0.0])],
                    },
                    FractionalPoint {
                        point: 2.0,
                        orders: vec![0.0, 1.5],
                        alphas: vec![r(2, 2, &[0.5, 0.0, 0.0, 0.5]), r(2, 2, &[-0.7, 0.2, 0.3, 0.8])],
                    },
                ],
            },
            3 => Self::TwoPointDamped {
                a: 0.0,
                b: 1.5,
                matrix: a2,
                alphas: vec![
                    r(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.2, 0.0, 0.5]),
                    r(4, 2, &[0.1, 0.0, 0.0, 0.1, 0.0, 0.0, 0.3, 0.0]),
                ],
                betas: vec![
                    r(4, 2, &[0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.4, 0.0, 0.0]),
                ],
            },
            4 => Self::TwoPointOscillator {
                a: 0.0,
                b: 1.0,
                matrix: r(2, 2, &[2.0, 0.5, 0.5, 3.0]),
                alphas: vec![
                    r(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
                    r(4, 2, &[0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                ],
                betas: vec![
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0]),
                    r(4, 2, &[0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                    r(4, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0]),
                ],
            },
            5 => Self::GeneralFirstOrder {
                a: 0.0,
                b: 1.0,
                alphas: vec![r(2, 2, &[1.0, 2.0, 0.0, 1.0]), r(2, 2, &[0.5, 0.0, 0.3, 0.0])],
                kernel: vec![r(2, 2, &[1.0, 0.0, 0.0, 1.0]), r(2, 2, &[0.0, 1.0, -1.0, 0.0])],
            },
            other => return Err(Error::invalid(format!("example id must be 1..=5, got {other}"))),
        })
    }

    /// The oscillator problem with `M = O`: `alpha = (0, Y A, 0, Y)`, `beta = (X A, 0, X, 0)`
    /// (`n = 2`). Even `alpha` and odd `beta` vanish, and the remaining terms cancel pairwise.
    pub fn degenerate_oscillator(a: f64, b: f64, matrix: CMatrix, x: CMatrix, y: CMatrix) -> Result<Self> {
        let (l, m) = x.shape();
        expect_shape(&matrix, m, m, "coefficient A")?;
        expect_shape(&y, l, m, "Y")?;
        let z = CMatrix::zeros(l, m);
        Ok(Self::TwoPointOscillator {
            a,
            b,
            alphas: vec![z.clone(), &y * &matrix, z.clone(), y],
            betas: vec![&x * &matrix, z.clone(), x, z],
            matrix,
        })
    }
}

fn two_point_terms(iv: Interval, alphas: &[CMatrix], betas: &[CMatrix]) -> Vec<BoundaryTerm> {
    let mut terms = Vec::with_capacity(2 * alphas.len());
    for (k, (al, be)) in alphas.iter().zip(betas).enumerate() {
        terms.push(BoundaryTerm::Point {
            point: iv.a,
            order: k as f64,
            alpha: al.clone(),
        });
        terms.push(BoundaryTerm::Point {
            point: iv.b,
            order: k as f64,
            alpha: be.clone(),
        });
    }
    terms
}

/// Horizontal concatenation of equal-height blocks.
pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), b.shape()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Closed form for example `id`; errors if `params` describe a different example.
pub fn oracle_characteristic_matrix(id: u8, params: &ExampleParams) -> Result<CMatrix> {
    if params.id() != id {
        return Err(Error::shape("example id", id, params.id()));
    }
    params.oracle_characteristic_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::C64;

    #[test]
    fn defaults_have_consistent_shapes() {
        for id in 1..=5 {
            let p = ExampleParams::default_for(id).unwrap();
            let (m, r, _, l) = p.dimensions().unwrap();
            assert_eq!(p.oracle_characteristic_matrix().unwrap().shape(), (l, r * m));
            p.numeric_problem().unwrap();
        }
        assert!(ExampleParams::default_for(6).is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let ExampleParams::OnePointFirstOrder {
            a,
            b,
            matrix,
            mut alphas,
        } = ExampleParams::default_for(1).unwrap()
        else {
            unreachable!()
        };
        alphas.push(CMatrix::zeros(3, 2));
        let p = ExampleParams::OnePointFirstOrder { a, b, matrix, alphas };
        assert!(matches!(
            p.oracle_characteristic_matrix(),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            oracle_characteristic_matrix(2, &ExampleParams::default_for(1).unwrap()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn interval_independence_and_dependence() {
        for id in [1u8, 2, 5] {
            let p = ExampleParams::default_for(id).unwrap();
            let q = p.with_interval(0.0, 3.7);
            let d = max_abs(&(p.oracle_characteristic_matrix().unwrap() - q.oracle_characteristic_matrix().unwrap()));
            assert!(d <= 1e-12, "example {id}");
        }
        // one-point damped problem
        let ExampleParams::TwoPointDamped {
            a,
            b,
            matrix,
            alphas,
            betas,
        } = ExampleParams::default_for(3).unwrap()
        else {
            unreachable!()
        };
        let zero: Vec<CMatrix> = betas.iter().map(|x| x * C64::new(0.0, 0.0)).collect();
        let p = ExampleParams::TwoPointDamped {
            a,
            b,
            matrix,
            alphas,
            betas: zero,
        };
        let d = max_abs(
            &(p.oracle_characteristic_matrix().unwrap()
                - p.with_interval(0.0, 5.0).oracle_characteristic_matrix().unwrap()),
        );
        assert!(d <= 1e-12);

        let p = ExampleParams::default_for(4).unwrap();
        let d = max_abs(
            &(p.oracle_characteristic_matrix().unwrap()
                - p.with_interval(0.0, 2.0).oracle_characteristic_matrix().unwrap()),
        );
        assert!(d > 1e-6);
    }

    #[test]
    fn degenerate_oscillator_vanishes() {
        let a = real_matrix(2, 2, &[2.0, 0.5, 0.5, 3.0]);
        let x = real_matrix(4, 2, &[1.0, 2.0, 0.0, 1.0, -1.0, 0.5, 0.3, 0.3]);
        let y = real_matrix(4, 2, &[0.0, 1.0, 1.0, 0.0, 0.2, 0.2, -0.5, 1.0]);
        let p = ExampleParams::degenerate_oscillator(0.0, 1.3, a, x, y).unwrap();
        assert!(max_abs(&p.oracle_characteristic_matrix().unwrap()) < 1e-13);
    }

    #[test]
    fn scalar_oscillator_by_hand() {
        // m = 1, A = w^2, B y = y(b): M = (cos(w h), sin(w h) / w)
        let w: f64 = 1.7;
        let h = 0.9;
        let one = real_matrix(1, 1, &[1.0]);
        let zero = real_matrix(1, 1, &[0.0]);
        let p = ExampleParams::TwoPointOscillator {
            a: 0.0,
            b: h,
            matrix: real_matrix(1, 1, &[w * w]),
            alphas: vec![zero.clone(), zero.clone()],
            betas: vec![one, zero],
        };
        let m = p.oracle_characteristic_matrix().unwrap();
        assert!((m[(0, 0)].re - (w * h).cos()).abs() < 1e-14);
        assert!((m[(0, 1)].re - (w * h).sin() / w).abs() < 1e-14);
    }

    #[test]
    fn params_round_trip_json() {
        for id in 1..=5 {
            let p = ExampleParams::default_for(id).unwrap();
            let s = serde_json::to_string(&p).unwrap();
            let q: ExampleParams = serde_json::from_str(&s).unwrap();
            assert_eq!(p, q);
        }
    }
}
