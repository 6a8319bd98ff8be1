use super::Differentiable;
use crate::{CMatrix, Error, Result, C64};

/// Matrix-valued function used for ODE coefficients, forcing terms and boundary kernels.
///
/// `Constant` and `Polynomial` have exact derivatives of every order. `Sampled` is a piecewise
/// Lagrange interpolant of degree `order` on a sliding stencil of `order + 1` nodes; its
/// derivatives up to `order - 1` are available (the top derivative is piecewise constant and
/// discontinuous across stencils, so it is withheld).
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFunction {
    Constant(CMatrix),
    /// `sum_j coefficients[j] * (t - origin)^j`
    Polynomial {
        origin: f64,
        coefficients: Vec<CMatrix>,
    },
    Sampled {
        grid: Vec<f64>,
        values: Vec<CMatrix>,
        order: usize,
    },
    /// `sum_i w_i * f_i`
    Sum(Vec<(f64, CoefficientFunction)>),
}

impl CoefficientFunction {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::Constant(CMatrix::zeros(rows, cols))
    }

    pub fn polynomial(origin: f64, coefficients: Vec<CMatrix>) -> Result<Self> {
        let f = Self::Polynomial { origin, coefficients };
        f.validate()?;
        Ok(f)
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<CMatrix>, order: usize) -> Result<Self> {
        let f = Self::Sampled { grid, values, order };
        f.validate()?;
        Ok(f)
    }

    /// `self + weight * other`
    pub fn plus_scaled(&self, weight: f64, other: &CoefficientFunction) -> Self {
        match (self, other) {
            (Self::Constant(x), Self::Constant(y)) => Self::Constant(x + y * C64::new(weight, 0.0)),
            _ => Self::Sum(vec![(1.0, self.clone()), (weight, other.clone())]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(m) => {
                if m.nrows() == 0 || m.ncols() == 0 {
                    return Err(Error::invalid("constant coefficient must be non-empty"));
                }
            }
            Self::Polynomial { coefficients, .. } => {
                let first = coefficients
                    .first()
                    .ok_or_else(|| Error::invalid("polynomial needs at least one coefficient"))?;
                for (j, c) in coefficients.iter().enumerate() {
                    if c.shape() != first.shape() {
                        return Err(Error::shape(
                            format!("polynomial coefficient {j}"),
                            format!("{:?}", first.shape()),
                            format!("{:?}", c.shape()),
                        ));
                    }
                }
            }
            Self::Sampled { grid, values, order } => {
                if *order < 1 {
                    return Err(Error::invalid("sampled interpolation order must be >= 1"));
                }
                if grid.len() != values.len() {
                    return Err(Error::shape("sampled values", grid.len(), values.len()));
                }
                if grid.len() < order + 1 {
                    return Err(Error::invalid(format!(
                        "sampled function of order {order} needs at least {} nodes, got {}",
                        order + 1,
                        grid.len()
                    )));
                }
                if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("sampled grid must be finite and strictly increasing"));
                }
                let s = values[0].shape();
                if let Some(bad) = values.iter().position(|v| v.shape() != s) {
                    return Err(Error::shape(
                        format!("sampled value {bad}"),
                        format!("{s:?}"),
                        format!("{:?}", values[bad].shape()),
                    ));
                }
            }
            Self::Sum(terms) => {
                let (_, first) = terms
                    .first()
                    .ok_or_else(|| Error::invalid("sum needs at least one term"))?;
                first.validate()?;
                for (_, t) in terms {
                    t.validate()?;
                    if t.shape() != first.shape() {
                        return Err(Error::shape(
                            "sum term",
                            format!("{:?}", first.shape()),
                            format!("{:?}", t.shape()),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Domain on which the function can be evaluated (`None` = whole real line).
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Self::Sampled { grid, .. } => Some((grid[0], grid[grid.len() - 1])),
            Self::Sum(terms) => terms
                .iter()
                .filter_map(|(_, f)| f.domain())
                .reduce(|x, y| (x.0.max(y.0), x.1.min(y.1))),
            _ => None,
        }
    }

    fn sampled_derivative(grid: &[f64], values: &[CMatrix], order: usize, t: f64, k: usize) -> Result<CMatrix> {
        let n = grid.len();
        let (lo, hi) = (grid[0], grid[n - 1]);
        let slack = 1e-12 * (hi - lo).max(lo.abs()).max(hi.abs());
        if t.is_nan() || t < lo - slack || t > hi + slack {
            return Err(Error::DomainError { t, a: lo, b: hi });
        }
        let t = t.clamp(lo, hi);
        let cell = grid.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let start = (cell + 1).saturating_sub(order.div_ceil(2)).min(n - 1 - order);
        let nodes = &grid[start..=start + order];
        let center = 0.5 * (nodes[0] + nodes[order]);
        let width = (nodes[order] - nodes[0]).max(f64::MIN_POSITIVE);
        // work in the scaled variable x = (t - center) / width for conditioning
        let xs: Vec<f64> = nodes.iter().map(|&s| (s - center) / width).collect();
        let x = (t - center) / width;

        let (rows, cols) = values[0].shape();
        let mut out = CMatrix::zeros(rows, cols);
        for j in 0..=order {
            // coefficients of prod_{i != j} (x - x_i) / (x_j - x_i), lowest power first
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (i, &xi) in xs.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (p, &c) in poly.iter().enumerate() {
                    next[p + 1] += c;
                    next[p] -= c * xi;
                }
                poly = next;
                denom *= xs[j] - xi;
            }
            let mut w = 0.0;
            for (p, &c) in poly.iter().enumerate().skip(k) {
                let falling: f64 = ((p - k + 1)..=p).map(|v| v as f64).product();
                w += c * falling * x.powi((p - k) as i32);
            }
            w /= denom * width.powi(k as i32);
            out += &values[start + j] * C64::new(w, 0.0);
        }
        Ok(out)
    }
}

impl Differentiable for CoefficientFunction {
    fn shape(&self) -> (usize, usize) {
        match self {
            Self::Constant(m) => m.shape(),
            Self::Polynomial { coefficients, .. } => coefficients[0].shape(),
            Self::Sampled { values, .. } => values[0].shape(),
            Self::Sum(terms) => terms[0].1.shape(),
        }
    }

    fn max_order(&self) -> Option<usize> {
        match self {
            Self::Constant(_) | Self::Polynomial { .. } => None,
            Self::Sampled { order, .. } => Some(order - 1),
            Self::Sum(terms) => terms.iter().filter_map(|(_, f)| f.max_order()).min(),
        }
    }

    fn derivative(&self, t: f64, k: usize) -> Result<CMatrix> {
        self.check_order(k)?;
        match self {
            Self::Constant(m) => Ok(if k == 0 {
                m.clone()
            } else {
                CMatrix::zeros(m.nrows(), m.ncols())
            }),
            Self::Polynomial { origin, coefficients } => {
                let (rows, cols) = coefficients[0].shape();
                let x = t - origin;
                let mut acc = CMatrix::zeros(rows, cols);
                // Horner over the k-th derivative coefficients
                for j in (k..coefficients.len()).rev() {
                    let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
                    acc *= C64::new(x, 0.0);
                    acc += &coefficients[j] * C64::new(falling, 0.0);
                }
                Ok(acc)
            }
            Self::Sampled { grid, values, order } => Self::sampled_derivative(grid, values, *order, t, k),
            Self::Sum(terms) => {
                let (rows, cols) = self.shape();
                let mut acc = CMatrix::zeros(rows, cols);
                for (w, f) in terms {
                    acc += f.derivative(t, k)? * C64::new(*w, 0.0);
                }
                Ok(acc)
            }
        }
    }
}
