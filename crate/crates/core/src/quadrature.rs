//! Gauss–Legendre rules and adaptive composite integration of matrix-valued integrands.

use std::sync::OnceLock;

use crate::{CMatrix, Result, C64};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Number of nodes; the rule integrates polynomials of degree `2n - 1` exactly.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Default 32-point panel rule.
pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// 16-point rule used by the fixed composite norms.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

const MAX_DEPTH: usize = 40;

fn panel<F>(f: &mut F, lo: f64, hi: f64) -> Result<CMatrix>
where
    F: FnMut(f64) -> Result<CMatrix>,
{
    let mut acc: Option<CMatrix> = None;
    for (x, w) in gl32().mapped(lo, hi) {
        let v = f(x)? * C64::new(w, 0.0);
        match acc.as_mut() {
            Some(a) => *a += v,
            None => acc = Some(v),
        }
    }
    Ok(acc.expect("rule has nodes"))
}

/// Adaptive composite 32-point Gauss–Legendre integration of a matrix-valued integrand.
///
/// A panel is accepted when its estimate agrees with the sum over its two halves to within
/// `tol * max(1, |I|)` in max-norm. Panels are processed left to right so the summation order is
/// fixed for a given integrand.
pub fn integrate_adaptive<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<CMatrix>
where
    F: FnMut(f64) -> Result<CMatrix>,
{
    if hi == lo {
        let probe = f(lo)?;
        return Ok(CMatrix::zeros(probe.nrows(), probe.ncols()));
    }
    let whole = panel(&mut f, lo, hi)?;
    let mut total = CMatrix::zeros(whole.nrows(), whole.ncols());
    // explicit stack, right half pushed first so panels finish left to right
    let mut stack = vec![(lo, hi, whole, 0usize)];
    while let Some((a, b, estimate, depth)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let left = panel(&mut f, a, mid)?;
        let right = panel(&mut f, mid, b)?;
        let refined = &left + &right;
        let diff = crate::linalg::max_abs(&(&refined - &estimate));
        let scale = crate::linalg::max_abs(&refined).max(1.0);
        if diff <= tol * scale || depth >= MAX_DEPTH || (b - a) <= f64::EPSILON * hi.abs().max(1.0) {
            total += refined;
        } else {
            stack.push((mid, b, right, depth + 1));
            stack.push((a, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// Scalar convenience wrapper around [`integrate_adaptive`].
pub fn integrate_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    let m = integrate_adaptive(|x| Ok(CMatrix::from_element(1, 1, f(x)?)), lo, hi, tol)?;
    Ok(m[(0, 0)])
}
