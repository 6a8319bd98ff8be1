//! Matrix functions used as closed-form oracles: exponential, `phi`, the cos/sinc pair and
//! Hermite (Lagrange–Sylvester) interpolation on the spectrum.

pub mod closed_form;

use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::linalg::identity;
use crate::{CMatrix, Error, Result, C64};

/// How a [`MatrixFunctionResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    EigenDecomposition,
    HermiteInterpolation,
    PowerSeries,
    ScalingSquaring,
}

#[derive(Debug, Clone)]
pub struct MatrixFunctionResult {
    pub value: CMatrix,
    pub method: Method,
    /// Estimated amplification of rounding errors relative to the size of the result.
    pub condition_estimate: f64,
    /// Number of Newton coefficients of the interpolating polynomial (at most `m`).
    pub coefficient_count: usize,
    /// Set when interpolation was abandoned for the series fallback.
    pub fallback: bool,
}

/// Relative eigenvalue gap below which eigenvalues are merged into one multiple eigenvalue.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Condition estimate above which interpolation is treated as unreliable.
pub const CONDITION_LIMIT: f64 = 1e8;

fn one_norm(x: &CMatrix) -> f64 {
    x.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Smallest `j` with `norm / 2^j <= limit`.
fn halvings(norm: f64, limit: f64) -> u32 {
    if norm <= limit {
        0
    } else {
        (norm / limit).log2().ceil() as u32
    }
}

/// `sum_k x^k / (k + shift)!`-style series with per-term divisors from `divisor(k)`.
fn taylor<F: Fn(usize) -> f64>(x: &CMatrix, divisor: F) -> CMatrix {
    let n = x.nrows();
    let mut term = identity(n);
    let mut sum = &term / real(divisor(0));
    for k in 1..200 {
        term = &term * x / real(divisor(k));
        let tn = one_norm(&term);
        sum += &term;
        if tn <= 1e-17 * one_norm(&sum).max(1e-300) {
            break;
        }
    }
    sum
}

fn check_square(a: &CMatrix, context: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::shape(
            context,
            format!("square ({0}, {0})", a.nrows()),
            format!("({}, {})", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

/// `exp(s A)` by Taylor scaling and squaring.
pub fn matrix_exponential(a: &CMatrix, s: f64) -> CMatrix {
    let x = a * real(s);
    let j = halvings(one_norm(&x), 0.5);
    let y = x / real(2f64.powi(j as i32));
    let mut e = taylor(&y, |k| k.max(1) as f64);
    for _ in 0..j {
        e = &e * &e;
    }
    e
}

/// `phi(A, t) = (I - exp(-A (t - a))) A^{-1}`, entire in `A`; computed as
/// `(t - a) psi(-A (t - a))` with `psi(X) = sum_k X^k / (k + 1)!`.
pub fn phi_function(a: &CMatrix, t: f64, origin: f64) -> CMatrix {
    let h = t - origin;
    let n = a.nrows();
    if h == 0.0 {
        return CMatrix::zeros(n, n);
    }
    let x = a * real(-h);
    let j = halvings(one_norm(&x), 0.5);
    let y = x / real(2f64.powi(j as i32));
    let mut psi = taylor(&y, |k| (k + 1) as f64);
    let mut e = identity(n) + &y * &psi;
    for _ in 0..j {
        psi = &psi * (&e + identity(n)) * real(0.5);
        e = &e * &e;
    }
    psi * real(h)
}

/// `(cos(sqrt(A) s), sin(sqrt(A) s) / sqrt(A))` from their even power series, no square root taken.
pub fn sqrt_trig(a: &CMatrix, s: f64) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let j = halvings(one_norm(a) * s * s, 0.25).div_ceil(2);
    let sr = s / 2f64.powi(j as i32);
    let x = a * real(-sr * sr);
    // sum (-1)^k X^k / (2k)! and sum (-1)^k X^k / (2k+1)!
    let mut c = taylor(&x, |k| if k == 0 { 1.0 } else { ((2 * k - 1) * (2 * k)) as f64 });
    let mut sn = taylor(&x, |k| if k == 0 { 1.0 } else { ((2 * k) * (2 * k + 1)) as f64 }) * real(sr);
    for _ in 0..j {
        let c2 = &c * &c * real(2.0) - identity(n);
        sn = &sn * &c * real(2.0);
        c = c2;
    }
    (c, sn)
}

/// Eigenvalues grouped into clusters `(center, multiplicity)`, deterministically ordered.
fn clustered_spectrum(a: &CMatrix) -> Result<Vec<(C64, usize)>> {
    let eig = Schur::new(a.clone()).eigenvalues().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let mut eig: Vec<C64> = eig.iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in eig {
        let found = clusters.iter_mut().find(|c| {
            let center = c.iter().sum::<C64>() / real(c.len() as f64);
            (z - center).norm() < CLUSTER_GAP * z.norm().max(center.norm()).max(1.0)
        });
        match found {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|c| (c.iter().sum::<C64>() / real(c.len() as f64), c.len()))
        .collect())
}

/// `f(A)` as the Hermite interpolation polynomial of `f` on the spectrum of `A` (degree at most
/// `m - 1`). `f(z, k)` must return the `k`-th derivative of `f` at `z`.
///
/// If the divided differences cancel badly, the value is recomputed from the Taylor series of
/// `f` about the mean eigenvalue and `fallback` is set.
pub fn lagrange_sylvester<F>(f: F, a: &CMatrix) -> Result<MatrixFunctionResult>
where
    F: Fn(C64, usize) -> C64,
{
    let res = hermite_interpolation(&f, a)?;
    if res.condition_estimate <= CONDITION_LIMIT {
        return Ok(res);
    }
    let value = series_about_mean(&f, a);
    Ok(MatrixFunctionResult {
        value,
        method: Method::PowerSeries,
        condition_estimate: res.condition_estimate,
        coefficient_count: res.coefficient_count,
        fallback: true,
    })
}

/// [`lagrange_sylvester`] without the fallback: ill-conditioned spectra are an error.
pub fn lagrange_sylvester_strict<F>(f: F, a: &CMatrix) -> Result<MatrixFunctionResult>
where
    F: Fn(C64, usize) -> C64,
{
    let res = hermite_interpolation(&f, a)?;
    if res.condition_estimate > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition: res.condition_estimate,
        });
    }
    Ok(res)
}

fn hermite_interpolation<F>(f: &F, a: &CMatrix) -> Result<MatrixFunctionResult>
where
    F: Fn(C64, usize) -> C64,
{
    check_square(a, "lagrange_sylvester argument")?;
    let m = a.nrows();
    let spectrum = clustered_spectrum(a)?;
    let nodes: Vec<C64> = spectrum
        .iter()
        .flat_map(|&(z, mult)| std::iter::repeat_n(z, mult))
        .collect();

    // confluent Newton divided differences
    let mut dd: Vec<C64> = nodes.iter().map(|&z| f(z, 0)).collect();
    let mut factorial = 1.0;
    for k in 1..m {
        factorial *= k as f64;
        for i in (k..m).rev() {
            dd[i] = if nodes[i] == nodes[i - k] {
                f(nodes[i], k) / real(factorial)
            } else {
                (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - k])
            };
        }
    }

    // rounding in a divided difference of level k grows like |f| / gap^k; weight it by the
    // Newton basis term it multiplies
    let f_scale = nodes.iter().map(|&z| f(z, 0).norm()).fold(0.0, f64::max);
    let mut gap = f64::INFINITY;
    for (i, &(zi, _)) in spectrum.iter().enumerate() {
        for &(zj, _) in &spectrum[i + 1..] {
            gap = gap.min((zi - zj).norm());
        }
    }
    let distinct_levels = spectrum.len() - 1;

    let mut value = CMatrix::zeros(m, m);
    let mut basis = identity(m);
    let mut amplification = 0.0;
    for (k, c) in dd.iter().enumerate() {
        let bn = one_norm(&basis);
        let levels = k.min(distinct_levels) as i32;
        amplification += bn * f_scale.max(c.norm()) / if levels == 0 { 1.0 } else { gap.powi(levels) };
        value += &basis * *c;
        if k + 1 < m {
            basis = &basis * (a - identity(m) * nodes[k]);
        }
    }
    let condition = amplification / one_norm(&value).max(f64::MIN_POSITIVE);
    Ok(MatrixFunctionResult {
        value,
        method: Method::HermiteInterpolation,
        condition_estimate: if condition.is_finite() { condition } else { f64::MAX },
        coefficient_count: dd.len(),
        fallback: false,
    })
}

fn series_about_mean<F>(f: &F, a: &CMatrix) -> CMatrix
where
    F: Fn(C64, usize) -> C64,
{
    let m = a.nrows();
    let mu = a.trace() / real(m as f64);
    let d = a - identity(m) * mu;
    let mut power = identity(m);
    let mut value = CMatrix::zeros(m, m);
    let mut factorial = 1.0;
    for k in 0..120 {
        if k > 0 {
            factorial *= k as f64;
            power = &power * &d;
        }
        let term = &power * (f(mu, k) / real(factorial));
        let tn = one_norm(&term);
        value += term;
        if k > m && tn <= 1e-17 * one_norm(&value).max(1e-300) {
            break;
        }
    }
    value
}

/// Integer power of a square matrix.
pub fn matrix_power(a: &CMatrix, k: usize) -> CMatrix {
    let mut out = identity(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}
