use statrs::function::gamma::gamma;

use crate::ode_core::{Differentiable, Interval};
use crate::quadrature::integrate_adaptive;
use crate::{CMatrix, Error, Result, C64};

/// Caputo derivative of order `beta >= 0` at `t`, with lower terminal `interval.a`:
///
/// `D^beta y(t) = 1 / Gamma(q - beta) int_a^t (t - s)^(q - 1 - beta) y^(q)(s) ds`, `q = ceil(beta)`.
///
/// With `nu = q - beta` the substitution `t - s = w^(1/nu)` removes the weak singularity, leaving
/// `1 / Gamma(nu + 1) int_0^((t-a)^nu) y^(q)(t - w^(1/nu)) dw`, which is smooth and integrated by
/// adaptive Gauss–Legendre. Integer orders are classical derivatives. The value at `t = a` is 0.
pub fn caputo_derivative(
    y: &dyn Differentiable,
    beta: f64,
    t: f64,
    interval: Interval,
    quad_tol: f64,
) -> Result<CMatrix> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!(
            "Caputo order must be finite and >= 0, got {beta}"
        )));
    }
    let t = interval.clamp_checked(t)?;
    if beta.fract() == 0.0 {
        return y.derivative(t, beta as usize);
    }
    let q = beta.ceil() as usize;
    y.check_order(q)?;
    let (rows, cols) = y.shape();
    if t == interval.a {
        return Ok(CMatrix::zeros(rows, cols));
    }
    let nu = q as f64 - beta;
    let a = interval.a;
    let upper = (t - a).powf(nu);
    let integral = integrate_adaptive(|w| y.derivative((t - w.powf(1.0 / nu)).max(a), q), 0.0, upper, quad_tol)?;
    Ok(integral / C64::new(gamma(nu + 1.0), 0.0))
}
