#![allow(dead_code)]

use fredholm_bvp::boundary::{BoundaryOperator, BoundaryTerm};
use fredholm_bvp::ode_core::{CoefficientFunction, DifferentialSystem, Interval};
use fredholm_bvp::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
    })
}

pub fn rand_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-scale..scale), 0.0))
}

/// Constant or linear-in-t coefficients of moderate size.
pub fn random_system(rng: &mut ChaCha8Rng, iv: Interval, m: usize, r: usize, n: usize) -> DifferentialSystem {
    let coefficients = (0..r)
        .map(|_| {
            if rng.random_bool(0.5) {
                CoefficientFunction::Constant(rand_matrix(rng, m, m, 0.8))
            } else {
                CoefficientFunction::polynomial(iv.a, vec![rand_matrix(rng, m, m, 0.8), rand_matrix(rng, m, m, 0.4)])
                    .unwrap()
            }
        })
        .collect();
    DifferentialSystem::new(iv, m, r, n, coefficients).unwrap()
}

/// Point terms at `a`, `b` and an interior point plus, optionally, an integral term. With
/// `rank = Some(rho)` every alpha and kernel is `P Q` with a shared `l x rho` factor `P`, so the
/// characteristic matrix has rank at most `rho`.
#[allow(clippy::too_many_arguments)]
pub fn random_boundary(
    rng: &mut ChaCha8Rng,
    iv: Interval,
    l: usize,
    m: usize,
    r: usize,
    n: usize,
    rank: Option<usize>,
    with_integral: bool,
) -> BoundaryOperator {
    let p = rank.map(|rho| rand_matrix(rng, l, rho, 1.0));
    let alpha = |rng: &mut ChaCha8Rng| match &p {
        Some(p) => p * rand_matrix(rng, p.ncols(), m, 1.0),
        None => rand_matrix(rng, l, m, 1.0),
    };
    let mut terms = Vec::new();
    let mid = iv.a + 0.37 * iv.length();
    for point in [iv.a, mid, iv.b] {
        let order = rng.random_range(0..=(n + r).min(2)) as f64;
        terms.push(BoundaryTerm::Point {
            point,
            order,
            alpha: alpha(rng),
        });
    }
    terms.push(BoundaryTerm::Point {
        point: iv.a,
        order: 0.0,
        alpha: alpha(rng),
    });
    if with_integral {
        let k0 = alpha(rng);
        let k1 = alpha(rng);
        terms.push(BoundaryTerm::Integral {
            kernel: CoefficientFunction::polynomial(iv.a, vec![k0, k1]).unwrap(),
            derivative_order: rng.random_range(0..=r.min(n + r)),
        });
    }
    BoundaryOperator::new(l, m, r, n, terms).unwrap()
}
