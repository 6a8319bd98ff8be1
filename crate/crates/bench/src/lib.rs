//! Fixed benchmark problems.

use std::sync::Arc;

use fredholm_bvp::{BoundaryOperator, BoundaryTerm, CMatrix, CoefficientFunction, DifferentialSystem, Interval, C64};

/// Deterministic, well-scaled `rows x cols` matrix.
pub fn dense(rows: usize, cols: usize, seed: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| {
        let x = seed + 0.37 * i as f64 + 0.71 * j as f64;
        C64::new(x.sin() * 0.8, (1.3 * x).cos() * 0.3)
    })
}

/// Order-`r` system of dimension `m` on `[0, 1]` with linear coefficients.
pub fn system(m: usize, r: usize) -> Arc<DifferentialSystem> {
    let iv = Interval::new(0.0, 1.0).expect("unit interval");
    let coefficients = (0..r)
        .map(|k| {
            CoefficientFunction::polynomial(
                0.0,
                vec![dense(m, m, k as f64), dense(m, m, 10.0 + k as f64) * C64::new(0.5, 0.0)],
            )
            .expect("polynomial coefficient")
        })
        .collect();
    Arc::new(DifferentialSystem::new(iv, m, r, 1, coefficients).expect("valid system"))
}

/// Square two-point operator, optionally with a Caputo term and an integral term.
pub fn boundary(m: usize, r: usize, fractional: bool) -> BoundaryOperator {
    let l = r * m;
    let mut terms = vec![
        BoundaryTerm::Point {
            point: 0.0,
            order: 0.0,
            alpha: dense(l, m, 1.0),
        },
        BoundaryTerm::Point {
            point: 1.0,
            order: 0.0,
            alpha: dense(l, m, 2.0),
        },
        BoundaryTerm::Point {
            point: 0.5,
            order: 1.0,
            alpha: dense(l, m, 3.0),
        },
    ];
    if fractional {
        terms.push(BoundaryTerm::Point {
            point: 0.8,
            order: 0.5,
            alpha: dense(l, m, 4.0),
        });
        terms.push(BoundaryTerm::Integral {
            kernel: CoefficientFunction::polynomial(0.0, vec![dense(l, m, 5.0), dense(l, m, 6.0)]).expect("kernel"),
            derivative_order: 1,
        });
    }
    BoundaryOperator::new(l, m, r, 1, terms).expect("valid boundary operator")
}
