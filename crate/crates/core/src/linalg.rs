//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::{CMatrix, CVector, C64};

/// Thin SVD with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub singular_values: Vec<f64>,
    /// `rows x k` left singular vectors, `k = min(rows, cols)`.
    pub u: CMatrix,
    /// `cols x k` right singular vectors.
    pub v: CMatrix,
}

impl SortedSvd {
    pub fn new(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Self {
                singular_values: Vec::new(),
                u: CMatrix::zeros(rows, 0),
                v: CMatrix::zeros(cols, 0),
            };
        }
        let svd = m.clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let sigma = svd.singular_values;

        let mut order: Vec<usize> = (0..k).collect();
        // stable sort keeps the decomposition deterministic for ties
        order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

        let mut su = CMatrix::zeros(rows, k);
        let mut sv = CMatrix::zeros(cols, k);
        for (dst, &src) in order.iter().enumerate() {
            su.set_column(dst, &u.column(src));
            let row = v_t.row(src);
            for c in 0..cols {
                sv[(c, dst)] = row[c].conj();
            }
        }
        Self {
            singular_values: order.iter().map(|&i| sigma[i]).collect(),
            u: su,
            v: sv,
        }
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `threshold`.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > threshold).count()
    }

    /// Minimum-norm least-squares solution keeping the leading `rank` singular triplets.
    pub fn solve_min_norm(&self, rhs: &CVector, rank: usize) -> CVector {
        let mut x = CVector::zeros(self.v.nrows());
        for i in 0..rank.min(self.singular_values.len()) {
            let coef = self.u.column(i).dotc(rhs) / C64::new(self.singular_values[i], 0.0);
            x.axpy(coef, &self.v.column(i), C64::new(1.0, 0.0));
        }
        x
    }
}

/// Complete orthonormal basis of the right singular space (`cols x cols`), columns ordered by
/// descending singular value; the trailing `cols - rank` columns span the numerical null space.
pub fn full_right_basis(m: &CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    let padded_rows = rows.max(cols);
    let mut padded = CMatrix::zeros(padded_rows, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    SortedSvd::new(&padded).v
}

/// Complete orthonormal basis of the left singular space (`rows x rows`); trailing columns span
/// the orthogonal complement of the range.
pub fn full_left_basis(m: &CMatrix) -> CMatrix {
    full_right_basis(&m.adjoint())
}

/// Scales `v` by a unit complex number so that its largest-magnitude entry (first one on ties)
/// becomes real and positive.
pub fn normalize_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        *v *= phase;
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn real_matrix(rows: usize, cols: usize, data_row_major: &[f64]) -> CMatrix {
    let d: Vec<C64> = data_row_major.iter().map(|&x| C64::new(x, 0.0)).collect();
    DMatrix::from_row_slice(rows, cols, &d)
}

pub fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m * C64::new(s, 0.0)
}
