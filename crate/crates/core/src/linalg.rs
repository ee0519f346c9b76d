//! Small dense linear-algebra helpers shared by the evaluators.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Frobenius pairing `Σ_ij a_ij b_ij`.
pub fn pairing(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn spectral_norm(a: &Mat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with threshold `rel · σ_max`.
pub fn rank(a: &Mat, rel: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => s.iter().filter(|&&v| v > rel * top).count(),
    }
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &Mat) -> Mat {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Mat::identity(n, n);
    }
    // Pad to a square system so the full right-singular basis is available.
    let mut padded = Mat::zeros(a.nrows().max(n), n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let top = sv.iter().fold(0.0_f64, |m, v| m.max(*v));
    let tol = 1e-10 * top.max(1.0) * (n as f64);
    let cols: Vec<Vector> = (0..vt.nrows())
        .filter(|&i| sv[i] <= tol)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Mat::zeros(n, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Orthonormal rows spanning the orthogonal complement of the row space of `k`.
pub fn complement_rows(k: &Mat, dim: usize) -> Mat {
    if k.nrows() == 0 {
        return Mat::identity(dim, dim);
    }
    null_space(k).transpose()
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv(a: &Mat) -> Mat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Mat::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0_f64, |m, v| m.max(*v));
    let eps = 1e-12 * top.max(1e-300) * (a.nrows().max(a.ncols()) as f64);
    svd.pseudo_inverse(eps).expect("svd computed with u and v")
}

/// Rows `x` with `x · qᵀ = e` of minimal Frobenius norm, for `q` of full row rank.
pub fn min_norm_preimage(e: &Mat, q: &Mat) -> Mat {
    // x = e (q qᵀ)^{-1} q
    let gram = q * q.transpose();
    let inv = pinv(&gram);
    e * inv * q
}

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |v| v.len());
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(a: &Mat) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| a.row(i).iter().copied().collect())
        .collect()
}

pub fn row_vec(a: &Mat, i: usize) -> Vec<f64> {
    a.row(i).iter().copied().collect()
}

pub fn col_vec(a: &Mat, j: usize) -> Vec<f64> {
    a.column(j).iter().copied().collect()
}

/// Append a zero row, the isometric embedding `ℓ^p_m ⊗ X → ℓ^p_{m+1} ⊗ X`.
pub fn pad_rows(a: &Mat, m: usize) -> Mat {
    let mut out = Mat::zeros(m, a.ncols());
    let r = a.nrows().min(m);
    out.view_mut((0, 0), (r, a.ncols()))
        .copy_from(&a.view((0, 0), (r, a.ncols())));
    out
}

pub fn outer(a: &[f64], x: &[f64]) -> Mat {
    Mat::from_fn(a.len(), x.len(), |i, j| a[i] * x[j])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_is_orthogonal_complement() {
        let a = from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let n = null_space(&a);
        assert_eq!(n.ncols(), 1);
        assert!((&a * &n).norm() < 1e-12);
        assert!((n.norm() - 1.0).abs() < 1e-12);
        let c = complement_rows(&from_rows(&[vec![0.0, 1.0]]), 2);
        assert_eq!(c.nrows(), 1);
        assert!((c[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preimage_satisfies_constraint() {
        let q = from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0]]);
        let e = from_rows(&[vec![1.0, 3.0], vec![-2.0, 0.5]]);
        let x = min_norm_preimage(&e, &q);
        assert!((x * q.transpose() - e).norm() < 1e-12);
    }

    #[test]
    fn rank_and_padding() {
        let a = outer(&[1.0, 2.0], &[3.0, 4.0, 5.0]);
        assert_eq!(rank(&a, 1e-10), 1);
        let p = pad_rows(&a, 3);
        assert_eq!(p.nrows(), 3);
        assert_eq!(p.row(2).norm(), 0.0);
    }
}
