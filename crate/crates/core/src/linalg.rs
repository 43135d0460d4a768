//! Small dense linear-algebra helpers shared by the spin modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A − A†‖_F`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Returns `(A + A†)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a hermitean matrix with eigenvalues sorted in
/// descending order; column `j` of the returned matrix belongs to value `j`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a hermitean matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// `V diag(f(λ)) V†` for a spectral decomposition `(λ, V)`.
pub fn spectral_function<F>(values: &[f64], vectors: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> C64,
{
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(−i t H)` for hermitean `H`.
pub fn exp_minus_i(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    spectral_function(&values, &vectors, |lambda| (-I * lambda * t).exp())
}

/// `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    frobenius(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Real matrix rank and singular values (descending) with a relative
/// threshold `rel_tol · σ_max`.
pub fn rank_and_singular_values(m: &RMatrix, rel_tol: f64) -> (usize, Vec<f64>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, Vec::new());
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cutoff = rel_tol * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    (rank, sv)
}

/// Pseudo-inverse of a real matrix via SVD, truncating singular values below
/// `rel_tol · σ_max`.
pub fn pseudo_inverse(m: &RMatrix, rel_tol: f64) -> RMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * smax;
    let mut out = RMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (v_t.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// Complex inner product `⟨a|b⟩`.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Reduce an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_descending() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(-1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, vec![2.0, 0.5, -1.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = exp_minus_i(&CMatrix::zeros(3, 3), 1.0);
        assert!(frobenius(&(u - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let p = pseudo_inverse(&m, 1e-10);
        let back = &m * &p * &m;
        assert!((back - m).norm() < 1e-12);
        assert_eq!(rank_and_singular_values(&RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]), 1e-10).0, 1);
    }

    #[test]
    fn wrap_into_half_open_interval() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }
}
