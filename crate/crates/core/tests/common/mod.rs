//! Reference computations that avoid the library's rotation and map code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

/// `(Sx, Sy, Sz)` from the ladder elements, basis index 0 is `m = s`.
pub fn spin_matrices(two_s: u32) -> [DMatrix<C>; 3] {
    let d = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let m = |j: usize| s - j as f64;
    let mut up = DMatrix::<C>::zeros(d, d);
    let mut sz = DMatrix::<C>::zeros(d, d);
    for j in 0..d {
        sz[(j, j)] = C::new(m(j), 0.0);
        if j > 0 {
            up[(j - 1, j)] = C::new((s * (s + 1.0) - m(j) * (m(j) + 1.0)).sqrt(), 0.0);
        }
    }
    let down = up.adjoint();
    let sx = (&up + &down) * C::new(0.5, 0.0);
    let sy = (&up - &down) * C::new(0.0, -0.5);
    [sx, sy, sz]
}

pub fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Eigenvectors of `n·S`, column `j` for eigenvalue `s − j`.
pub fn axis_eigenbasis(two_s: u32, n: [f64; 3]) -> DMatrix<C> {
    let [sx, sy, sz] = spin_matrices(two_s);
    let op = sx * C::new(n[0], 0.0) + sy * C::new(n[1], 0.0) + sz * C::new(n[2], 0.0);
    let eig = op.symmetric_eigen();
    let d = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let mut basis = DMatrix::<C>::zeros(d, d);
    for (col, &value) in eig.eigenvalues.iter().enumerate() {
        let j = (s - value).round() as usize;
        basis.set_column(j, &eig.eigenvectors.column(col));
    }
    basis
}

/// `p_m = ⟨v_m|ρ|v_m⟩` along `n`.
pub fn probabilities(rho: &DMatrix<C>, two_s: u32, n: [f64; 3]) -> Vec<f64> {
    let v = axis_eigenbasis(two_s, n);
    (0..v.ncols()).map(|j| (v.column(j).adjoint() * rho * v.column(j))[(0, 0)].re).collect()
}

pub fn pure_probabilities(psi: &DVector<C>, two_s: u32, n: [f64; 3]) -> Vec<f64> {
    let v = axis_eigenbasis(two_s, n);
    (0..v.ncols()).map(|j| (v.column(j).adjoint() * psi)[(0, 0)].norm_sqr()).collect()
}

/// Real coordinates of `d×d` hermitean matrices: diagonal entries, then
/// `E_jk + E_kj` and `i(E_jk − E_kj)` for `j < k`.
pub fn hermitean_basis(d: usize) -> Vec<DMatrix<C>> {
    let mut out = Vec::new();
    for j in 0..d {
        let mut m = DMatrix::zeros(d, d);
        m[(j, j)] = C::new(1.0, 0.0);
        out.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut re = DMatrix::zeros(d, d);
            re[(j, k)] = C::new(1.0, 0.0);
            re[(k, j)] = C::new(1.0, 0.0);
            let mut im = DMatrix::zeros(d, d);
            im[(j, k)] = C::new(0.0, 1.0);
            im[(k, j)] = C::new(0.0, -1.0);
            out.push(re);
            out.push(im);
        }
    }
    out
}

/// SVD rank of the linear map from hermitean matrices to the outcome
/// probabilities on the given axes.
pub fn map_rank(two_s: u32, axes: &[[f64; 3]]) -> usize {
    let d = two_s as usize + 1;
    let basis = hermitean_basis(d);
    let mut a = DMatrix::<f64>::zeros(axes.len() * d, basis.len());
    for (k, n) in axes.iter().enumerate() {
        let v = axis_eigenbasis(two_s, *n);
        for (col, x) in basis.iter().enumerate() {
            for j in 0..d {
                a[(k * d + j, col)] = (v.column(j).adjoint() * x * v.column(j))[(0, 0)].re;
            }
        }
    }
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&x| x > 1e-10 * max).count()
}

pub fn frobenius(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &DMatrix<C>) -> C {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn fidelity(a: &DVector<C>, b: &DVector<C>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

/// `exp(−iHt)` from the eigen-decomposition of `H`.
pub fn propagator(h: &DMatrix<C>, t: f64) -> DMatrix<C> {
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C::new((e * t).cos(), -(e * t).sin())));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
