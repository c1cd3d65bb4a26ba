//! Fixed-size complex matrices for one and two qubits.
//!
//! Basis order for two qubits is |HH⟩, |HV⟩, |VH⟩, |VV⟩ with qubit A as the
//! slow index, so `kron(a, b)` places `a` on the outer blocks. |H⟩ is the +1
//! eigenvector of σ_z and `Y|H⟩ = i|V⟩`.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec2 = Vector2<C64>;
pub type Vec4 = Vector4<C64>;

/// Absolute tolerance for Hermiticity and positivity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrix σ_k for k = 0 (identity), 1 (X), 2 (Y), 3 (Z).
pub fn pauli(k: usize) -> Mat2 {
    match k {
        0 => Mat2::identity(),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range 0..=3"),
    }
}

/// Kronecker product with `a` as the slow (qubit A) factor.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

pub fn kron_vec(a: &Vec2, b: &Vec2) -> Vec4 {
    Vec4::from_fn(|r, _| a[r / 2] * b[r % 2])
}

/// Real part of the trace of `a * b`, without forming the product.
pub fn trace_product4(a: &Mat4, b: &Mat4) -> f64 {
    let mut acc = ZERO;
    for i in 0..4 {
        for k in 0..4 {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

pub fn trace_product2(a: &Mat2, b: &Mat2) -> f64 {
    let mut acc = ZERO;
    for i in 0..2 {
        for k in 0..2 {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff<const N: usize>(
    a: &nalgebra::SMatrix<C64, N, N>,
    b: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix of dimension 2 or 4, ascending.
pub fn eigenvalues_hermitian(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() || !(n == 2 || n == 4) {
        return Err(Error::Dimension(n.max(m.ncols())));
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = hermitize_dyn(m);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub(crate) fn eigenvalues4(m: &Mat4) -> [f64; 4] {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut vals = [0.0; 4];
    for (slot, v) in vals.iter_mut().zip(sym.symmetric_eigenvalues().iter()) {
        *slot = *v;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

pub(crate) fn eigenvalues2(m: &Mat2) -> [f64; 2] {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut vals = [0.0; 2];
    for (slot, v) in vals.iter_mut().zip(sym.symmetric_eigenvalues().iter()) {
        *slot = *v;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

/// Ascending eigenvalues of a real symmetric 3×3 matrix.
pub fn eigenvalues_sym3(m: &Matrix3<f64>) -> [f64; 3] {
    let sym = (m + m.transpose()) * 0.5;
    let mut vals = [0.0; 3];
    for (slot, v) in vals.iter_mut().zip(sym.symmetric_eigenvalues().iter()) {
        *slot = *v;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

fn hermitize_dyn(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Projects a Hermitian-ish 4×4 matrix onto the set of density matrices:
/// symmetrize, clip negative eigenvalues to zero, renormalize the trace.
pub(crate) fn project_to_density(m: &Mat4) -> Mat4 {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut out = Mat4::zeros();
    for (k, lam) in clipped.iter().enumerate() {
        if *lam == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * c(lam / total, 0.0);
    }
    (out + out.adjoint()) * c(0.5, 0.0)
}

/// Unitarity defect ‖UU† − I‖_max.
pub fn unitarity_defect(u: &Mat4) -> f64 {
    max_abs_diff(&(u * u.adjoint()), &Mat4::identity())
}
