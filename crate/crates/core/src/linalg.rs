// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Thin wrappers over the nalgebra Hermitian eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, C64};

/// Eigen-decomposition with eigenvalues ascending and column `k` of
/// `vectors` the matching eigenvector.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// Diagonalizes a Hermitian matrix. Only the lower triangle is read by the
/// solver, so the caller is responsible for Hermiticity.
pub fn eigh(m: &DMatrix<C64>) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(Eigh { values, vectors })
}

/// Rotates `v` so its first entry with modulus above `tol` is real positive.
pub fn fix_phase(v: &mut DVector<C64>, tol: f64) {
    if let Some(a) = v.iter().find(|a| a.norm() > tol).copied() {
        let rot = a.conj() / a.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// `exp(-i τ H)` from an eigen-decomposition of `H`.
pub fn unitary_from_eigh(e: &Eigh, tau: f64) -> DMatrix<C64> {
    let dim = e.values.len();
    let mut scaled = e.vectors.clone();
    for (k, &ev) in e.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, -ev * tau);
        for r in 0..dim {
            scaled[(r, k)] *= ph;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Frobenius norm of `a − a†`.
pub fn hermitian_defect(a: &DMatrix<C64>) -> f64 {
    (a - a.adjoint()).norm()
}

/// Largest entry modulus.
pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `‖[a, b]‖_F`.
pub fn commutator_norm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a * b - b * a).norm()
}
