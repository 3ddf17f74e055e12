// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kronecker-product reference matrices, independent of the bitmask kernels.

#![allow(dead_code)]

use cdcluster::pauli::{OperatorSum, Pauli, PauliString};
use cdcluster::C64;
use nalgebra::DMatrix;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn single(letter: Pauli) -> DMatrix<C64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match letter {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Site 0 is the leftmost factor.
pub fn kron_letters(letters: &[Pauli]) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for &l in letters {
        m = m.kronecker(&single(l));
    }
    m
}

pub fn kron_string(p: &PauliString) -> DMatrix<C64> {
    kron_letters(&p.letters()) * p.phase().to_complex()
}

pub fn kron_sum(op: &OperatorSum) -> DMatrix<C64> {
    let dim = 1usize << op.n_sites();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (coef, p) in op.terms() {
        m += kron_string(p) * *coef;
    }
    m
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn letter_of(k: u8) -> Pauli {
    match k % 4 {
        0 => Pauli::I,
        1 => Pauli::X,
        2 => Pauli::Y,
        _ => Pauli::Z,
    }
}
