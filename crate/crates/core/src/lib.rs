// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Counterdiabatic preparation of cluster states on the two-row Kitaev
//! honeycomb chain.
//!
//! The crate is organised bottom up:
//!
//! * [`pauli`] holds Pauli strings, weighted sums of them and their action on
//!   state vectors.
//! * [`lattice`] is the brick-wall geometry together with the model
//!   Hamiltonian and its stabilizers.
//! * [`fermion`] has the momentum-space formulas and the Jordan-Wigner
//!   Majorana strings.
//! * [`cd`] builds counterdiabatic terms (spectral, two-level and real-space).
//! * [`spectra`] and [`dynamics`] do exact diagonalization and time evolution.
//!
//! ```
//! use cdcluster::lattice::Lattice;
//!
//! let lat = Lattice::new(4).unwrap();
//! let h0 = lat.hamiltonian(1.0, 0.25);
//! assert_eq!(h0.len(), 12);
//! ```

pub mod cd;
pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod lattice;
pub mod linalg;
pub mod par;
pub mod pauli;
pub mod sector;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
