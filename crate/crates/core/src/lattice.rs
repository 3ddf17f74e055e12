// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Two-row brick-wall ring and the operators defined on it.
//!
//! Physical coordinates are `(column i, row ν)` with `i ∈ 1..=N_p`,
//! `ν ∈ {1, 2}`, and linear site index `(ν − 1)·N_p + (i − 1)`. Logical
//! qubit `j` sits on row 1 for odd `j` and row 2 for even `j`, with its left
//! end in column `j` and its right end in column `j + 1` (mod `N_p`).

use serde::{Deserialize, Serialize};

use crate::pauli::{OperatorSum, Pauli, PauliString};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub j: f64,
    pub lambda: f64,
}

impl CouplingParams {
    pub fn new(j: f64, lambda: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::Domain(format!("J must be positive, got {j}")));
        }
        if !lambda.is_finite() {
            return Err(Error::Domain("lambda must be finite".into()));
        }
        Ok(CouplingParams { j, lambda })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    np: usize,
}

/// Serializable site map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescription {
    pub n_p: usize,
    pub n_sites: usize,
    pub site_order: String,
    /// `sites[s] = [column, row]`, 1-based.
    pub sites: Vec<[usize; 2]>,
    /// `logical[j-1] = [left site, right site]`.
    pub logical: Vec<[usize; 2]>,
}

impl Lattice {
    /// Builds the ring and checks the stabilizer commutation invariants.
    pub fn new(np: usize) -> Result<Self> {
        if np < 4 || np % 2 != 0 {
            return Err(Error::Domain(format!(
                "N_p must be even and at least 4, got {np} (odd rings need the Moebius boundary, out of scope)"
            )));
        }
        if 2 * np > crate::pauli::MAX_SITES {
            return Err(Error::Resource(format!("N_p = {np} needs more than 64 sites")));
        }
        let lat = Lattice { np };
        lat.validate()?;
        Ok(lat)
    }

    fn validate(&self) -> Result<()> {
        let ws = self.plaquette_stabilizers();
        let h = self.hamiltonian(1.0, 1.0);
        for (a, w) in ws.iter().enumerate() {
            if !h.commutes_termwise(w)? {
                return Err(Error::Convention(format!("W_{} does not commute with H0", a + 1)));
            }
            for v in &ws[a + 1..] {
                if !w.commutes(v)? {
                    return Err(Error::Convention("plaquette stabilizers do not commute".into()));
                }
            }
        }
        Ok(())
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn n_sites(&self) -> usize {
        2 * self.np
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites()
    }

    /// 1-based ring index.
    pub fn wrap(&self, k: isize) -> usize {
        (k - 1).rem_euclid(self.np as isize) as usize + 1
    }

    pub fn site(&self, column: usize, row: usize) -> usize {
        assert!((1..=self.np).contains(&column) && (1..=2).contains(&row));
        (row - 1) * self.np + (column - 1)
    }

    /// `(column, row)` of a linear site index.
    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s % self.np + 1, s / self.np + 1)
    }

    pub fn row_of(&self, j: usize) -> usize {
        if j % 2 == 1 {
            1
        } else {
            2
        }
    }

    /// Site of `(j, end)`; `j` is wrapped onto the ring.
    pub fn logical_site(&self, j: isize, end: End) -> usize {
        let j = self.wrap(j);
        let column = match end {
            End::L => j,
            End::R => self.wrap(j as isize + 1),
        };
        self.site(column, self.row_of(j))
    }

    /// `(logical j, end)` owning a site.
    pub fn owner(&self, s: usize) -> (usize, End) {
        (1..=self.np)
            .flat_map(|j| [(j, End::L), (j, End::R)])
            .find(|&(j, e)| self.logical_site(j as isize, e) == s)
            .expect("every site belongs to a logical qubit")
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if !(1..=self.np).contains(&j) {
            return Err(Error::Domain(format!("logical index {j} outside 1..={}", self.np)));
        }
        Ok(())
    }

    fn string(&self, sites: &[(usize, Pauli)]) -> PauliString {
        PauliString::from_sites(self.n_sites(), sites)
    }

    /// `−J Σ_j Z_{j,l} Z_{j,r}`.
    pub fn hamiltonian_static(&self, j_coupling: f64) -> OperatorSum {
        let mut h = OperatorSum::zero(self.n_sites());
        for j in 1..=self.np {
            let p = self.string(&[
                (self.logical_site(j as isize, End::L), Pauli::Z),
                (self.logical_site(j as isize, End::R), Pauli::Z),
            ]);
            h.push_real(-j_coupling, p).expect("same site count");
        }
        h
    }

    /// `−Σ_j (X_{j,l} X_{j−2,r} + Y_{j,l} Y_{j−1,r})`.
    pub fn hamiltonian_drive(&self) -> OperatorSum {
        let mut v = OperatorSum::zero(self.n_sites());
        for j in 1..=self.np as isize {
            let l = self.logical_site(j, End::L);
            let xx = self.string(&[(l, Pauli::X), (self.logical_site(j - 2, End::R), Pauli::X)]);
            let yy = self.string(&[(l, Pauli::Y), (self.logical_site(j - 1, End::R), Pauli::Y)]);
            v.push_real(-1.0, xx).expect("same site count");
            v.push_real(-1.0, yy).expect("same site count");
        }
        v
    }

    /// `H_s + λ V`, merged.
    pub fn hamiltonian(&self, j_coupling: f64, lambda: f64) -> OperatorSum {
        self.hamiltonian_static(j_coupling)
            .plus(&self.hamiltonian_drive().scaled(C64::new(lambda, 0.0)))
            .expect("same site count")
            .normalized()
    }

    /// `W_j = X_{j,l} X_{j,r} Z_{j−1,r} Z_{j+1,l}`.
    pub fn plaquette_stabilizer(&self, j: usize) -> Result<PauliString> {
        self.check_j(j)?;
        let j = j as isize;
        Ok(self.string(&[
            (self.logical_site(j, End::L), Pauli::X),
            (self.logical_site(j, End::R), Pauli::X),
            (self.logical_site(j - 1, End::R), Pauli::Z),
            (self.logical_site(j + 1, End::L), Pauli::Z),
        ]))
    }

    pub fn plaquette_stabilizers(&self) -> Vec<PauliString> {
        (1..=self.np)
            .map(|j| self.plaquette_stabilizer(j).expect("in range"))
            .collect()
    }

    /// `K_j = Z_{j,l} Z_{j,r}`.
    pub fn bond_stabilizer(&self, j: usize) -> Result<PauliString> {
        self.check_j(j)?;
        let j = j as isize;
        Ok(self.string(&[
            (self.logical_site(j, End::L), Pauli::Z),
            (self.logical_site(j, End::R), Pauli::Z),
        ]))
    }

    pub fn bond_stabilizers(&self) -> Vec<PauliString> {
        (1..=self.np)
            .map(|j| self.bond_stabilizer(j).expect("in range"))
            .collect()
    }

    /// Logical `(X_j, Z_j)`: `X⊗X` on both ends and `Z` on the left end.
    pub fn logical_ops(&self, j: usize) -> Result<(PauliString, PauliString)> {
        self.check_j(j)?;
        let j = j as isize;
        let (l, r) = (self.logical_site(j, End::L), self.logical_site(j, End::R));
        Ok((
            self.string(&[(l, Pauli::X), (r, Pauli::X)]),
            self.string(&[(l, Pauli::Z)]),
        ))
    }

    /// `Z` on every site.
    pub fn global_parity(&self) -> PauliString {
        let sites: Vec<_> = (0..self.n_sites()).map(|s| (s, Pauli::Z)).collect();
        self.string(&sites)
    }

    pub fn description(&self) -> LatticeDescription {
        LatticeDescription {
            n_p: self.np,
            n_sites: self.n_sites(),
            site_order: "row 1 columns 1..N_p, then row 2 columns 1..N_p; site 0 is the most significant basis bit".into(),
            sites: (0..self.n_sites())
                .map(|s| {
                    let (i, nu) = self.coords(s);
                    [i, nu]
                })
                .collect(),
            logical: (1..=self.np as isize)
                .map(|j| [self.logical_site(j, End::L), self.logical_site(j, End::R)])
                .collect(),
        }
    }
}
