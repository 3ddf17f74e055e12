// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Joint eigenspaces of commuting Pauli strings.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::pauli::{OperatorSum, PauliString, StateVector};
use crate::{Error, Result, C64};

/// Rank threshold for accepting a projected vector.
const RANK_TOL: f64 = 1e-8;

/// Target sign of every plaquette operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub w: Vec<i8>,
}

impl SectorSpec {
    pub fn new(w: Vec<i8>) -> Result<Self> {
        if w.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("sector signs must be +1 or -1".into()));
        }
        Ok(SectorSpec { w })
    }

    pub fn vortex_free(np: usize) -> Self {
        SectorSpec { w: vec![1; np] }
    }

    /// All `2^{N_p}` patterns; bit `j` of the index set means `w_{j+1} = −1`.
    pub fn all(np: usize) -> Vec<SectorSpec> {
        (0..1u32 << np)
            .map(|m| SectorSpec {
                w: (0..np).map(|j| if m >> j & 1 == 1 { -1 } else { 1 }).collect(),
            })
            .collect()
    }

    pub fn is_vortex_free(&self) -> bool {
        self.w.iter().all(|&s| s == 1)
    }
}

/// Dimension of the joint eigenspace, from the trace of the projector
/// product: only subsets whose string product is a multiple of the identity
/// contribute.
pub fn joint_dimension(n_sites: usize, gens: &[(PauliString, i8)]) -> usize {
    let k = gens.len();
    assert!(k < 32, "too many generators");
    let mut trace = C64::new(0.0, 0.0);
    for mask in 0u32..1 << k {
        let mut p = PauliString::identity(n_sites);
        let mut sign = 1.0;
        for (b, (g, s)) in gens.iter().enumerate() {
            if mask >> b & 1 == 1 {
                p = p.mul(g).expect("same size");
                sign *= *s as f64;
            }
        }
        if p.is_identity() {
            trace += p.phase().to_complex() * sign;
        }
    }
    let dim = trace.re * (1u64 << n_sites) as f64 / (1u64 << k) as f64;
    dim.round() as usize
}

/// Orthonormal basis of `{v : g v = s v for all (g, s)}` by sequential
/// projection of computational basis states and Gram-Schmidt.
pub fn stabilizer_basis(n_sites: usize, gens: &[(PauliString, i8)]) -> Vec<StateVector> {
    let target = joint_dimension(n_sites, gens);
    let projectors: Vec<OperatorSum> = gens
        .iter()
        .map(|(g, s)| {
            let mut p = OperatorSum::identity(n_sites).scaled_real(0.5);
            p.push_real(0.5 * *s as f64, g.clone()).expect("same size");
            p
        })
        .collect();
    let dim = 1usize << n_sites;
    let mut basis: Vec<StateVector> = Vec::with_capacity(target);
    for b in 0..dim {
        if basis.len() == target {
            break;
        }
        let mut v = StateVector::basis(n_sites, b);
        for p in &projectors {
            v = p.apply(&v).expect("same size");
        }
        if v.norm() < RANK_TOL {
            continue;
        }
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for u in &basis {
                let ov = u.inner(&v).expect("same size");
                for (x, y) in v.amplitudes_mut().iter_mut().zip(u.amplitudes()) {
                    *x -= ov * y;
                }
            }
        }
        let n = v.norm();
        if n < RANK_TOL {
            continue;
        }
        let mut v = v.normalized();
        v.fix_phase(1e-12);
        basis.push(v);
    }
    basis
}

/// Simultaneous eigenbasis of all `W_j` with the requested signs.
pub fn sector_basis(lat: &Lattice, spec: &SectorSpec) -> Result<Vec<StateVector>> {
    if spec.w.len() != lat.np() {
        return Err(Error::Shape(format!(
            "{} signs for {} plaquettes",
            spec.w.len(),
            lat.np()
        )));
    }
    let gens: Vec<(PauliString, i8)> = lat.plaquette_stabilizers().into_iter().zip(spec.w.iter().copied()).collect();
    Ok(stabilizer_basis(lat.n_sites(), &gens))
}

/// Block decomposition of the Hilbert space along a set of commuting strings.
#[derive(Clone, Debug)]
pub struct SectorFrame {
    n_sites: usize,
    pub specs: Vec<SectorSpec>,
    /// Columns of `blocks[k]` span sector `k`.
    pub blocks: Vec<DMatrix<C64>>,
    /// Strings every generator must commute with for the frame to apply.
    pub generators: Vec<PauliString>,
}

fn basis_matrix(vs: &[StateVector], dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(dim, vs.len());
    for (c, v) in vs.iter().enumerate() {
        m.set_column(c, &DVector::from_column_slice(v.amplitudes()));
    }
    m
}

impl SectorFrame {
    /// One block per plaquette sign pattern (empty ones dropped).
    pub fn plaquettes(lat: &Lattice) -> Result<Self> {
        let mut specs = Vec::new();
        let mut blocks = Vec::new();
        for spec in SectorSpec::all(lat.np()) {
            let vs = sector_basis(lat, &spec)?;
            if vs.is_empty() {
                continue;
            }
            blocks.push(basis_matrix(&vs, lat.dim()));
            specs.push(spec);
        }
        Ok(SectorFrame {
            n_sites: lat.n_sites(),
            specs,
            blocks,
            generators: lat.plaquette_stabilizers(),
        })
    }

    /// Whole space as one block.
    pub fn trivial(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        SectorFrame {
            n_sites,
            specs: vec![],
            blocks: vec![DMatrix::identity(dim, dim)],
            generators: vec![],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// True when `op` is block diagonal in this frame (checked termwise).
    pub fn admits(&self, op: &OperatorSum) -> bool {
        self.generators
            .iter()
            .all(|g| op.commutes_termwise(g).unwrap_or(false))
    }

    pub fn split(&self, psi: &StateVector) -> Vec<DVector<C64>> {
        let v = psi.to_dvector();
        self.blocks.iter().map(|q| q.adjoint() * &v).collect()
    }

    pub fn join(&self, parts: &[DVector<C64>]) -> StateVector {
        let dim = 1usize << self.n_sites;
        let mut v = DVector::<C64>::zeros(dim);
        for (q, c) in self.blocks.iter().zip(parts) {
            v += q * c;
        }
        StateVector::from_dvector(self.n_sites, &v).expect("frame dimension")
    }

    /// `Q_k† op Q_k`.
    pub fn restrict(&self, op: &OperatorSum, k: usize) -> DMatrix<C64> {
        let q = &self.blocks[k];
        let dim = q.nrows();
        let mut applied = DMatrix::<C64>::zeros(dim, q.ncols());
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for c in 0..q.ncols() {
            let col: Vec<C64> = q.column(c).iter().copied().collect();
            op.apply_slice(&col, &mut out, crate::par::Execution::Sequential);
            applied.set_column(c, &DVector::from_column_slice(&out));
        }
        q.adjoint() * applied
    }
}
