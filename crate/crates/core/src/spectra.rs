// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact diagonalization, sector spectra and cluster-state extraction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fermion::{Dispersion, SectorModel};
use crate::lattice::Lattice;
use crate::par::Execution;
use crate::pauli::{OperatorSum, PauliString, StateVector};
use crate::sector::{self, SectorSpec};
use crate::{linalg, Error, Result, C64};

/// Ground state is unique when `E1 − E0 > UNIQUE_TOL · J`.
pub const UNIQUE_TOL: f64 = 1e-8;

/// Reference coupling (in units of J) for the free-fermion calibration.
pub const BDG_REFERENCE_LAMBDA: f64 = 0.25;

/// Tolerance for free-fermion levels against exact ones.
pub const BDG_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub gap: f64,
    pub unique: bool,
}

/// Lowest eigenpair of `H0(λ)` over the full space.
pub fn ground_state(lat: &Lattice, j: f64, lambda: f64) -> Result<GroundState> {
    let h = lat.hamiltonian(j, lambda).realize()?;
    let e = linalg::eigh(&h)?;
    let mut v = e.vectors.column(0).into_owned();
    linalg::fix_phase(&mut v, 1e-12);
    let gap = e.values[1] - e.values[0];
    Ok(GroundState {
        energy: e.values[0],
        state: StateVector::from_dvector(lat.n_sites(), &v)?,
        gap,
        unique: gap > UNIQUE_TOL * j,
    })
}

fn sorted_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Lowest eigenpair of `H0(λ)` inside one plaquette sector.
pub fn sector_ground_state(lat: &Lattice, j: f64, lambda: f64, spec: &SectorSpec) -> Result<GroundState> {
    let basis = sector::sector_basis(lat, spec)?;
    if basis.len() < 2 {
        return Err(Error::Dimension(basis.len()));
    }
    let q = basis_matrix(&basis);
    let h = lat.hamiltonian(j, lambda);
    let mut applied = DMatrix::<C64>::zeros(q.nrows(), q.ncols());
    for (c, v) in basis.iter().enumerate() {
        applied.set_column(c, &h.apply(v)?.to_dvector());
    }
    let e = linalg::eigh(&(q.adjoint() * applied))?;
    let mut v = &q * e.vectors.column(0);
    linalg::fix_phase(&mut v, 1e-12);
    let gap = e.values[1] - e.values[0];
    Ok(GroundState {
        energy: e.values[0],
        state: StateVector::from_dvector(lat.n_sites(), &v)?,
        gap,
        unique: gap > UNIQUE_TOL * j,
    })
}

pub fn full_spectrum(lat: &Lattice, j: f64, lambda: f64) -> Result<Vec<f64>> {
    sorted_eigenvalues(&lat.hamiltonian(j, lambda).realize()?)
}

/// Matrix with the basis vectors as columns.
pub fn basis_matrix(basis: &[StateVector]) -> DMatrix<C64> {
    let dim = basis.first().map_or(0, |v| v.dim());
    let mut q = DMatrix::<C64>::zeros(dim, basis.len());
    for (c, v) in basis.iter().enumerate() {
        for (r, a) in v.amplitudes().iter().enumerate() {
            q[(r, c)] = *a;
        }
    }
    q
}

/// Spectrum of `op` restricted to the span of an orthonormal basis.
pub fn restricted_spectrum(op: &OperatorSum, basis: &[StateVector]) -> Result<Vec<f64>> {
    let q = basis_matrix(basis);
    let mut applied = DMatrix::<C64>::zeros(q.nrows(), q.ncols());
    for (c, v) in basis.iter().enumerate() {
        let w = op.apply(v)?;
        for (r, a) in w.amplitudes().iter().enumerate() {
            applied[(r, c)] = *a;
        }
    }
    sorted_eigenvalues(&(q.adjoint() * applied))
}

pub fn vortex_free_spectrum(lat: &Lattice, j: f64, lambda: f64) -> Result<Vec<f64>> {
    let basis = sector::sector_basis(lat, &SectorSpec::vortex_free(lat.np()))?;
    restricted_spectrum(&lat.hamiltonian(j, lambda), &basis)
}

/// Distance from the lowest vortex-free level to the next level of the full
/// spectrum. Zero when the vortex-free ground level is degenerate with any
/// other state.
pub fn gap_above(full: &[f64], vortex_free: &[f64]) -> f64 {
    let e0 = vortex_free[0];
    let i0 = full
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - e0).abs().total_cmp(&(b.1 - e0).abs()))
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    // first level at or above e0 other than the one matched
    let mut next = f64::INFINITY;
    for (i, &e) in full.iter().enumerate() {
        if i != i0 && e >= full[i0] {
            next = next.min(e);
        }
    }
    (next - full[i0]).max(0.0)
}

pub fn vortex_free_gap(lat: &Lattice, j: f64, lambda: f64) -> Result<f64> {
    Ok(gap_above(&full_spectrum(lat, j, lambda)?, &vortex_free_spectrum(lat, j, lambda)?))
}

/// `E1 − E0` inside the vortex-free sector only.
pub fn sector_gap(lat: &Lattice, j: f64, lambda: f64) -> Result<f64> {
    let s = vortex_free_spectrum(lat, j, lambda)?;
    Ok(s[1] - s[0])
}

fn cluster_generators(lat: &Lattice, signs: &[i8]) -> Result<Vec<(PauliString, i8)>> {
    if signs.len() != lat.np() {
        return Err(Error::Shape(format!("{} signs for {} plaquettes", signs.len(), lat.np())));
    }
    SectorSpec::new(signs.to_vec())?;
    let mut gens: Vec<(PauliString, i8)> = lat.plaquette_stabilizers().into_iter().zip(signs.iter().copied()).collect();
    gens.extend(lat.bond_stabilizers().into_iter().map(|k| (k, 1)));
    Ok(gens)
}

/// Joint eigenspace of `W_j = signs_j` and `K_j = +1`.
pub fn cluster_space(lat: &Lattice, signs: &[i8]) -> Result<Vec<StateVector>> {
    Ok(sector::stabilizer_basis(lat.n_sites(), &cluster_generators(lat, signs)?))
}

/// The state fixed by `W_j = signs_j` and `K_j = +1`, first nonzero amplitude
/// real positive.
pub fn cluster_state(lat: &Lattice, signs: &[i8]) -> Result<StateVector> {
    let mut space = cluster_space(lat, signs)?;
    if space.len() != 1 {
        return Err(Error::Dimension(space.len()));
    }
    Ok(space.remove(0))
}

/// Rounded `⟨W_j⟩` of a state.
pub fn measured_signs(lat: &Lattice, psi: &StateVector) -> Result<Vec<i8>> {
    lat.plaquette_stabilizers()
        .into_iter()
        .map(|w| {
            let e = psi.expectation(&OperatorSum::from_string(C64::new(1.0, 0.0), w))?.re;
            Ok(if e >= 0.0 { 1 } else { -1 })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub lambda: f64,
    pub full: Vec<f64>,
    pub vortex_free: Vec<f64>,
    pub gap_vf: f64,
    /// Largest deviation of the free-fermion prediction from `vortex_free`.
    pub bdg_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub vortex_free_dim: usize,
    pub rows: Vec<SpectrumRow>,
    pub bdg_model: SectorModel,
}

impl SpectrumTable {
    /// True if ΔE_vf does not increase as λ decreases.
    pub fn gap_monotone(&self) -> bool {
        let mut rows: Vec<&SpectrumRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        rows.windows(2).all(|w| w[0].gap_vf <= w[1].gap_vf + 1e-12)
    }

    pub fn bdg_max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.bdg_deviation).fold(0.0, f64::max)
    }
}

/// Calibrates the free-fermion sector model once against exact levels.
pub fn calibrate_bdg(lat: &Lattice, j: f64, dispersion: Dispersion) -> Result<SectorModel> {
    let lambda = BDG_REFERENCE_LAMBDA * j;
    let reference = vortex_free_spectrum(lat, j, lambda)?;
    SectorModel::calibrate(dispersion, j, lambda, lat.np(), &reference, BDG_TOL)
}

/// Full and vortex-free spectra on a λ grid.
pub fn eig_sweep(lat: &Lattice, j: f64, grid: &[f64], exec: Execution) -> Result<SpectrumTable> {
    if grid.is_empty() {
        return Err(Error::Domain("empty lambda grid".into()));
    }
    let basis = sector::sector_basis(lat, &SectorSpec::vortex_free(lat.np()))?;
    let model = calibrate_bdg(lat, j, Dispersion::Chain)?;
    let rows = exec.map(grid, |&lambda| -> Result<SpectrumRow> {
        let h = lat.hamiltonian(j, lambda);
        let full = sorted_eigenvalues(&h.realize()?)?;
        let vortex_free = restricted_spectrum(&h, &basis)?;
        let pred = model.predict(j, lambda, lat.np())?;
        let bdg_deviation = pred
            .iter()
            .zip(&vortex_free)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(SpectrumRow {
            lambda,
            gap_vf: gap_above(&full, &vortex_free),
            full,
            vortex_free,
            bdg_deviation,
        })
    });
    Ok(SpectrumTable {
        vortex_free_dim: basis.len(),
        rows: rows.into_iter().collect::<Result<_>>()?,
        bdg_model: model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice {
        Lattice::new(4).unwrap()
    }

    #[test]
    fn static_ground_energy_and_degeneracy() {
        let s = full_spectrum(&lat(), 1.0, 0.0).unwrap();
        assert!((s[0] + 4.0).abs() < 1e-12);
        let deg = s.iter().filter(|&&e| (e - s[0]).abs() < 1e-9).count();
        assert_eq!(deg, 16);
    }

    #[test]
    fn static_spectrum_is_binomial() {
        // each of the four bonds contributes ±J, twice degenerate each
        let s = full_spectrum(&lat(), 1.0, 0.0).unwrap();
        for (k, binom) in [1usize, 4, 6, 4, 1].iter().enumerate() {
            let e = -4.0 + 2.0 * k as f64;
            let count = s.iter().filter(|&&x| (x - e).abs() < 1e-9).count();
            assert_eq!(count, binom * 16, "level {e}");
        }
    }

    #[test]
    fn sector_ground_state_matches_full_when_gapped() {
        let lat = lat();
        let full = ground_state(&lat, 1.0, 0.3).unwrap();
        let vf = sector_ground_state(&lat, 1.0, 0.3, &SectorSpec::vortex_free(4)).unwrap();
        assert!((full.energy - vf.energy).abs() < 1e-12);
        assert!((full.state.inner(&vf.state).unwrap().norm() - 1.0).abs() < 1e-10);
        let flat = sector_ground_state(&lat, 1.0, 0.0, &SectorSpec::vortex_free(4)).unwrap();
        assert!(flat.unique && (flat.gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_quarter_coupling() {
        let lat = lat();
        let gs = ground_state(&lat, 1.0, 0.25).unwrap();
        assert!(gs.unique && gs.gap > 0.0);
        for w in lat.plaquette_stabilizers() {
            let e = gs.state.expectation(&OperatorSum::from_string(C64::new(1.0, 0.0), w)).unwrap();
            assert!((e.re - 1.0).abs() < 1e-10);
        }
        assert_eq!(measured_signs(&lat, &gs.state).unwrap(), vec![1; 4]);
    }

    #[test]
    fn ground_state_degenerate_without_drive() {
        assert!(!ground_state(&lat(), 1.0, 0.0).unwrap().unique);
    }

    #[test]
    fn gap_closes_without_drive() {
        assert!(vortex_free_gap(&lat(), 1.0, 0.0).unwrap().abs() < 1e-10);
        let g = vortex_free_gap(&lat(), 1.0, 0.5).unwrap();
        assert!(g > 0.0);
    }

    #[test]
    fn sector_gap_is_two_j_without_drive() {
        assert!((sector_gap(&lat(), 1.0, 0.0).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn cluster_state_is_unique_and_static_ground() {
        let lat = lat();
        let c = cluster_state(&lat, &[1; 4]).unwrap();
        let e = c.expectation(&lat.hamiltonian_static(1.0)).unwrap().re;
        assert!((e + 4.0).abs() < 1e-12);
        assert!((c.norm() - 1.0).abs() < 1e-14);
        let first = c.amplitudes().iter().find(|a| a.norm() > 1e-12).unwrap();
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
    }

    #[test]
    fn flipped_pattern_still_fixes_one_state() {
        let lat = lat();
        let a = cluster_state(&lat, &[1; 4]).unwrap();
        let b = cluster_state(&lat, &[1, -1, 1, 1]).unwrap();
        assert!(a.inner(&b).unwrap().norm() < 1e-12);
    }

    #[test]
    fn cluster_signs_validated() {
        assert!(cluster_state(&lat(), &[1, 1, 1]).is_err());
        assert!(cluster_state(&lat(), &[1, 2, 1, 1]).is_err());
    }

    #[test]
    fn sweep_shape() {
        let t = eig_sweep(&lat(), 1.0, &[0.0, 0.25, 0.5], Execution::default()).unwrap();
        assert_eq!(t.vortex_free_dim, 16);
        for r in &t.rows {
            assert_eq!(r.full.len(), 256);
            assert_eq!(r.vortex_free.len(), 16);
            assert!(r.bdg_deviation < BDG_TOL, "{}", r.bdg_deviation);
        }
        assert!(t.gap_monotone());
    }

    #[test]
    fn cosine_dispersion_fails_calibration() {
        assert!(matches!(calibrate_bdg(&lat(), 1.0, Dispersion::Cosine), Err(Error::Convention(_))));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(eig_sweep(&lat(), 1.0, &[], Execution::Sequential).is_err());
    }
}
