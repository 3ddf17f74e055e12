// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Momentum-space formulas and the Jordan-Wigner fermions of the chain.
//!
//! Two dispersions are kept side by side. [`Dispersion::Cosine`] is the
//! even-in-`q` field `h = (0, λC, J + λC)` with `C = cos 2q + cos q`, and
//! [`Dispersion::Chain`] is the exact single-particle symbol of the ring
//! `f(q) = J − λ(e^{iq} + e^{2iq})`, written as `h = (0, Im f, Re f)`.
//! Only the second one reproduces the exact spectrum (see
//! [`SectorModel::calibrate`]).
//!
//! The Jordan-Wigner string runs along the zigzag of x and y bonds,
//! `l_1, r_{N_p}, l_2, r_1, l_3, r_2, …`, so that every bond fermion
//! `d_j = (A_{j,r} + iA_{j,l})/2` commutes with the plaquette operators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{End, Lattice};
use crate::pauli::{OperatorSum, Pauli, PauliString, Phase};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    Periodic,
    Antiperiodic,
}

impl Twist {
    /// `e^{i q N_p}` on the grid.
    pub fn sign(self) -> f64 {
        match self {
            Twist::Periodic => 1.0,
            Twist::Antiperiodic => -1.0,
        }
    }

    /// Boundary twist of the fermions in the branch `Z^{⊗N} = parity`.
    pub fn for_parity(parity: i8) -> Twist {
        if parity > 0 {
            Twist::Antiperiodic
        } else {
            Twist::Periodic
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    Cosine,
    Chain,
}

fn check_np(np: usize) -> Result<()> {
    if np < 4 || np % 2 != 0 {
        return Err(Error::Domain(format!("N_p must be even and at least 4, got {np}")));
    }
    Ok(())
}

/// `{2πm/N_p : m = −N_p/2 + 1, …, N_p/2}`.
pub fn momentum_grid(np: usize) -> Result<Vec<f64>> {
    twisted_grid(np, Twist::Periodic)
}

/// Periodic grid, or the grid shifted by half a spacing.
pub fn twisted_grid(np: usize, twist: Twist) -> Result<Vec<f64>> {
    check_np(np)?;
    let h = (np / 2) as isize;
    let n = np as f64;
    Ok(match twist {
        Twist::Periodic => (-h + 1..=h).map(|m| 2.0 * PI * m as f64 / n).collect(),
        Twist::Antiperiodic => (-h..h).map(|m| 2.0 * PI * (m as f64 + 0.5) / n).collect(),
    })
}

/// `cos 2q + cos q`.
pub fn c_sum(q: f64) -> f64 {
    (2.0 * q).cos() + q.cos()
}

/// `sin q + sin 2q`.
pub fn s_sum(q: f64) -> f64 {
    q.sin() + (2.0 * q).sin()
}

/// `(0, λC, J + λC)`.
pub fn field_vector(q: f64, j: f64, lambda: f64) -> [f64; 3] {
    let c = c_sum(q);
    [0.0, lambda * c, j + lambda * c]
}

pub fn mode_energy(q: f64, j: f64, lambda: f64) -> f64 {
    norm3(field_vector(q, j, lambda))
}

/// Closed-form denominator `J² + 2λ²(cos²2q + cos²q + 2cos2q cosq) + 2Jλ(cos2q + cosq)`.
pub fn cosine_denominator(q: f64, j: f64, lambda: f64) -> f64 {
    let (c2, c1) = ((2.0 * q).cos(), q.cos());
    j * j + 2.0 * lambda * lambda * (c2 * c2 + c1 * c1 + 2.0 * c2 * c1) + 2.0 * j * lambda * (c2 + c1)
}

/// `C(q) / ε(q)²`.
pub fn cd_kernel(q: f64, j: f64, lambda: f64) -> f64 {
    let e = mode_energy(q, j, lambda);
    c_sum(q) / (e * e)
}

/// `a_n = (1/N_p) Σ_q M(q) cos(nq)` for `n = 1..=n_max`.
pub fn string_coefficients(j: f64, lambda: f64, np: usize, n_max: usize) -> Result<Vec<f64>> {
    if n_max > np {
        return Err(Error::Domain(format!("n_max = {n_max} exceeds N_p = {np}")));
    }
    let grid = momentum_grid(np)?;
    Ok((1..=n_max)
        .map(|n| {
            grid.iter()
                .map(|&q| cd_kernel(q, j, lambda) * (n as f64 * q).cos())
                .sum::<f64>()
                / np as f64
        })
        .collect())
}

/// `J − λ(e^{iq} + e^{2iq})`.
pub fn chain_symbol(q: f64, j: f64, lambda: f64) -> C64 {
    C64::new(j - lambda * c_sum(q), -lambda * s_sum(q))
}

/// `(sin q + sin 2q) / |f(q)|²`, set to 0 where the numerator vanishes.
pub fn chain_kernel(q: f64, j: f64, lambda: f64) -> f64 {
    let s = s_sum(q);
    if s == 0.0 {
        return 0.0;
    }
    s / chain_symbol(q, j, lambda).norm_sqr()
}

/// `s_n = (1/N_p) Σ_q M_c(q) sin(nq)` over the twisted grid, `n = 1..=n_max`.
pub fn sine_coefficients(j: f64, lambda: f64, np: usize, n_max: usize, twist: Twist) -> Result<Vec<f64>> {
    if n_max > np {
        return Err(Error::Domain(format!("n_max = {n_max} exceeds N_p = {np}")));
    }
    let grid = twisted_grid(np, twist)?;
    let kernel: Vec<f64> = grid.iter().map(|&q| chain_kernel(q, j, lambda)).collect();
    Ok((1..=n_max)
        .map(|n| {
            grid.iter()
                .zip(&kernel)
                .map(|(&q, &m)| m * (n as f64 * q).sin())
                .sum::<f64>()
                / np as f64
        })
        .collect())
}

impl Dispersion {
    pub fn field(self, q: f64, j: f64, lambda: f64) -> [f64; 3] {
        match self {
            Dispersion::Cosine => field_vector(q, j, lambda),
            Dispersion::Chain => {
                let f = chain_symbol(q, j, lambda);
                [0.0, f.im, f.re]
            }
        }
    }

    /// `∂h/∂λ`; both fields are linear in λ.
    pub fn field_derivative(self, q: f64) -> [f64; 3] {
        match self {
            Dispersion::Cosine => {
                let c = c_sum(q);
                [0.0, c, c]
            }
            Dispersion::Chain => [0.0, -s_sum(q), -c_sum(q)],
        }
    }

    pub fn energy(self, q: f64, j: f64, lambda: f64) -> f64 {
        norm3(self.field(q, j, lambda))
    }

    /// Grid used for a fermion-parity branch.
    pub fn grid(self, np: usize, twist: Twist) -> Result<Vec<f64>> {
        match self {
            Dispersion::Cosine => momentum_grid(np),
            Dispersion::Chain => twisted_grid(np, twist),
        }
    }
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// One fixed-parity block of the free-fermion Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub twist: Twist,
    /// Parity of the number of excited modes.
    pub odd: bool,
}

/// `E_vac + Σ_{q∈S} 2ε_q` over subsets `S` of the grid with the branch parity,
/// with `E_vac = −Σ_q ε_q`. Sorted ascending.
pub fn branch_levels(disp: Dispersion, branch: Branch, j: f64, lambda: f64, np: usize) -> Result<Vec<f64>> {
    let eps: Vec<f64> = disp
        .grid(np, branch.twist)?
        .iter()
        .map(|&q| disp.energy(q, j, lambda))
        .collect();
    let vac: f64 = -eps.iter().sum::<f64>();
    let mut out = Vec::with_capacity(1 << (np - 1));
    for mask in 0u64..(1 << np) {
        if (mask.count_ones() % 2 == 1) != branch.odd {
            continue;
        }
        let exc: f64 = (0..np).filter(|&k| mask >> k & 1 == 1).map(|k| 2.0 * eps[k]).sum();
        out.push(vac + exc);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Free-fermion prediction of the vortex-free spectrum: a union of parity
/// branches plus a constant offset, fixed once against a reference spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorModel {
    pub dispersion: Dispersion,
    pub branches: Vec<Branch>,
    pub offset: f64,
    /// Worst level mismatch at the calibration point.
    pub calibration_error: f64,
}

impl SectorModel {
    /// Picks the branch union and offset that best reproduce `reference`
    /// (sorted sector energies at `lambda_ref`).
    pub fn calibrate(
        dispersion: Dispersion,
        j: f64,
        lambda_ref: f64,
        np: usize,
        reference: &[f64],
        tol: f64,
    ) -> Result<Self> {
        let all = [
            Branch { twist: Twist::Antiperiodic, odd: false },
            Branch { twist: Twist::Antiperiodic, odd: true },
            Branch { twist: Twist::Periodic, odd: false },
            Branch { twist: Twist::Periodic, odd: true },
        ];
        let per_branch = 1usize << (np - 1);
        if reference.is_empty() || reference.len() % per_branch != 0 {
            return Err(Error::Convention(format!(
                "sector of dimension {} is not a union of {per_branch}-level branches",
                reference.len()
            )));
        }
        let k = reference.len() / per_branch;
        let mut best: Option<SectorModel> = None;
        for mask in 0u32..16 {
            if mask.count_ones() as usize != k {
                continue;
            }
            let branches: Vec<Branch> = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| all[b]).collect();
            let mut model = SectorModel {
                dispersion,
                branches,
                offset: 0.0,
                calibration_error: 0.0,
            };
            let pred = model.predict(j, lambda_ref, np)?;
            model.offset =
                reference.iter().zip(&pred).map(|(r, p)| r - p).sum::<f64>() / reference.len() as f64;
            model.calibration_error = reference
                .iter()
                .zip(&pred)
                .map(|(r, p)| (r - p - model.offset).abs())
                .fold(0.0, f64::max);
            if best.as_ref().map_or(true, |b| model.calibration_error < b.calibration_error) {
                best = Some(model);
            }
        }
        let best = best.expect("at least one branch union");
        if best.calibration_error > tol {
            return Err(Error::Convention(format!(
                "{:?} dispersion cannot reproduce the sector spectrum (worst level off by {:.3e})",
                dispersion, best.calibration_error
            )));
        }
        Ok(best)
    }

    pub fn predict(&self, j: f64, lambda: f64, np: usize) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for &b in &self.branches {
            out.extend(branch_levels(self.dispersion, b, j, lambda, np)?);
        }
        out.iter_mut().for_each(|e| *e += self.offset);
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Smallest excitation above the predicted ground level.
    pub fn gap(&self, j: f64, lambda: f64, np: usize) -> Result<f64> {
        let levels = self.predict(j, lambda, np)?;
        Ok(levels[1] - levels[0])
    }
}

/// Sorted vortex-free spectrum from a calibrated model.
pub fn bdg_sector_spectrum(model: &SectorModel, j: f64, lambda: f64, np: usize) -> Result<Vec<f64>> {
    model.predict(j, lambda, np)
}

// ---------------------------------------------------------------------------
// Jordan-Wigner strings

/// Sites in string order: position `2(j−1)` is `(j, l)`, position `2j−1` is `(j−1, r)`.
pub fn jw_path(lat: &Lattice) -> Vec<usize> {
    (1..=lat.np() as isize)
        .flat_map(|j| [lat.logical_site(j, End::L), lat.logical_site(j - 1, End::R)])
        .collect()
}

fn string_before(lat: &Lattice, site: usize) -> PauliString {
    let path = jw_path(lat);
    let pos = path.iter().position(|&s| s == site).expect("site on path");
    let zs: Vec<(usize, Pauli)> = path[..pos].iter().map(|&s| (s, Pauli::Z)).collect();
    PauliString::from_sites(lat.n_sites(), &zs)
}

fn with_letter(mut p: PauliString, site: usize, letter: Pauli) -> PauliString {
    p.set(site, letter);
    p
}

/// Site fermion `c_s = (∏_{before} Z) (X − iY)/2`.
pub fn site_fermion(lat: &Lattice, site: usize) -> OperatorSum {
    let s = string_before(lat, site);
    let mut c = OperatorSum::zero(lat.n_sites());
    c.push_real(0.5, with_letter(s.clone(), site, Pauli::X)).expect("same size");
    c.push(C64::new(0.0, -0.5), with_letter(s, site, Pauli::Y)).expect("same size");
    c
}

/// `A` Majorana of a site: `c + c†` on left ends, `(c − c†)/i` on right ends.
pub fn majorana_a(lat: &Lattice, j: isize, end: End) -> PauliString {
    let site = lat.logical_site(j, end);
    let s = string_before(lat, site);
    match end {
        End::L => with_letter(s, site, Pauli::X),
        End::R => with_letter(s, site, Pauli::Y).with_phase(Phase::MINUS_ONE),
    }
}

/// `B` Majorana of a site: `(c − c†)/i` on left ends, `c + c†` on right ends.
pub fn majorana_b(lat: &Lattice, j: isize, end: End) -> PauliString {
    let site = lat.logical_site(j, end);
    let s = string_before(lat, site);
    match end {
        End::L => with_letter(s, site, Pauli::Y).with_phase(Phase::MINUS_ONE),
        End::R => with_letter(s, site, Pauli::X),
    }
}

/// `d_j = (A_{j,r} + i A_{j,l}) / 2`.
pub fn bond_fermion(lat: &Lattice, j: isize) -> OperatorSum {
    let mut d = OperatorSum::zero(lat.n_sites());
    d.push_real(0.5, majorana_a(lat, j, End::R)).expect("same size");
    d.push(C64::new(0.0, 0.5), majorana_a(lat, j, End::L)).expect("same size");
    d
}

/// `u_j = i B_{j,l} B_{j,r}`, conserved by H0.
pub fn bond_flux(lat: &Lattice, j: isize) -> PauliString {
    majorana_b(lat, j, End::L)
        .mul(&majorana_b(lat, j, End::R))
        .expect("same size")
        .mul(&PauliString::identity(lat.n_sites()).with_phase(Phase::I))
        .expect("same size")
}

/// Chain Majoranas `(a_k, b_k)`, `k = 1..=N_p`, in the branch `Z^{⊗N} = parity`:
/// `a_k = ε_k A_{k,r}` with `ε_{N_p} = −parity` (else 1), `b_k = A_{k,l}`.
pub fn chain_majoranas(lat: &Lattice, parity: i8) -> (Vec<PauliString>, Vec<PauliString>) {
    let np = lat.np() as isize;
    let a = (1..=np)
        .map(|k| {
            let m = majorana_a(lat, k, End::R);
            if k == np && parity > 0 {
                let ph = m.phase() * Phase::MINUS_ONE;
                m.with_phase(ph)
            } else {
                m
            }
        })
        .collect();
    let b = (1..=np).map(|k| majorana_a(lat, k, End::L)).collect();
    (a, b)
}

/// Free-fermion form `i Σ_k Σ_r g_r τ^{[k+r > N_p]} a_k b_{k+r}` with
/// `g = (J, −λ, −λ)`. Equals H0 on the vortex-free states with `Z^{⊗N} = parity`.
pub fn chain_hamiltonian(lat: &Lattice, j: f64, lambda: f64, parity: i8) -> OperatorSum {
    let np = lat.np();
    let tau = Twist::for_parity(parity).sign();
    let (a, b) = chain_majoranas(lat, parity);
    let mut h = OperatorSum::zero(lat.n_sites());
    for (k, ak) in a.iter().enumerate() {
        for (r, g) in [(0, j), (1, -lambda), (2, -lambda)] {
            let m = k + r;
            let (m, sgn) = if m >= np { (m - np, tau) } else { (m, 1.0) };
            let p = ak.mul(&b[m]).expect("same size");
            h.push(C64::new(0.0, g * sgn), p).expect("same size");
        }
    }
    h.normalized()
}
