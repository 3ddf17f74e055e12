// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Counterdiabatic terms: spectral resolvent, two-level closed form and the
//! real-space Majorana-string operator.

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fermion::{self, Dispersion, Twist};
use crate::lattice::Lattice;
use crate::pauli::{OperatorSum, PauliString, StateVector};
use crate::{linalg, spectra, Error, Result, C64};

/// Level pairs closer than `DEGENERACY_TOL · J` are left out of the resolvent.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairAssembly {
    /// Every ordered pair `(j, j + n)`, `n = 1..=n_max`.
    AllQ,
    /// Each unordered pair once.
    HalfGridPaired,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdConvention {
    pub global_scale: f64,
    pub pair_assembly: PairAssembly,
    pub hermitize: bool,
    /// Which momentum kernel feeds the real-space coefficients.
    pub kernel: Dispersion,
}

impl Default for CdConvention {
    fn default() -> Self {
        CdConvention {
            global_scale: 1.0,
            pair_assembly: PairAssembly::HalfGridPaired,
            hermitize: true,
            kernel: Dispersion::Chain,
        }
    }
}

/// Reference point for [`CdConvention::calibrated`].
pub const CALIBRATION_NP: usize = 4;
pub const CALIBRATION_LAMBDA: f64 = 0.3;

impl CdConvention {
    pub fn cosine() -> Self {
        CdConvention {
            kernel: Dispersion::Cosine,
            ..Self::default()
        }
    }

    /// Fits `global_scale` once against the spectral operator on the ground
    /// state at `(N_p = 4, λ = 0.3 J)`.
    pub fn calibrated(self, j: f64) -> Result<Self> {
        let lat = Lattice::new(CALIBRATION_NP)?;
        let lambda = CALIBRATION_LAMBDA * j;
        let trial = CdConvention {
            global_scale: 1.0,
            ..self
        };
        let analytic = realspace_cd(&lat, j, lambda, 1.0, lat.np(), &trial)?;
        let oracle = spectral_cd(&lat, j, lambda, 1.0)?;
        let gs = spectra::ground_state(&lat, j, lambda)?;
        let report = compare_cd(&analytic.operator, &oracle.matrix, &gs.state)?;
        if report.best_fit_scale.abs() < 1e-8 {
            return Err(Error::Convention(format!(
                "{:?} kernel has no overlap with the exact driving term (fit error {:.3})",
                self.kernel, report.ground_action_error
            )));
        }
        Ok(CdConvention {
            global_scale: report.best_fit_scale,
            ..self
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CdReport {
    pub ground_action_error: f64,
    pub hermitian_residual: f64,
    pub best_fit_scale: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralCd {
    pub matrix: DMatrix<C64>,
    /// Unordered level pairs left out as degenerate.
    pub degenerate_pairs: usize,
}

/// `i·rate·Σ_{E_m≠E_n} P_m ∂H P_n / (E_n − E_m)` from dense matrices.
pub fn resolvent_cd(h0: &DMatrix<C64>, dh: &DMatrix<C64>, rate: f64, tol: f64) -> Result<SpectralCd> {
    let e = linalg::eigh(h0)?;
    Ok(resolvent_from_eigh(&e, dh, rate, tol))
}

pub(crate) fn resolvent_from_eigh(e: &linalg::Eigh, dh: &DMatrix<C64>, rate: f64, tol: f64) -> SpectralCd {
    let u = &e.vectors;
    let mut m = u.adjoint() * dh * u;
    let dim = e.values.len();
    let mut excluded = 0;
    for c in 0..dim {
        for r in 0..dim {
            let gap = e.values[c] - e.values[r];
            if gap.abs() < tol {
                if r < c {
                    excluded += 1;
                }
                m[(r, c)] = C64::new(0.0, 0.0);
            } else {
                m[(r, c)] /= gap;
            }
        }
    }
    let matrix = u * m * u.adjoint() * C64::new(0.0, rate);
    SpectralCd {
        matrix,
        degenerate_pairs: excluded,
    }
}

/// Exact counterdiabatic term of `H0(λ)` at sweep rate `rate`.
pub fn spectral_cd(lat: &Lattice, j: f64, lambda: f64, rate: f64) -> Result<SpectralCd> {
    let h0 = lat.hamiltonian(j, lambda).realize()?;
    let v = lat.hamiltonian_drive().realize()?;
    let out = resolvent_cd(&h0, &v, rate, DEGENERACY_TOL * j)?;
    if out.degenerate_pairs > 0 {
        debug!("spectral_cd at lambda = {lambda}: {} degenerate pairs excluded", out.degenerate_pairs);
    }
    Ok(out)
}

/// `rate · (h × ∂h) / (2|h|²)`.
pub fn two_level_cd(h: [f64; 3], dh: [f64; 3], rate: f64) -> Result<[f64; 3]> {
    let n2 = h[0] * h[0] + h[1] * h[1] + h[2] * h[2];
    if n2 == 0.0 {
        return Err(Error::Singular);
    }
    let cross = [
        h[1] * dh[2] - h[2] * dh[1],
        h[2] * dh[0] - h[0] * dh[2],
        h[0] * dh[1] - h[1] * dh[0],
    ];
    let s = rate / (2.0 * n2);
    Ok([cross[0] * s, cross[1] * s, cross[2] * s])
}

/// Two-level term of one momentum mode, as `(c_x, c_y, c_z)`.
pub fn momentum_cd_block(q: f64, j: f64, lambda: f64, rate: f64, disp: Dispersion) -> Result<[f64; 3]> {
    two_level_cd(disp.field(q, j, lambda), disp.field_derivative(q), rate)
}

fn check_n(lat: &Lattice, n: usize) -> Result<()> {
    if !(1..=lat.np()).contains(&n) {
        return Err(Error::Domain(format!("pair distance {n} outside 1..={}", lat.np())));
    }
    Ok(())
}

/// Jordan-Wigner image of `d†_j d†_{j+n} + h.c.`, merged.
pub fn pair_string(lat: &Lattice, j: usize, n: usize) -> Result<OperatorSum> {
    check_n(lat, n)?;
    if !(1..=lat.np()).contains(&j) {
        return Err(Error::Domain(format!("logical index {j} outside 1..={}", lat.np())));
    }
    let dj = fermion::bond_fermion(lat, j as isize).adjoint();
    let dk = fermion::bond_fermion(lat, (j + n) as isize).adjoint();
    let x = dj.times(&dk)?;
    Ok(x.plus(&x.adjoint())?.normalized())
}

/// `(i/2)(a_k a_m − b_k b_m)` in the parity branch, `k, m` 0-based.
pub fn chain_pair(a: &[PauliString], b: &[PauliString], k: usize, m: usize) -> OperatorSum {
    let n = a[0].n_sites();
    let mut out = OperatorSum::zero(n);
    out.push(C64::new(0.0, 0.5), a[k].mul(&a[m]).expect("same size")).expect("same size");
    out.push(C64::new(0.0, -0.5), b[k].mul(&b[m]).expect("same size")).expect("same size");
    out
}

#[derive(Clone, Debug)]
pub struct RealspaceCd {
    pub operator: OperatorSum,
    /// `‖A − A†‖` before hermitization.
    pub antihermitian_residual: f64,
}

/// Real-space counterdiabatic operator, valid on the vortex-free sector.
pub fn realspace_cd(
    lat: &Lattice,
    j: f64,
    lambda: f64,
    rate: f64,
    n_max: usize,
    conv: &CdConvention,
) -> Result<RealspaceCd> {
    check_n(lat, n_max)?;
    if conv.global_scale == 0.0 || !conv.global_scale.is_finite() {
        return Err(Error::Domain("global_scale must be finite and nonzero".into()));
    }
    let n_sites = lat.n_sites();
    if rate == 0.0 {
        return Ok(RealspaceCd {
            operator: OperatorSum::zero(n_sites),
            antihermitian_residual: 0.0,
        });
    }
    let raw = match conv.kernel {
        Dispersion::Cosine => cosine_sum(lat, j, lambda, n_max, conv.pair_assembly)?.scaled_real(j * rate),
        Dispersion::Chain => chain_sum(lat, j, lambda, n_max, conv.pair_assembly)?.scaled_real(-0.5 * j * rate),
    }
    .scaled_real(conv.global_scale)
    .normalized();
    let antihermitian_residual = raw.hermitian_residual();
    let operator = if conv.hermitize { raw.hermitian_part() } else { raw };
    for w in lat.plaquette_stabilizers() {
        if !operator.commutes_termwise(&w)? {
            return Err(Error::Convention("real-space term leaves the plaquette sector".into()));
        }
    }
    Ok(RealspaceCd {
        operator,
        antihermitian_residual,
    })
}

fn half_grid_pairs(np: usize, n_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=n_max.min(np / 2) {
        for j in 1..=np {
            if n == np / 2 && j > np / 2 {
                continue;
            }
            out.push((j, n));
        }
    }
    out
}

fn cosine_sum(lat: &Lattice, j: f64, lambda: f64, n_max: usize, assembly: PairAssembly) -> Result<OperatorSum> {
    let np = lat.np();
    let coeffs = fermion::string_coefficients(j, lambda, np, n_max)?;
    let pairs: Vec<(usize, usize)> = match assembly {
        PairAssembly::AllQ => (1..=n_max).flat_map(|n| (1..=np).map(move |k| (k, n))).collect(),
        PairAssembly::HalfGridPaired => half_grid_pairs(np, n_max),
    };
    let mut out = OperatorSum::zero(lat.n_sites());
    for (k, n) in pairs {
        out = out.plus(&pair_string(lat, k, n)?.scaled_real(coeffs[n - 1]))?;
    }
    Ok(out.normalized())
}

fn chain_sum(lat: &Lattice, j: f64, lambda: f64, n_max: usize, assembly: PairAssembly) -> Result<OperatorSum> {
    let np = lat.np();
    let n_sites = lat.n_sites();
    let pz = lat.global_parity();
    let mut total = OperatorSum::zero(n_sites);
    for parity in [1i8, -1] {
        let twist = Twist::for_parity(parity);
        let s = fermion::sine_coefficients(j, lambda, np, np - 1, twist)?;
        let (a, b) = fermion::chain_majoranas(lat, parity);
        let mut branch = OperatorSum::zero(n_sites);
        match assembly {
            PairAssembly::HalfGridPaired => {
                for k in 0..np {
                    for m in k + 1..np {
                        let d = m - k;
                        if d.min(np - d) <= n_max {
                            branch = branch.plus(&chain_pair(&a, &b, k, m).scaled_real(s[d - 1]))?;
                        }
                    }
                }
            }
            PairAssembly::AllQ => {
                for k in 0..np {
                    for n in 1..=n_max.min(np - 1) {
                        let (m, sgn) = if k + n >= np { (k + n - np, twist.sign()) } else { (k + n, 1.0) };
                        branch = branch.plus(&chain_pair(&a, &b, k, m).scaled_real(sgn * s[n - 1]))?;
                    }
                }
            }
        }
        let mut proj = OperatorSum::identity(n_sites).scaled_real(0.5);
        proj.push_real(0.5 * parity as f64, pz.clone())?;
        total = total.plus(&proj.times(&branch.normalized())?)?;
    }
    Ok(total.normalized())
}

/// Fits `s` minimizing `‖s A|ψ⟩ − O|ψ⟩‖` over real `s` and reports the residual.
pub fn compare_cd(analytic: &OperatorSum, oracle: &DMatrix<C64>, psi0: &StateVector) -> Result<CdReport> {
    if oracle.nrows() != psi0.dim() || oracle.ncols() != psi0.dim() {
        return Err(Error::Shape("oracle and state dimensions differ".into()));
    }
    let a = analytic.apply(psi0)?;
    let o = oracle * psi0.to_dvector();
    let aa: f64 = a.amplitudes().iter().map(|v| v.norm_sqr()).sum();
    let oo: f64 = o.iter().map(|v| v.norm_sqr()).sum();
    let hermitian_residual = analytic.hermitian_residual();
    let report = |err, scale| CdReport {
        ground_action_error: err,
        hermitian_residual,
        best_fit_scale: scale,
    };
    if oo == 0.0 {
        return Ok(report(0.0, 0.0));
    }
    if aa == 0.0 {
        return Ok(report(1.0, 0.0));
    }
    let ao: C64 = a.amplitudes().iter().zip(o.iter()).map(|(x, y)| x.conj() * y).sum();
    let s = ao.re / aa;
    let resid: f64 = a
        .amplitudes()
        .iter()
        .zip(o.iter())
        .map(|(x, y)| (x * s - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(report(resid / oo.sqrt(), s))
}
