// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution under `H0(λ(t))` with optional counterdiabatic driving.
//!
//! Every generator used here commutes with the plaquette operators, so the
//! state is carried as one coefficient vector per plaquette sector and each
//! step is an exact exponential of a small Hermitian block. Blocks holding
//! less than `INACTIVE_WEIGHT` of the norm are carried unchanged.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cd::{self, CdConvention, DEGENERACY_TOL};
use crate::lattice::Lattice;
use crate::pauli::{OperatorSum, StateVector};
use crate::sector::SectorFrame;
use crate::{linalg, Error, Result, C64};

/// Norm drift that aborts a run.
pub const NORM_ABORT: f64 = 1e-6;

/// Largest allowed `dt · ‖H‖`.
pub const STABILITY_LIMIT: f64 = 0.5;

const INACTIVE_WEIGHT: f64 = 1e-26;

/// Cubic smoothstep from `lambda0` to `lambdaf` over `[0, t_total]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lambda0: f64,
    pub lambdaf: f64,
    pub t_total: f64,
}

impl Schedule {
    pub fn new(lambda0: f64, lambdaf: f64, t_total: f64) -> Result<Self> {
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::Domain(format!("total time must be positive, got {t_total}")));
        }
        if !lambda0.is_finite() || !lambdaf.is_finite() {
            return Err(Error::Domain("schedule endpoints must be finite".into()));
        }
        Ok(Schedule {
            lambda0,
            lambdaf,
            t_total,
        })
    }

    fn check(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.t_total;
        if !(t >= -slack && t <= self.t_total + slack) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.t_total)));
        }
        Ok((t / self.t_total).clamp(0.0, 1.0))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let x = self.check(t)?;
        let d = self.lambdaf - self.lambda0;
        Ok(self.lambda0 + 3.0 * d * x * x - 2.0 * d * x * x * x)
    }

    pub fn rate(&self, t: f64) -> Result<f64> {
        let x = self.check(t)?;
        let d = self.lambdaf - self.lambda0;
        Ok(6.0 * d * x * (1.0 - x) / self.t_total)
    }
}

pub fn schedule_value(s: &Schedule, t: f64) -> Result<f64> {
    s.value(t)
}

pub fn schedule_rate(s: &Schedule, t: f64) -> Result<f64> {
    s.rate(t)
}

/// `min(T/2000, 0.001/J)`.
pub fn default_dt(j: f64, t_total: f64) -> f64 {
    (t_total / 2000.0).min(0.001 / j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdMode {
    None,
    Oracle,
    Analytic,
}

impl CdMode {
    pub const ALL: [CdMode; 3] = [CdMode::None, CdMode::Oracle, CdMode::Analytic];

    pub fn name(self) -> &'static str {
        match self {
            CdMode::None => "none",
            CdMode::Oracle => "oracle",
            CdMode::Analytic => "analytic",
        }
    }
}

impl fmt::Display for CdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(CdMode::None),
            "oracle" | "oracle-cd" => Ok(CdMode::Oracle),
            "analytic" | "analytic-cd" => Ok(CdMode::Analytic),
            other => Err(Error::Domain(format!("unknown cd mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub lambda: f64,
    pub fidelity: f64,
    pub norm: f64,
    pub energy: f64,
    pub w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionRecord {
    pub mode: CdMode,
    pub schedule: Schedule,
    pub dt: f64,
    pub steps: usize,
    pub samples: Vec<Sample>,
    pub final_state: StateVector,
}

impl EvolutionRecord {
    pub fn final_fidelity(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.fidelity)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.samples.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest change of any `⟨W_j⟩` from its first sample.
    pub fn max_w_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        self.samples
            .iter()
            .flat_map(|s| s.w.iter().zip(&first.w).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// `|⟨phi|psi⟩|²`.
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagateOptions {
    pub dt: f64,
    pub sample_every: usize,
    pub n_max: usize,
    pub convention: CdConvention,
}

/// Precomputed sector data for one lattice and coupling.
#[derive(Clone, Debug)]
pub struct Propagator {
    lat: Lattice,
    j: f64,
    frame: SectorFrame,
    hs: Vec<DMatrix<C64>>,
    v: Vec<DMatrix<C64>>,
    static_op: OperatorSum,
    drive_op: OperatorSum,
    stabilizers: Vec<OperatorSum>,
}

impl Propagator {
    pub fn new(lat: &Lattice, j: f64) -> Result<Self> {
        let frame = SectorFrame::plaquettes(lat)?;
        Ok(Self::with_frame(lat, j, frame))
    }

    /// Dense fallback: the whole space as a single block.
    pub fn dense(lat: &Lattice, j: f64) -> Self {
        Self::with_frame(lat, j, SectorFrame::trivial(lat.n_sites()))
    }

    fn with_frame(lat: &Lattice, j: f64, frame: SectorFrame) -> Self {
        let static_op = lat.hamiltonian_static(j);
        let drive_op = lat.hamiltonian_drive();
        let hs = (0..frame.blocks.len()).map(|k| frame.restrict(&static_op, k)).collect();
        let v = (0..frame.blocks.len()).map(|k| frame.restrict(&drive_op, k)).collect();
        Propagator {
            lat: lat.clone(),
            j,
            frame,
            hs,
            v,
            static_op,
            drive_op,
            stabilizers: lat
                .plaquette_stabilizers()
                .into_iter()
                .map(|w| OperatorSum::from_string(C64::new(1.0, 0.0), w))
                .collect(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn frame(&self) -> &SectorFrame {
        &self.frame
    }

    /// Spectral counterdiabatic term restricted to block `k`.
    pub fn block_oracle(&self, k: usize, lambda: f64, rate: f64) -> Result<DMatrix<C64>> {
        let h0 = &self.hs[k] + &self.v[k] * C64::new(lambda, 0.0);
        let e = linalg::eigh(&h0)?;
        Ok(cd::resolvent_from_eigh(&e, &self.v[k], rate, DEGENERACY_TOL * self.j).matrix)
    }

    /// Block-diagonal oracle assembled to a dense matrix.
    pub fn oracle_matrix(&self, lambda: f64, rate: f64) -> Result<DMatrix<C64>> {
        let dim = self.lat.dim();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for (k, q) in self.frame.blocks.iter().enumerate() {
            out += q * self.block_oracle(k, lambda, rate)? * q.adjoint();
        }
        Ok(out)
    }

    fn observe(&self, t: f64, lambda: f64, psi: &StateVector, target: &StateVector) -> Result<Sample> {
        let h0 = self
            .static_op
            .plus(&self.drive_op.scaled_real(lambda))?
            .normalized();
        Ok(Sample {
            t,
            lambda,
            fidelity: fidelity(psi, target)?,
            norm: psi.norm(),
            energy: psi.expectation(&h0)?.re,
            w: self
                .stabilizers
                .iter()
                .map(|w| psi.expectation(w).map(|e| e.re))
                .collect::<Result<_>>()?,
        })
    }

    /// Integrates from `psi0` and records observables against `target`.
    pub fn propagate(
        &self,
        schedule: &Schedule,
        mode: CdMode,
        psi0: &StateVector,
        target: &StateVector,
        opts: &PropagateOptions,
    ) -> Result<EvolutionRecord> {
        if psi0.n_sites() != self.lat.n_sites() || target.n_sites() != self.lat.n_sites() {
            return Err(Error::Shape("state does not match the lattice".into()));
        }
        if (psi0.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("initial state has norm {}", psi0.norm())));
        }
        if opts.dt.is_nan() || opts.dt <= 0.0 || opts.sample_every == 0 {
            return Err(Error::Domain("dt must be positive and sample_every at least 1".into()));
        }
        let steps = (schedule.t_total / opts.dt).round().max(1.0) as usize;
        let dt = schedule.t_total / steps as f64;
        if (dt - opts.dt).abs() > 1e-9 * opts.dt && mode != CdMode::None {
            log::debug!("dt adjusted from {} to {dt} to land on T", opts.dt);
        }

        let mut parts = self.frame.split(psi0);
        let active: Vec<bool> = parts.iter().map(|c| c.norm_squared() > INACTIVE_WEIGHT).collect();
        let mut record = EvolutionRecord {
            mode,
            schedule: *schedule,
            dt,
            steps,
            samples: Vec::new(),
            final_state: psi0.clone(),
        };
        record
            .samples
            .push(self.observe(0.0, schedule.value(0.0)?, psi0, target)?);

        for step in 0..steps {
            let t0 = step as f64 * dt;
            let tm = t0 + 0.5 * dt;
            let lambda = schedule.value(tm)?;
            let rate = schedule.rate(tm)?;
            let analytic = match mode {
                CdMode::Analytic if rate != 0.0 => Some(
                    cd::realspace_cd(&self.lat, self.j, lambda, rate, opts.n_max, &opts.convention)?.operator,
                ),
                _ => None,
            };
            if let Some(op) = &analytic {
                if !self.frame.admits(op) {
                    return Err(Error::Convention(
                        "driving term is not block diagonal in the plaquette frame".into(),
                    ));
                }
            }
            for (k, c) in parts.iter_mut().enumerate() {
                if !active[k] {
                    continue;
                }
                let mut h = &self.hs[k] + &self.v[k] * C64::new(lambda, 0.0);
                match mode {
                    CdMode::None => {}
                    CdMode::Oracle => h += self.block_oracle(k, lambda, rate)?,
                    CdMode::Analytic => {
                        if let Some(op) = &analytic {
                            h += self.frame.restrict(op, k);
                        }
                    }
                }
                let e = linalg::eigh(&h)?;
                let spread = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if dt * spread >= STABILITY_LIMIT {
                    return Err(Error::Stability(format!(
                        "dt·‖H‖ = {:.3} at t = {tm} (limit {STABILITY_LIMIT})",
                        dt * spread
                    )));
                }
                let u = linalg::unitary_from_eigh(&e, dt);
                *c = &u * &*c;
            }
            let done = step + 1;
            if done % opts.sample_every == 0 || done == steps {
                let t = done as f64 * dt;
                let psi = self.frame.join(&parts);
                let sample = self.observe(t, schedule.value(t)?, &psi, target)?;
                let drift = (sample.norm - 1.0).abs();
                record.samples.push(sample);
                record.steps = done;
                if drift > NORM_ABORT {
                    record.final_state = psi;
                    return Err(Error::NormDrift {
                        t,
                        drift,
                        partial: Box::new(record),
                    });
                }
                if done == steps {
                    record.final_state = psi;
                }
            }
        }
        Ok(record)
    }
}

/// One-shot propagation; builds the sector frame on every call.
pub fn propagate(
    lat: &Lattice,
    j: f64,
    schedule: &Schedule,
    mode: CdMode,
    psi0: &StateVector,
    target: &StateVector,
    opts: &PropagateOptions,
) -> Result<EvolutionRecord> {
    Propagator::new(lat, j)?.propagate(schedule, mode, psi0, target, opts)
}

/// Euclidean distance between amplitude vectors (global phase included).
pub fn state_distance(a: &StateVector, b: &StateVector) -> f64 {
    let da = DVector::from_column_slice(a.amplitudes());
    let db = DVector::from_column_slice(b.amplitudes());
    (da - db).norm()
}
