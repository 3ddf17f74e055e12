// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! The five subcommands. Each returns what it wrote so tests can inspect it.

use std::path::PathBuf;

use cdcluster::cd::{self, CdConvention};
use cdcluster::dynamics::{CdMode, EvolutionRecord, PropagateOptions, Propagator, Schedule};
use cdcluster::lattice::Lattice;
use cdcluster::pauli::{OperatorSum, StateVector};
use cdcluster::sector::SectorSpec;
use cdcluster::{spectra, Error, C64};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{self, num, CsvTable};
use crate::CliError;

// ---------------------------------------------------------------------------
// spectrum

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub config: RunConfig,
    pub n_sites: usize,
    pub full_dim: usize,
    pub vortex_free_dim: usize,
    pub lambda0: f64,
    pub gap_at_lambda0: f64,
    /// `"nonincreasing toward lambda = 0"` or `"not monotone"`.
    pub gap_trend: String,
    pub gap_monotone: bool,
    pub gaps: Vec<[f64; 2]>,
    pub bdg_model: cdcluster::fermion::SectorModel,
    pub bdg_max_deviation: f64,
}

pub fn run_spectrum(config: &RunConfig) -> Result<SpectrumSummary, CliError> {
    if config.lambda_grid.is_empty() {
        return Err(CliError::Config("lambda_grid is empty".into()));
    }
    let lat = Lattice::new(config.np)?;
    output::ensure_dir(&config.output_dir)?;
    let table = spectra::eig_sweep(&lat, config.j, &config.lambda_grid, config.execution())?;

    let full_dim = lat.dim();
    let vf_dim = table.vortex_free_dim;
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=full_dim).map(|k| format!("E_full_{k}")));
    header.extend((1..=vf_dim).map(|k| format!("E_vf_{k}")));
    header.push("gap_vf".into());
    let mut csv = CsvTable::new(header);
    csv.note("vortex_free_dim", vf_dim.to_string());
    for r in &table.rows {
        let mut row = vec![num(r.lambda)];
        row.extend(r.full.iter().map(|&e| num(e)));
        row.extend(r.vortex_free.iter().map(|&e| num(e)));
        row.push(num(r.gap_vf));
        csv.push(row);
    }
    csv.write(&output::out_path(config, "spectrum.csv"), config)?;

    let gap_at_lambda0 = match table.rows.iter().find(|r| r.lambda == config.lambda0) {
        Some(r) => r.gap_vf,
        None => spectra::vortex_free_gap(&lat, config.j, config.lambda0)?,
    };
    let monotone = table.gap_monotone();
    let summary = SpectrumSummary {
        config: config.clone(),
        n_sites: lat.n_sites(),
        full_dim,
        vortex_free_dim: vf_dim,
        lambda0: config.lambda0,
        gap_at_lambda0,
        gap_trend: if monotone { "nonincreasing toward lambda = 0" } else { "not monotone" }.into(),
        gap_monotone: monotone,
        gaps: table.rows.iter().map(|r| [r.lambda, r.gap_vf]).collect(),
        bdg_max_deviation: table.bdg_max_deviation(),
        bdg_model: table.bdg_model,
    };
    output::write_json(&output::out_path(config, "spectrum_summary.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub mode: CdMode,
    pub t_total: f64,
    pub dt: f64,
    pub steps: usize,
    pub file: String,
    /// `"complete"` or `"aborted: ..."`.
    pub status: String,
    pub final_fidelity: f64,
    pub max_norm_drift: f64,
    pub max_w_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    pub config: RunConfig,
    pub target_signs: Vec<i8>,
    pub initial_fidelity: f64,
    pub convention: Option<CdConvention>,
    pub runs: Vec<RunSummary>,
    pub complete: bool,
}

impl EvolveSummary {
    pub fn fidelity(&self, mode: CdMode, t_total: f64) -> Option<f64> {
        self.runs
            .iter()
            .find(|r| r.mode == mode && r.t_total == t_total)
            .map(|r| r.final_fidelity)
    }
}

fn evolve_csv(rec: &EvolutionRecord, np: usize, status: &str) -> CsvTable {
    let mut header: Vec<String> = ["t", "lambda", "fidelity", "norm", "energy"].map(String::from).to_vec();
    header.extend((1..=np).map(|k| format!("W_{k}")));
    let mut csv = CsvTable::new(header);
    csv.note("mode", rec.mode.name());
    csv.note("T", num(rec.schedule.t_total));
    csv.note("dt", num(rec.dt));
    csv.note("status", status);
    for s in &rec.samples {
        let mut row = vec![num(s.t), num(s.lambda), num(s.fidelity), num(s.norm), num(s.energy)];
        row.extend(s.w.iter().map(|&w| num(w)));
        csv.push(row);
    }
    csv
}

/// Convention for the analytic mode, calibrated when the config asks for it.
pub fn resolve_convention(config: &RunConfig) -> Result<CdConvention, CliError> {
    let base = config.convention.uncalibrated();
    if config.convention.calibrate {
        Ok(base.calibrated(config.j)?)
    } else {
        Ok(base)
    }
}

pub fn run_evolve(config: &RunConfig) -> Result<EvolveSummary, CliError> {
    if config.t_list.is_empty() {
        return Err(CliError::Config("t_list is empty".into()));
    }
    let lat = Lattice::new(config.np)?;
    output::ensure_dir(&config.output_dir)?;
    let gs = spectra::ground_state(&lat, config.j, config.lambda0)?;
    let signs = spectra::measured_signs(&lat, &gs.state)?;
    let target = spectra::cluster_state(&lat, &signs)?;
    let modes = config.cd_mode.modes();
    let convention = if modes.contains(&CdMode::Analytic) {
        Some(resolve_convention(config)?)
    } else {
        None
    };
    let prop = Propagator::new(&lat, config.j)?;

    let jobs: Vec<(f64, CdMode)> = config
        .t_list
        .iter()
        .flat_map(|&t| modes.iter().map(move |&m| (t, m)))
        .collect();
    let results = config.execution().map(&jobs, |&(t, mode)| {
        let schedule = Schedule::new(config.lambda0, config.lambdaf, t)?;
        let opts = PropagateOptions {
            dt: config.dt_for(t),
            sample_every: config.sample_every,
            n_max: config.n_max(),
            convention: convention.unwrap_or_default(),
        };
        prop.propagate(&schedule, mode, &gs.state, &target, &opts)
    });

    let mut summary = EvolveSummary {
        config: config.clone(),
        target_signs: signs,
        initial_fidelity: cdcluster::dynamics::fidelity(&gs.state, &target)?,
        convention,
        runs: vec![],
        complete: true,
    };
    let mut failure: Option<Error> = None;
    for (&(t, mode), result) in jobs.iter().zip(results) {
        let file = format!("evolve_{}_{}.csv", mode.name(), output::time_tag(t));
        let (rec, status) = match result {
            Ok(rec) => (rec, "complete".to_string()),
            Err(Error::NormDrift { t: at, drift, partial }) => {
                let status = format!("aborted: norm drift {drift:.3e} at t = {at}");
                failure.get_or_insert(Error::Numerical(format!("{mode} T = {t}: {status}")));
                (*partial, status)
            }
            Err(e) => return Err(e.into()),
        };
        evolve_csv(&rec, config.np, &status).write(&output::out_path(config, &file), config)?;
        summary.runs.push(RunSummary {
            mode,
            t_total: t,
            dt: rec.dt,
            steps: rec.steps,
            file,
            status,
            final_fidelity: rec.final_fidelity(),
            max_norm_drift: rec.max_norm_drift(),
            max_w_drift: rec.max_w_drift(),
        });
    }
    summary.complete = failure.is_none();
    output::write_json(&output::out_path(config, "evolve_summary.json"), &summary)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(summary),
    }
}

// ---------------------------------------------------------------------------
// cd-check

#[derive(Clone, Debug, Serialize)]
pub struct CdRow {
    pub lambda: f64,
    pub rate: f64,
    pub best_fit_scale: f64,
    pub ground_action_error: f64,
    pub hermitian_residual: f64,
    pub antihermitian_residual: f64,
    pub max_weight: usize,
    pub n_terms: usize,
    /// `max_weight` at `n_max = 1..=np`.
    pub weight_by_n_max: Vec<usize>,
    pub degenerate_pairs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub ok: bool,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CdCheckReport {
    pub config: RunConfig,
    pub convention: CdConvention,
    pub calibration: Calibration,
    pub rows: Vec<CdRow>,
    pub max_ground_action_error: f64,
    /// `(max − min) / |mean|` of nonzero best-fit scales.
    pub scale_spread: f64,
}

pub fn run_cdcheck(config: &RunConfig) -> Result<CdCheckReport, CliError> {
    if config.lambda_grid.is_empty() {
        return Err(CliError::Config("lambda_grid is empty".into()));
    }
    let lat = Lattice::new(config.np)?;
    output::ensure_dir(&config.output_dir)?;
    let (convention, calibration) = match resolve_convention(config) {
        Ok(c) => (
            c,
            Calibration {
                ok: true,
                message: if config.convention.calibrate { "calibrated" } else { "not requested" }.into(),
            },
        ),
        Err(CliError::Core(e @ Error::Convention(_))) => (
            config.convention.uncalibrated(),
            Calibration {
                ok: false,
                message: e.to_string(),
            },
        ),
        Err(e) => return Err(e),
    };
    let (j, rate, n_max) = (config.j, config.cd_rate, config.n_max());
    let rows = config.execution().map(&config.lambda_grid, |&lambda| -> cdcluster::Result<CdRow> {
        let analytic = cd::realspace_cd(&lat, j, lambda, rate, n_max, &convention)?;
        let oracle = cd::spectral_cd(&lat, j, lambda, rate)?;
        let gs = spectra::sector_ground_state(&lat, j, lambda, &SectorSpec::vortex_free(lat.np()))?;
        let rep = cd::compare_cd(&analytic.operator, &oracle.matrix, &gs.state)?;
        let weight_by_n_max = (1..=lat.np())
            .map(|n| cd::realspace_cd(&lat, j, lambda, rate, n, &convention).map(|a| a.operator.max_weight()))
            .collect::<cdcluster::Result<_>>()?;
        Ok(CdRow {
            lambda,
            rate,
            best_fit_scale: rep.best_fit_scale,
            ground_action_error: rep.ground_action_error,
            hermitian_residual: rep.hermitian_residual,
            antihermitian_residual: analytic.antihermitian_residual,
            max_weight: analytic.operator.max_weight(),
            n_terms: analytic.operator.len(),
            weight_by_n_max,
            degenerate_pairs: oracle.degenerate_pairs,
        })
    });
    let rows: Vec<CdRow> = rows.into_iter().collect::<cdcluster::Result<_>>()?;
    let scales: Vec<f64> = rows.iter().map(|r| r.best_fit_scale).filter(|&s| s != 0.0).collect();
    let scale_spread = if scales.is_empty() {
        0.0
    } else {
        let mean = scales.iter().sum::<f64>() / scales.len() as f64;
        let (lo, hi) = scales.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
        (hi - lo) / mean.abs()
    };
    let report = CdCheckReport {
        config: config.clone(),
        convention,
        calibration,
        max_ground_action_error: rows.iter().map(|r| r.ground_action_error).fold(0.0, f64::max),
        scale_spread,
        rows,
    };
    output::write_json(&output::out_path(config, "cd_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// cluster

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerCheck {
    pub name: String,
    pub string: String,
    pub expected: i8,
    pub measured: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub stabilizers: Vec<StabilizerCheck>,
    pub max_deviation: f64,
    pub within_tolerance: bool,
    pub tolerance: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterReport {
    pub config: RunConfig,
    pub signs: Vec<i8>,
    /// `"measured"` (ground state at lambda0) or `"config"`.
    pub signs_source: String,
    pub dimension: usize,
    pub n_sites: usize,
    pub phase_convention: String,
    pub basis_convention: String,
    /// `[re, im]` per basis index.
    pub amplitudes: Vec<[f64; 2]>,
    pub verification: Option<Verification>,
}

const CLUSTER_TOL: f64 = 1e-12;

fn expectation(psi: &StateVector, p: &cdcluster::pauli::PauliString) -> Result<f64, CliError> {
    Ok(psi.expectation(&OperatorSum::from_string(C64::new(1.0, 0.0), p.clone()))?.re)
}

/// Writes `cluster_state.json`; a solve of dimension other than one is
/// reported in the file and returned as an error.
pub fn run_cluster(config: &RunConfig) -> Result<ClusterReport, CliError> {
    let lat = Lattice::new(config.np)?;
    output::ensure_dir(&config.output_dir)?;
    let (signs, source) = match &config.signs {
        Some(s) => (s.clone(), "config"),
        None => {
            let gs = spectra::ground_state(&lat, config.j, config.lambda0)?;
            (spectra::measured_signs(&lat, &gs.state)?, "measured")
        }
    };
    let space = spectra::cluster_space(&lat, &signs)?;
    let mut report = ClusterReport {
        config: config.clone(),
        signs: signs.clone(),
        signs_source: source.into(),
        dimension: space.len(),
        n_sites: lat.n_sites(),
        phase_convention: "first amplitude above 1e-12 in basis order is real and positive".into(),
        basis_convention: "basis index bit n-1-s holds spin s; s = (row-1)*np + (column-1)".into(),
        amplitudes: vec![],
        verification: None,
    };
    let path = output::out_path(config, "cluster_state.json");
    if space.len() != 1 {
        output::write_json(&path, &report)?;
        return Err(Error::Dimension(space.len()).into());
    }
    let psi = &space[0];
    report.amplitudes = psi.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    let mut checks = Vec::new();
    for (k, (w, &s)) in lat.plaquette_stabilizers().iter().zip(&signs).enumerate() {
        checks.push(StabilizerCheck {
            name: format!("W_{}", k + 1),
            string: w.to_string(),
            expected: s,
            measured: expectation(psi, w)?,
        });
    }
    for (k, b) in lat.bond_stabilizers().iter().enumerate() {
        checks.push(StabilizerCheck {
            name: format!("K_{}", k + 1),
            string: b.to_string(),
            expected: 1,
            measured: expectation(psi, b)?,
        });
    }
    let max_deviation = checks
        .iter()
        .map(|c| (c.measured - c.expected as f64).abs())
        .fold(0.0, f64::max);
    report.verification = Some(Verification {
        stabilizers: checks,
        max_deviation,
        within_tolerance: max_deviation < CLUSTER_TOL,
        tolerance: CLUSTER_TOL,
        norm: psi.norm(),
    });
    output::write_json(&path, &report)?;
    Ok(report)
}

pub fn print_config(config: &RunConfig) -> String {
    config.to_toml()
}

/// Reads amplitudes back from a `cluster_state.json`.
pub fn load_cluster_amplitudes(path: &PathBuf) -> Result<Vec<C64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let amps = v["amplitudes"]
        .as_array()
        .ok_or_else(|| CliError::Config("no amplitudes".into()))?
        .iter()
        .map(|a| C64::new(a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN)))
        .collect();
    Ok(amps)
}
