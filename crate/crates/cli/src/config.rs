// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: TOML file, then flag overrides, then validation.

use std::path::{Path, PathBuf};

use cdcluster::cd::{CdConvention, PairAssembly};
use cdcluster::dynamics::CdMode;
use cdcluster::fermion::Dispersion;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelect {
    None,
    Oracle,
    Analytic,
    All,
}

impl ModeSelect {
    pub fn modes(self) -> Vec<CdMode> {
        match self {
            ModeSelect::None => vec![CdMode::None],
            ModeSelect::Oracle => vec![CdMode::Oracle],
            ModeSelect::Analytic => vec![CdMode::Analytic],
            ModeSelect::All => CdMode::ALL.to_vec(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(ModeSelect::All),
            other => match other.parse::<CdMode>() {
                Ok(CdMode::None) => Ok(ModeSelect::None),
                Ok(CdMode::Oracle) => Ok(ModeSelect::Oracle),
                Ok(CdMode::Analytic) => Ok(ModeSelect::Analytic),
                Err(_) => Err(CliError::Config(format!(
                    "cd_mode must be none, oracle, analytic or all, got {s:?}"
                ))),
            },
        }
    }
}

/// Settings of the real-space driving term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConventionConfig {
    pub kernel: Dispersion,
    pub pair_assembly: PairAssembly,
    pub hermitize: bool,
    /// Fit the global scale once before use.
    pub calibrate: bool,
}

impl Default for ConventionConfig {
    fn default() -> Self {
        let d = CdConvention::default();
        ConventionConfig {
            kernel: d.kernel,
            pair_assembly: d.pair_assembly,
            hermitize: d.hermitize,
            calibrate: true,
        }
    }
}

impl ConventionConfig {
    pub fn uncalibrated(&self) -> CdConvention {
        CdConvention {
            global_scale: 1.0,
            pair_assembly: self.pair_assembly,
            hermitize: self.hermitize,
            kernel: self.kernel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub np: usize,
    pub j: f64,
    pub lambda0: f64,
    pub lambdaf: f64,
    pub t_list: Vec<f64>,
    /// Step size; unset means `min(T/2000, 0.001/J)` per run.
    pub dt: Option<f64>,
    pub cd_mode: ModeSelect,
    /// Longest pair distance in the real-space term; unset means `np`.
    pub n_max: Option<usize>,
    pub lambda_grid: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Plaquette signs for `cluster`; unset means measured on the ground state at `lambda0`.
    pub signs: Option<Vec<i8>>,
    /// Sweep rate used by `cd-check`.
    pub cd_rate: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Run independent sweep points on the worker pool.
    pub parallel: bool,
    pub convention: ConventionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            np: 4,
            j: 1.0,
            lambda0: 0.5,
            lambdaf: 0.05,
            t_list: vec![0.1, 1.0, 10.0],
            dt: None,
            cd_mode: ModeSelect::All,
            n_max: None,
            lambda_grid: (0..=10).map(|k| k as f64 / 20.0).collect(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            signs: None,
            cd_rate: 1.0,
            sample_every: 10,
            parallel: true,
            convention: ConventionConfig::default(),
        }
    }
}

/// Values given on the command line; `None` keeps the file or default value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub np: Option<usize>,
    pub j: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambdaf: Option<f64>,
    pub t_list: Option<String>,
    pub dt: Option<f64>,
    pub cd_mode: Option<String>,
    pub n_max: Option<usize>,
    pub lambda_grid: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub signs: Option<String>,
    pub cd_rate: Option<f64>,
    pub sample_every: Option<usize>,
    pub sequential: bool,
}

/// Comma-separated list; an empty string is an empty list.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(vec![]);
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("bad {what} entry {:?}", s.trim())))
        })
        .collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(np, j, lambda0, lambdaf, output_dir, seed, cd_rate, sample_every);
        if let Some(v) = o.dt {
            self.dt = Some(v);
        }
        if let Some(v) = o.n_max {
            self.n_max = Some(v);
        }
        if let Some(s) = &o.t_list {
            self.t_list = parse_list(s, "T")?;
        }
        if let Some(s) = &o.lambda_grid {
            self.lambda_grid = parse_list(s, "lambda grid")?;
        }
        if let Some(s) = &o.signs {
            self.signs = Some(parse_list(s, "sign")?);
        }
        if let Some(s) = &o.cd_mode {
            self.cd_mode = ModeSelect::parse(s)?;
        }
        if o.sequential {
            self.parallel = false;
        }
        Ok(())
    }

    /// Checks every field and fills `n_max`.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.np < 4 || self.np % 2 != 0 {
            return bad(format!("np must be even and at least 4, got {}", self.np));
        }
        if 2 * self.np > cdcluster::pauli::DENSE_SITE_CAP {
            return bad(format!("np = {} needs more than {} spins", self.np, cdcluster::pauli::DENSE_SITE_CAP));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return bad(format!("j must be positive, got {}", self.j));
        }
        if !self.lambda0.is_finite() || !self.lambdaf.is_finite() {
            return bad("lambda0 and lambdaf must be finite".into());
        }
        if self.t_list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad(format!("every T must be positive, got {:?}", self.t_list));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        let n_max = self.n_max.unwrap_or(self.np);
        if !(1..=self.np).contains(&n_max) {
            return bad(format!("n_max must lie in 1..={}, got {n_max}", self.np));
        }
        self.n_max = Some(n_max);
        if self.lambda_grid.iter().any(|l| !l.is_finite()) {
            return bad("lambda grid entries must be finite".into());
        }
        if let Some(s) = &self.signs {
            if s.len() != self.np || s.iter().any(|&v| v != 1 && v != -1) {
                return bad(format!("signs must be {} entries of +1 or -1, got {s:?}", self.np));
            }
        }
        if !self.cd_rate.is_finite() {
            return bad("cd_rate must be finite".into());
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        Ok(self)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(self.np)
    }

    pub fn dt_for(&self, t_total: f64) -> f64 {
        self.dt.unwrap_or_else(|| cdcluster::dynamics::default_dt(self.j, t_total))
    }

    pub fn execution(&self) -> cdcluster::par::Execution {
        if self.parallel {
            cdcluster::par::Execution::default()
        } else {
            cdcluster::par::Execution::Sequential
        }
    }

    /// One-line JSON used in CSV headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
