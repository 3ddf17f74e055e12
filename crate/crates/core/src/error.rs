// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::dynamics::EvolutionRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("two-level field vanishes (level crossing)")]
    Singular,

    #[error("model-convention error: {0}")]
    Convention(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A stabilizer solve that should fix one state did not.
    #[error("stabilizer space has dimension {0}, expected 1")]
    Dimension(usize),

    #[error("unstable step: {0}")]
    Stability(String),

    /// Propagation aborted; the samples recorded so far are kept.
    #[error("norm drift {drift:.3e} exceeds tolerance at t = {t}")]
    NormDrift {
        t: f64,
        drift: f64,
        partial: Box<EvolutionRecord>,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::Convention(_)
                | Error::Numerical(_)
                | Error::Dimension(_)
                | Error::Stability(_)
                | Error::NormDrift { .. }
        )
    }
}
