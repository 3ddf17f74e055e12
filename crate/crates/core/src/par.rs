// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Data-parallel map with a sequential fallback.
//!
//! Only order-preserving `map`/`collect` is offered. Reductions over floats
//! are always done sequentially by the caller so results do not depend on
//! the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fill `out[i] = f(i)`; parallel over chunks of `CHUNK`.
    pub fn fill<R, F>(self, out: &mut [R], f: F)
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && out.len() > CHUNK {
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(c * CHUNK + k);
                }
            });
            return;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
}
