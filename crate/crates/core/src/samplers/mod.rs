//! Samplers: the exact Ornstein-Uhlenbeck flow, unadjusted Langevin
//! (Euler-Maruyama) steps, and the Proximal Sampler with exact-Gaussian or
//! rejection-based RGO oracles.
//!
//! Ensembles are collections of independent chains. Chain i owns RNG stream
//! (seed, i), so advancing an ensemble is embarrassingly parallel and
//! bit-deterministic regardless of thread count.

mod langevin;
mod proximal;
pub mod rng;

pub use langevin::{lmc_run, lmc_step, ou_flow};
pub use proximal::{
    prox_gaussian_recursion, prox_point, prox_sampler_run, rgo_sample, ProxPoint,
    ProxSamplerConfig, ProxTarget, RgoOracle,
};
pub use rng::RngStream;

use crate::error::{Error, Result};
use crate::measures::IsotropicGaussian;

/// Counters for a randomized generation oracle. `proposals` and
/// `acceptances` track the rejection loop (the exact-Gaussian oracle counts
/// each draw as one accepted proposal, keeping its rate at 1);
/// `inner_solver_iterations` accumulates proximal-point gradient steps.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OracleStats {
    pub proposals: u64,
    pub acceptances: u64,
    pub inner_solver_iterations: u64,
}

impl OracleStats {
    pub fn merge(&mut self, other: &OracleStats) {
        self.proposals += other.proposals;
        self.acceptances += other.acceptances;
        self.inner_solver_iterations += other.inner_solver_iterations;
    }

    /// Fraction of proposals accepted; NaN when nothing was proposed.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            f64::NAN
        } else {
            self.acceptances as f64 / self.proposals as f64
        }
    }
}

/// Provenance of an ensemble, carried along for manifests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleMeta {
    pub seed: u64,
    pub algorithm: String,
    pub step_count: u64,
}

/// n_chains independent points in R^d, each chain paired with its RNG
/// stream. Storage is chain-major and contiguous.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    dim: usize,
    data: Vec<f64>,
    streams: Vec<RngStream>,
    meta: EnsembleMeta,
}

impl ParticleEnsemble {
    /// Draw n_chains iid points from `law`; chain i consumes the first
    /// dim draws of stream (seed, i).
    pub fn from_gaussian(law: &IsotropicGaussian, n_chains: usize, seed: u64) -> Result<Self> {
        if n_chains == 0 {
            return Err(Error::InvalidParameter("n_chains must be >= 1".into()));
        }
        let dim = law.dim();
        let sd = law.variance().sqrt();
        let mut data = vec![0.0; n_chains * dim];
        let mut streams = Vec::with_capacity(n_chains);
        for (i, chunk) in data.chunks_mut(dim).enumerate() {
            let mut s = RngStream::new(seed, i as u64);
            for (x, m) in chunk.iter_mut().zip(law.mean()) {
                *x = m + sd * s.next_normal();
            }
            streams.push(s);
        }
        Ok(Self {
            dim,
            data,
            streams,
            meta: EnsembleMeta {
                seed,
                algorithm: "init-gaussian".into(),
                step_count: 0,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_chains(&self) -> usize {
        self.streams.len()
    }

    pub fn meta(&self) -> &EnsembleMeta {
        &self.meta
    }

    pub fn point(&self, chain: usize) -> &[f64] {
        &self.data[chain * self.dim..(chain + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub(crate) fn parts_mut(&mut self) -> (usize, &mut [f64], &mut [RngStream]) {
        (self.dim, &mut self.data, &mut self.streams)
    }

    pub(crate) fn note_steps(&mut self, algorithm: &str, steps: u64) {
        if self.meta.algorithm != algorithm {
            self.meta.algorithm = algorithm.to_string();
        }
        self.meta.step_count += steps;
    }
}
