//! Monte-Carlo oracles under `x ~ N(0, I_d)`.
//!
//! Samples are grouped into fixed leaves of [`LEAF`] consecutive indices; each leaf keeps
//! a Welford accumulator and leaves are merged pairwise in index order. The result depends
//! only on `(seed, stream, n_samples, dim)`, never on `chunk_size` or the worker count.

mod convergence;
mod estimators;
pub mod rng;
mod sgd;

pub use convergence::{convergence_study, loglog_slope, pointwise_check, trial_point, ConvergenceRow, GradientFamily, PointwiseRow, TrialPoint};
pub use estimators::{family_closed_form, family_mc, mc_loss_and_grad, mc_multinode_grad, McKind, McLossGrad, Model};
pub use sgd::{sgd_run, sgd_sweep, SgdConfig, SgdTrace};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use rng::SampleStream;

/// Samples per accumulation leaf.
pub const LEAF: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub dim: usize,
    /// Scheduling hint: minimum samples handed to one worker.
    pub chunk_size: u64,
    /// Independent substream id under the same seed.
    pub stream: u64,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64, dim: usize) -> Self {
        Self { n_samples, seed, dim, chunk_size: 1 << 16, stream: 0 }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dim must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidArgument("chunk_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Sub-estimate for entries `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> McEstimate {
        McEstimate {
            mean: self.mean[range.clone()].to_vec(),
            std_error: self.std_error[range].to_vec(),
            n: self.n,
            seed: self.seed,
        }
    }

    /// Per-entry `(mean - reference) / std_error`; entries with zero error and exact match give 0.
    pub fn z_scores(&self, reference: &[f64]) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.std_error)
            .zip(reference)
            .map(|((m, s), r)| {
                let diff = m - r;
                if diff == 0.0 {
                    0.0
                } else {
                    diff / s
                }
            })
            .collect()
    }

    /// `|mean - reference| / sqrt(sum std_error^2)`: the error norm in units of its standard deviation.
    pub fn standardized_error(&self, reference: &[f64]) -> f64 {
        let err: f64 = self.mean.iter().zip(reference).map(|(m, r)| (m - r).powi(2)).sum();
        let var: f64 = self.std_error.iter().map(|s| s * s).sum();
        if err == 0.0 {
            0.0
        } else {
            (err / var).sqrt()
        }
    }
}

#[derive(Clone)]
struct Acc {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Acc {
    fn merge(a: &Acc, b: &Acc) -> Acc {
        let n = a.n + b.n;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        let mut mean = Vec::with_capacity(a.mean.len());
        let mut m2 = Vec::with_capacity(a.mean.len());
        for i in 0..a.mean.len() {
            let delta = b.mean[i] - a.mean[i];
            mean.push(a.mean[i] + delta * nb / nf);
            m2.push(a.m2[i] + b.m2[i] + delta * delta * na * nb / nf);
        }
        Acc { n, mean, m2 }
    }
}

fn reduce_pairwise(accs: &[Acc]) -> Acc {
    match accs.len() {
        1 => accs[0].clone(),
        len => {
            let (l, r) = accs.split_at(len / 2);
            Acc::merge(&reduce_pairwise(l), &reduce_pairwise(r))
        }
    }
}

/// Sample mean of `f(x)` with `x ~ N(0, I_dim)`; `f` writes `n_out` values per sample.
pub fn mc_mean<F>(cfg: &McConfig, n_out: usize, f: F) -> Result<McEstimate>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    cfg.validate()?;
    let n_leaves = usize::try_from(cfg.n_samples.div_ceil(LEAF))
        .map_err(|_| Error::InvalidArgument("n_samples too large for this platform".into()))?;
    let min_len = (cfg.chunk_size / LEAF).max(1) as usize;
    let leaves: Vec<Acc> = (0..n_leaves)
        .into_par_iter()
        .with_min_len(min_len)
        .map(|leaf| {
            let start = leaf as u64 * LEAF;
            let count = LEAF.min(cfg.n_samples - start);
            let mut stream = SampleStream::at(cfg.seed, cfg.stream, cfg.dim, start);
            let mut x = vec![0.0; cfg.dim];
            let mut out = vec![0.0; n_out];
            let mut acc = Acc { n: 0, mean: vec![0.0; n_out], m2: vec![0.0; n_out] };
            for _ in 0..count {
                stream.next_sample(&mut x);
                f(&x, &mut out);
                acc.n += 1;
                let inv = 1.0 / acc.n as f64;
                for i in 0..n_out {
                    let delta = out[i] - acc.mean[i];
                    acc.mean[i] += delta * inv;
                    acc.m2[i] += delta * (out[i] - acc.mean[i]);
                }
            }
            acc
        })
        .collect();
    let total = reduce_pairwise(&leaves);
    let n = total.n as f64;
    let std_error = total
        .m2
        .iter()
        .map(|&m2| if total.n > 1 { (m2.max(0.0) / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 })
        .collect();
    Ok(McEstimate { mean: total.mean, std_error, n: total.n, seed: cfg.seed })
}
