//! Cyclic K-node experiments on the reduced plane and on the circulant parametrization.

use std::f64::consts::PI;
use std::path::Path;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sobolev_core::mc::rng::uniform01;
use sobolev_core::multinode::{diagonal_decay, reduced_field, saddle_points, time_to_optimum, toeplitz_jacobian, ReducedState};
use sobolev_core::num::real_eigenvalues;
use sobolev_core::LossKind;

use super::rng_for;
use crate::config::Params;
use crate::error::{ensure, CliResult};
use crate::output::CsvTable;
use crate::row;

const KINDS: [LossKind; 2] = [LossKind::L2, LossKind::H1];

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct MultinodeArgs {
    /// Node counts [default: 2,4,8]
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    /// Random starts in the invariant region per K [default: 100]
    #[arg(long)]
    pub starts: Option<usize>,
    /// Convergence radius around (1, 0) for the random starts [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// RK4 step for the random starts [default: 0.01]
    #[arg(long)]
    pub step: Option<f64>,
    /// Give up after this flow time [default: 1000]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Starts near (1, 0) used for the L2/H1 time ratio, per K [default: 20]
    #[arg(long)]
    pub near_starts: Option<usize>,
    /// Distance of those starts from (1, 0) [default: 0.01]
    #[arg(long)]
    pub near_radius: Option<f64>,
    /// Target radius for the time ratio [default: 1e-4]
    #[arg(long)]
    pub near_tol: Option<f64>,
    /// RK4 step for the time ratio [default: 0.001]
    #[arg(long)]
    pub near_step: Option<f64>,
    /// Diagonal decay is integrated up to t = horizon / K [default: 4]
    #[arg(long)]
    pub decay_horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultinodeParams {
    pub seed: u64,
    pub k_values: Vec<usize>,
    pub starts: usize,
    pub tol: f64,
    pub step: f64,
    pub t_max: f64,
    pub near_starts: usize,
    pub near_radius: f64,
    pub near_tol: f64,
    pub near_step: f64,
    pub decay_horizon: f64,
}

impl Default for MultinodeParams {
    fn default() -> Self {
        Self {
            seed: 0,
            k_values: vec![2, 4, 8],
            starts: 100,
            tol: 1e-6,
            step: 1e-2,
            t_max: 1000.0,
            near_starts: 20,
            near_radius: 1e-2,
            near_tol: 1e-4,
            near_step: 1e-3,
            decay_horizon: 4.0,
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    ensure(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))
}

/// Root of the diagonal field by bisection on `[lo, 1]`.
fn diagonal_root(kind: LossKind, k: usize) -> sobolev_core::Result<f64> {
    let g = |x: f64| reduced_field(kind, &ReducedState::new(x, x, k)).map(|f| f.0);
    let (mut lo, mut hi) = (1e-3, 1.0);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() {
        return Ok(f64::NAN);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)?.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl Params for MultinodeParams {
    const NAME: &'static str = "multinode";

    fn validate(&self) -> CliResult<()> {
        ensure(!self.k_values.is_empty() && self.k_values.iter().all(|&k| k >= 2), || "k_values must be >= 2".into())?;
        ensure(self.starts >= 1 && self.near_starts >= 1, || "need at least one start".into())?;
        for (n, v) in [("tol", self.tol), ("step", self.step), ("t_max", self.t_max), ("near_tol", self.near_tol), ("near_step", self.near_step), ("decay_horizon", self.decay_horizon)] {
            positive(n, v)?;
        }
        ensure(self.near_radius > self.near_tol && self.near_radius < 0.5, || "need near_tol < near_radius < 0.5".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut omega = CsvTable::new(&["k", "start_id", "x0", "y0", "kind", "t_hit"]);
        let mut ratio = CsvTable::new(&["k", "start_id", "x0", "y0", "t_l2", "t_h1", "ratio"]);
        let mut decay = CsvTable::new(&["k", "kind", "exponent", "expected", "max_off_diagonal"]);
        let mut saddle = CsvTable::new(&["k", "kind", "closed_form", "numeric_root", "field_residual"]);
        for &k in &self.k_values {
            let hits: Vec<(f64, f64, Option<f64>)> = (0..self.starts)
                .into_par_iter()
                .map(|id| {
                    let mut rng = rng_for(self.seed, &[6, k as u64, id as u64]);
                    let x = 1.0 - uniform01(&mut rng);
                    let y = x * uniform01(&mut rng);
                    let t = time_to_optimum(LossKind::H1, &ReducedState::new(x, y, k), self.tol, self.step, self.t_max)?;
                    Ok((x, y, t))
                })
                .collect::<sobolev_core::Result<_>>()?;
            for (id, (x, y, t)) in hits.into_iter().enumerate() {
                omega.push(row![k, id, x, y, "h1", t]);
            }

            let near: Vec<(f64, f64, Option<f64>, Option<f64>)> = (0..self.near_starts)
                .into_par_iter()
                .map(|id| {
                    let mut rng = rng_for(self.seed, &[7, k as u64, id as u64]);
                    let phi = PI / 2.0 * (0.05 + 0.9 * uniform01(&mut rng));
                    let (x, y) = (1.0 - self.near_radius * phi.cos(), self.near_radius * phi.sin());
                    let s = ReducedState::new(x, y, k);
                    let t_l2 = time_to_optimum(LossKind::L2, &s, self.near_tol, self.near_step, self.t_max)?;
                    let t_h1 = time_to_optimum(LossKind::H1, &s, self.near_tol, self.near_step, self.t_max)?;
                    Ok((x, y, t_l2, t_h1))
                })
                .collect::<sobolev_core::Result<_>>()?;
            for (id, (x, y, a, b)) in near.into_iter().enumerate() {
                let r = match (a, b) {
                    (Some(a), Some(b)) if b > 0.0 => a / b,
                    _ => f64::NAN,
                };
                ratio.push(row![k, id, x, y, a, b, r]);
            }

            let (x_l2, x_h1) = saddle_points(k)?;
            for (kind, closed) in KINDS.into_iter().zip([x_l2, x_h1]) {
                let fit = diagonal_decay(kind, k, 1.0, self.decay_horizon / k as f64)?;
                decay.push(row![k, kind.as_str(), fit.exponent, fit.expected, fit.max_off_diagonal]);
                let (fx, fy) = reduced_field(kind, &ReducedState::new(closed, closed, k))?;
                saddle.push(row![k, kind.as_str(), closed, diagonal_root(kind, k)?, fx.abs().max(fy.abs())]);
            }
        }
        Ok(vec![
            omega.write(out, "multinode_omega.csv")?,
            ratio.write(out, "multinode_ratio.csv")?,
            decay.write(out, "multinode_decay.csv")?,
            saddle.write(out, "multinode_saddle.csv")?,
        ])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ToeplitzArgs {
    /// Node counts [default: 3,5,8]
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    /// Central-difference step for the Jacobian at e1 [default: 1e-6]
    #[arg(long)]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToeplitzParams {
    pub seed: u64,
    pub k_values: Vec<usize>,
    pub fd_step: f64,
}

impl Default for ToeplitzParams {
    fn default() -> Self {
        Self { seed: 0, k_values: vec![3, 5, 8], fd_step: 1e-6 }
    }
}

impl Params for ToeplitzParams {
    const NAME: &'static str = "toeplitz";

    fn validate(&self) -> CliResult<()> {
        ensure(!self.k_values.is_empty() && self.k_values.iter().all(|&k| k >= 2), || "k_values must be >= 2".into())?;
        positive("fd_step", self.fd_step)
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut eig = CsvTable::new(&["k", "kind", "index", "eigenvalue", "expected"]);
        let mut cmp = CsvTable::new(&["k", "max_abs_h1_minus_2l2", "max_abs_l2"]);
        for &k in &self.k_values {
            let j_l2 = toeplitz_jacobian(LossKind::L2, k, self.fd_step)?;
            let j_h1 = toeplitz_jacobian(LossKind::H1, k, self.fd_step)?;
            for (kind, j, scale) in [(LossKind::L2, &j_l2, 1.0), (LossKind::H1, &j_h1, 2.0)] {
                let mut rates = real_eigenvalues(&-j).unwrap_or_else(|_| vec![f64::NAN; k]);
                rates.sort_by(|a, b| b.total_cmp(a));
                for (i, r) in rates.iter().enumerate() {
                    let expected = scale * if i == 0 { (k as f64 + 1.0) / 4.0 } else { 0.25 };
                    eig.push(row![k, kind.as_str(), i, *r, expected]);
                }
            }
            cmp.push(row![k, (&j_h1 - &j_l2 * 2.0).amax(), j_l2.amax()]);
        }
        Ok(vec![eig.write(out, "toeplitz.csv")?, cmp.write(out, "toeplitz_ratio.csv")?])
    }
}
