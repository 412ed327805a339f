use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{fill_normals, mix_seed, normal_vector, seeded_rng, uniform_in_ball};
use crate::error::{Error, Result};
use crate::num::{pair_geometry, Vector};
use crate::relu1::{hessians, kappa_h1_formula, kappa_l2_formula};
use crate::LossKind;

/// Plain minibatch SGD on a fixed Gaussian dataset labelled by a random teacher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub dim: usize,
    pub batch_size: usize,
    pub n_train: usize,
    pub learning_rate: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub loss_kind: LossKind,
    /// Record every this many steps (step 0 and the last step are always recorded).
    pub log_every: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            batch_size: 64,
            n_train: 10_000,
            learning_rate: 1e-2,
            n_steps: 2000,
            seed: 0,
            loss_kind: LossKind::L2,
            log_every: 10,
        }
    }
}

impl SgdConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.batch_size == 0 || self.n_train < self.batch_size {
            return Err(Error::InvalidArgument("need dim >= 1 and 1 <= batch_size <= n_train".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgdTrace {
    pub steps: Vec<usize>,
    /// `|w - w*|^2` at each recorded step.
    pub err_sq: Vec<f64>,
    /// Analytic condition number of the matching Hessian; `None` outside the convexity region.
    pub kappa: Vec<Option<f64>>,
    /// Largest relative gap between the analytic and the eigensolver condition number
    /// over the spot checks (every 100th record).
    pub spot_check_max_rel_err: f64,
}

fn kappa_at(kind: LossKind, w: &Vector, wstar: &Vector) -> Option<f64> {
    let g = pair_geometry(w, wstar).ok()?;
    if g.norm_w == 0.0 {
        return None;
    }
    match kind {
        LossKind::L2 => kappa_l2_formula(&g),
        LossKind::H1 => kappa_h1_formula(&g),
    }
}

fn numeric_kappa(kind: LossKind, w: &Vector, wstar: &Vector) -> Option<f64> {
    let r = hessians(w, wstar).ok()?;
    match kind {
        LossKind::L2 => r.numeric_kappa_l2(),
        LossKind::H1 => r.numeric_kappa_h1(),
    }
}

pub fn sgd_run(cfg: &SgdConfig) -> Result<SgdTrace> {
    cfg.validate()?;
    let d = cfg.dim;
    // Teacher, start point and data depend only on the seed, so both loss kinds see the same problem.
    let mut rng = seeded_rng(mix_seed(&[cfg.seed, 0]));
    let wstar = normal_vector(&mut rng, d);
    let mut w = &wstar + uniform_in_ball(&mut rng, d, wstar.norm());
    let mut data = vec![0.0; cfg.n_train * d];
    fill_normals(&mut rng, &mut data);
    let labels_on: Vec<bool> = data.chunks(d).map(|x| dot(wstar.as_slice(), x) > 0.0).collect();
    let labels: Vec<f64> = data.chunks(d).map(|x| dot(wstar.as_slice(), x).max(0.0)).collect();

    let mut order_rng = seeded_rng(mix_seed(&[cfg.seed, 1]));
    let mut order: Vec<usize> = (0..cfg.n_train).collect();
    let mut cursor = cfg.n_train;

    let mut trace = SgdTrace { steps: vec![], err_sq: vec![], kappa: vec![], spot_check_max_rel_err: 0.0 };
    let log_every = cfg.log_every.max(1);
    let record = |step: usize, w: &Vector, trace: &mut SgdTrace| {
        let kappa = kappa_at(cfg.loss_kind, w, &wstar);
        if trace.steps.len() % 100 == 0 {
            if let (Some(k), Some(n)) = (kappa, numeric_kappa(cfg.loss_kind, w, &wstar)) {
                trace.spot_check_max_rel_err = trace.spot_check_max_rel_err.max((k - n).abs() / k);
            }
        }
        trace.steps.push(step);
        trace.err_sq.push((w - &wstar).norm_squared());
        trace.kappa.push(kappa);
    };
    record(0, &w, &mut trace);

    let mut grad = vec![0.0; d];
    for step in 1..=cfg.n_steps {
        if cursor + cfg.batch_size > cfg.n_train {
            shuffle(&mut order, &mut order_rng);
            cursor = 0;
        }
        grad.fill(0.0);
        let wv = w.as_slice();
        for &i in &order[cursor..cursor + cfg.batch_size] {
            let x = &data[i * d..(i + 1) * d];
            let a = dot(wv, x);
            if a <= 0.0 {
                continue;
            }
            // Value residual times x, plus the input-gradient mismatch w - 1{w*.x > 0} w*.
            let r = a - labels[i];
            let on = labels_on[i];
            for k in 0..d {
                grad[k] += r * x[k];
                if cfg.loss_kind == LossKind::H1 {
                    grad[k] += wv[k] - if on { wstar[k] } else { 0.0 };
                }
            }
        }
        cursor += cfg.batch_size;
        let scale = cfg.learning_rate / cfg.batch_size as f64;
        for k in 0..d {
            w[k] -= scale * grad[k];
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step });
        }
        if step % log_every == 0 || step == cfg.n_steps {
            record(step, &w, &mut trace);
        }
    }
    Ok(trace)
}

/// Runs every `(seed, kind)` combination of `base`, in parallel, returned in input order.
pub fn sgd_sweep(base: &SgdConfig, seeds: &[u64], kinds: &[LossKind]) -> Result<Vec<(u64, LossKind, SgdTrace)>> {
    let jobs: Vec<(u64, LossKind)> = seeds.iter().flat_map(|&s| kinds.iter().map(move |&k| (s, k))).collect();
    jobs.par_iter()
        .map(|&(seed, loss_kind)| {
            let cfg = SgdConfig { seed, loss_kind, ..*base };
            sgd_run(&cfg).map(|t| (seed, loss_kind, t))
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn shuffle<R: RngCore>(xs: &mut [usize], rng: &mut R) {
    for i in (1..xs.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        xs.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: LossKind) -> SgdConfig {
        SgdConfig { dim: 4, n_train: 512, batch_size: 32, n_steps: 300, log_every: 10, loss_kind: kind, seed: 3, ..Default::default() }
    }

    #[test]
    fn zero_rate_is_constant() {
        let cfg = SgdConfig { learning_rate: 0.0, ..small(LossKind::H1) };
        let t = sgd_run(&cfg).unwrap();
        assert!(t.err_sq.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(t.steps.len(), 31);
    }

    #[test]
    fn both_losses_converge_and_sobolev_is_ahead() {
        let l = sgd_run(&SgdConfig { learning_rate: 0.05, ..small(LossKind::L2) }).unwrap();
        let h = sgd_run(&SgdConfig { learning_rate: 0.05, ..small(LossKind::H1) }).unwrap();
        assert_eq!(l.err_sq[0], h.err_sq[0]);
        assert!(l.err_sq.last() < l.err_sq.first());
        assert!(h.err_sq.last() < l.err_sq.last());
        assert!(l.spot_check_max_rel_err < 1e-8 && h.spot_check_max_rel_err < 1e-8);
    }

    #[test]
    fn deterministic() {
        assert_eq!(sgd_run(&small(LossKind::L2)).unwrap(), sgd_run(&small(LossKind::L2)).unwrap());
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = SgdConfig { learning_rate: 1e6, ..small(LossKind::L2) };
        assert!(matches!(sgd_run(&cfg), Err(Error::Diverged { .. })));
    }
}
