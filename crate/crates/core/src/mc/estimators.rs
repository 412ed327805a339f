use serde::{Deserialize, Serialize};

use super::convergence::{GradientFamily, TrialPoint};
use super::{mc_mean, McConfig, McEstimate};
use crate::error::{Error, Result};
use crate::num::{ensure_same_dim, Vector};
use crate::LossKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Relu,
    ReluSq,
}

/// Which population quantity to estimate. For `ReluSq`, `L2` is the value term,
/// `H1Semi` the gradient-matching term and `H1` their sum; `H2Parts` reports all three terms separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McKind {
    L2,
    H1Semi,
    H1,
    H2Parts,
}

/// Loss estimate (one entry, or three for `H2Parts`) and gradient estimate (`d`, or `3d`).
#[derive(Debug, Clone, PartialEq)]
pub struct McLossGrad {
    pub loss: McEstimate,
    pub grad: McEstimate,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Pair<'a> {
    w: &'a [f64],
    ws: &'a [f64],
    ww: f64,
    wsws: f64,
    wws: f64,
}

impl<'a> Pair<'a> {
    fn new(w: &'a [f64], ws: &'a [f64]) -> Self {
        Self { w, ws, ww: dot(w, w), wsws: dot(ws, ws), wws: dot(w, ws) }
    }
}

/// Per-sample value loss and gradient of the ReLU unit.
fn relu_l2(p: &Pair, x: &[f64], loss: &mut f64, grad: &mut [f64]) {
    let a = dot(p.w, x);
    let b = dot(p.ws, x);
    let r = a.max(0.0) - b.max(0.0);
    *loss = 0.5 * r * r;
    let s = if a > 0.0 { r } else { 0.0 };
    for (g, xi) in grad.iter_mut().zip(x) {
        *g = s * xi;
    }
}

/// Per-sample derivative seminorm with frozen indicators.
fn relu_semi(p: &Pair, x: &[f64], loss: &mut f64, grad: &mut [f64]) {
    let ia = (dot(p.w, x) > 0.0) as u8 as f64;
    let ib = (dot(p.ws, x) > 0.0) as u8 as f64;
    *loss = 0.5 * (ia * p.ww - 2.0 * ia * ib * p.wws + ib * p.wsws);
    for ((g, wi), wsi) in grad.iter_mut().zip(p.w).zip(p.ws) {
        *g = ia * (wi - ib * wsi);
    }
}

fn relusq_i1(p: &Pair, x: &[f64], loss: &mut f64, grad: &mut [f64]) {
    let sa = dot(p.w, x).max(0.0);
    let sb = dot(p.ws, x).max(0.0);
    let r = sa * sa - sb * sb;
    *loss = 0.5 * r * r;
    let s = 2.0 * r * sa;
    for (g, xi) in grad.iter_mut().zip(x) {
        *g = s * xi;
    }
}

fn relusq_i2(p: &Pair, x: &[f64], loss: &mut f64, grad: &mut [f64]) {
    let a = dot(p.w, x);
    let sa = a.max(0.0);
    let sb = dot(p.ws, x).max(0.0);
    let ia = (a > 0.0) as u8 as f64;
    *loss = 2.0 * (sa * sa * p.ww - 2.0 * sa * sb * p.wws + sb * sb * p.wsws);
    let cx = 4.0 * ia * (sa * p.ww - sb * p.wws);
    for (((g, xi), wi), wsi) in grad.iter_mut().zip(x).zip(p.w).zip(p.ws) {
        *g = cx * xi + 4.0 * sa * (sa * wi - sb * wsi);
    }
}

fn relusq_i3(p: &Pair, x: &[f64], loss: &mut f64, grad: &mut [f64]) {
    let ia = (dot(p.w, x) > 0.0) as u8 as f64;
    let ib = (dot(p.ws, x) > 0.0) as u8 as f64;
    *loss = 2.0 * (ia * p.ww * p.ww - 2.0 * ia * ib * p.wws * p.wws + ib * p.wsws * p.wsws);
    for ((g, wi), wsi) in grad.iter_mut().zip(p.w).zip(p.ws) {
        *g = 8.0 * ia * (p.ww * wi - ib * p.wws * wsi);
    }
}

type Kernel = fn(&Pair, &[f64], &mut f64, &mut [f64]);

fn kernels(model: Model, kind: McKind) -> Result<(Vec<Kernel>, bool)> {
    // The flag says whether the kernels are summed into one term.
    Ok(match (model, kind) {
        (Model::Relu, McKind::L2) => (vec![relu_l2 as Kernel], true),
        (Model::Relu, McKind::H1Semi) => (vec![relu_semi as Kernel], true),
        (Model::Relu, McKind::H1) => (vec![relu_l2 as Kernel, relu_semi], true),
        (Model::Relu, McKind::H2Parts) => return Err(Error::Unsupported("H2 parts need the squared-ReLU model")),
        (Model::ReluSq, McKind::L2) => (vec![relusq_i1 as Kernel], true),
        (Model::ReluSq, McKind::H1Semi) => (vec![relusq_i2 as Kernel], true),
        (Model::ReluSq, McKind::H1) => (vec![relusq_i1 as Kernel, relusq_i2], true),
        (Model::ReluSq, McKind::H2Parts) => (vec![relusq_i1 as Kernel, relusq_i2, relusq_i3], false),
    })
}

pub fn mc_loss_and_grad(model: Model, kind: McKind, w: &Vector, wstar: &Vector, cfg: &McConfig) -> Result<McLossGrad> {
    ensure_same_dim(w, wstar)?;
    if w.len() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, got: w.len() });
    }
    if wstar.norm() == 0.0 {
        return Err(Error::ZeroTeacher);
    }
    let (ks, summed) = kernels(model, kind)?;
    let d = cfg.dim;
    let terms = if summed { 1 } else { ks.len() };
    let (wv, wsv) = (w.as_slice(), wstar.as_slice());
    let est = mc_mean(cfg, terms * (d + 1), |x, out| {
        let pair = Pair::new(wv, wsv);
        out.fill(0.0);
        let mut loss = 0.0;
        let mut grad = vec![0.0; d];
        for (i, k) in ks.iter().enumerate() {
            k(&pair, x, &mut loss, &mut grad);
            let slot = if summed { 0 } else { i };
            out[slot] += loss;
            let base = terms + slot * d;
            for (o, g) in out[base..base + d].iter_mut().zip(&grad) {
                *o += g;
            }
        }
    })?;
    Ok(McLossGrad { loss: est.slice(0..terms), grad: est.slice(terms..terms * (d + 1)) })
}

/// Per-sample negative gradients `-grad_{w_j}` of the K-node losses, stacked node by node.
fn multinode_sample(w: &[Vec<f64>], ws: &[Vec<f64>], kind: LossKind, x: &[f64], out: &mut [f64]) {
    let d = x.len();
    let act: Vec<f64> = w.iter().map(|wj| dot(wj, x)).collect();
    let resid: f64 = act.iter().map(|a| a.max(0.0)).sum::<f64>() - ws.iter().map(|v| dot(v, x).max(0.0)).sum::<f64>();
    let mut jac = vec![0.0; d];
    if kind == LossKind::H1 {
        for (wj, &a) in w.iter().zip(&act) {
            if a > 0.0 {
                for (j, v) in jac.iter_mut().zip(wj) {
                    *j += v;
                }
            }
        }
        for v in ws {
            if dot(v, x) > 0.0 {
                for (j, t) in jac.iter_mut().zip(v) {
                    *j -= t;
                }
            }
        }
    }
    for (j, &a) in act.iter().enumerate() {
        let slot = &mut out[j * d..(j + 1) * d];
        if a > 0.0 {
            for i in 0..d {
                slot[i] = -(resid * x[i] + jac[i]);
            }
        } else {
            slot.fill(0.0);
        }
    }
}

/// MC estimate of the K-node negative gradients, laid out as `K * d` entries.
pub fn mc_multinode_grad(w: &[Vector], wstar: &[Vector], kind: LossKind, cfg: &McConfig) -> Result<McEstimate> {
    let d = cfg.dim;
    for v in w.iter().chain(wstar) {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    let wv: Vec<Vec<f64>> = w.iter().map(|v| v.as_slice().to_vec()).collect();
    let wsv: Vec<Vec<f64>> = wstar.iter().map(|v| v.as_slice().to_vec()).collect();
    mc_mean(cfg, w.len() * d, |x, out| multinode_sample(&wv, &wsv, kind, x, out))
}

/// Closed-form gradients of every kind in the family, stacked in [`GradientFamily::kinds`] order.
pub fn family_closed_form(family: GradientFamily, point: &TrialPoint) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    match family {
        GradientFamily::Relu => {
            let b = crate::relu1::population_gradients(&point.students[0], &point.teachers[0])?;
            for g in [b.grad_l2, b.grad_semi, b.grad_h1] {
                out.extend(g.iter());
            }
        }
        GradientFamily::ReluSq => {
            let b = crate::relusq::h2_gradients(&point.students[0], &point.teachers[0])?;
            for g in [b.grad_i1, b.grad_i2, b.grad_i3] {
                out.extend(g.iter());
            }
        }
        GradientFamily::Multinode => {
            for kind in [LossKind::L2, LossKind::H1] {
                for g in crate::multinode::multinode_gradients(&point.students, &point.teachers, kind)? {
                    out.extend(g.iter());
                }
            }
        }
    }
    Ok(out)
}

/// MC estimates matching [`family_closed_form`], all kinds from one shared sample stream.
pub fn family_mc(family: GradientFamily, point: &TrialPoint, cfg: &McConfig) -> Result<McEstimate> {
    let d = cfg.dim;
    for v in point.students.iter().chain(&point.teachers) {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    match family {
        GradientFamily::Relu | GradientFamily::ReluSq => {
            let (w, ws) = (point.students[0].as_slice(), point.teachers[0].as_slice());
            let ks: [Kernel; 3] = if family == GradientFamily::Relu {
                [relu_l2, relu_semi, relu_l2]
            } else {
                [relusq_i1, relusq_i2, relusq_i3]
            };
            mc_mean(cfg, 3 * d, |x, out| {
                let pair = Pair::new(w, ws);
                let mut loss = 0.0;
                let (first, rest) = out.split_at_mut(d);
                let (second, third) = rest.split_at_mut(d);
                ks[0](&pair, x, &mut loss, first);
                ks[1](&pair, x, &mut loss, second);
                if family == GradientFamily::Relu {
                    for i in 0..d {
                        third[i] = first[i] + second[i];
                    }
                } else {
                    ks[2](&pair, x, &mut loss, third);
                }
            })
        }
        GradientFamily::Multinode => {
            let k = point.students.len();
            let wv: Vec<Vec<f64>> = point.students.iter().map(|v| v.as_slice().to_vec()).collect();
            let wsv: Vec<Vec<f64>> = point.teachers.iter().map(|v| v.as_slice().to_vec()).collect();
            mc_mean(cfg, 2 * k * d, |x, out| {
                let (l2, h1) = out.split_at_mut(k * d);
                multinode_sample(&wv, &wsv, LossKind::L2, x, l2);
                multinode_sample(&wv, &wsv, LossKind::H1, x, h1);
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relu1::{population_gradients, population_losses};
    use crate::relusq::h2_gradients;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn exact_zero_at_teacher() {
        let ws = v(&[0.3, -0.7, 1.1]);
        for (model, kind) in [(Model::Relu, McKind::L2), (Model::Relu, McKind::H1), (Model::ReluSq, McKind::H2Parts)] {
            let r = mc_loss_and_grad(model, kind, &ws, &ws, &McConfig::new(5000, 3, 3)).unwrap();
            assert!(r.grad.mean.iter().all(|&m| m == 0.0));
            assert!(r.grad.std_error.iter().all(|&s| s == 0.0));
            assert!(r.loss.mean.iter().all(|&m| m == 0.0));
        }
    }

    #[test]
    fn relu_semi_orthogonal_example() {
        let cfg = McConfig::new(1_000_000, 11, 2);
        let r = mc_loss_and_grad(Model::Relu, McKind::H1Semi, &v(&[0.0, 1.0]), &v(&[1.0, 0.0]), &cfg).unwrap();
        for z in r.grad.z_scores(&[-0.25, 0.5]) {
            assert!(z.abs() < 4.0, "z = {z}");
        }
    }

    #[test]
    fn relu_matches_closed_forms() {
        let w = v(&[0.8, -0.4, 0.5]);
        let ws = v(&[1.0, 0.3, -0.2]);
        let cfg = McConfig::new(400_000, 21, 3);
        let b = population_gradients(&w, &ws).unwrap();
        let (l, j) = population_losses(&w, &ws).unwrap();
        let r = mc_loss_and_grad(Model::Relu, McKind::H1, &w, &ws, &cfg).unwrap();
        assert!(r.grad.standardized_error(b.grad_h1.as_slice()) < 4.0);
        assert!(r.loss.standardized_error(&[l + j]) < 4.0);
    }

    #[test]
    fn relusq_matches_closed_forms() {
        let w = v(&[0.8, 0.3]);
        let ws = v(&[1.0, 0.0]);
        let cfg = McConfig::new(1_000_000, 5, 2);
        let r = mc_loss_and_grad(Model::ReluSq, McKind::H2Parts, &w, &ws, &cfg).unwrap();
        let b = h2_gradients(&w, &ws).unwrap();
        for (i, g) in [&b.grad_i1, &b.grad_i2, &b.grad_i3].iter().enumerate() {
            for z in r.grad.slice(2 * i..2 * i + 2).z_scores(g.as_slice()) {
                assert!(z.abs() < 4.0, "term {i}: z = {z}");
            }
        }
    }

    #[test]
    fn relu_rejects_h2_parts() {
        let w = v(&[1.0]);
        assert!(mc_loss_and_grad(Model::Relu, McKind::H2Parts, &w, &w, &McConfig::new(10, 1, 1)).is_err());
    }
}
