use rayon::prelude::*;
use serde::Serialize;

use super::estimators::{family_closed_form, family_mc};
use super::rng::{mix_seed, normal_vector, seeded_rng, uniform_in_ball};
use super::McConfig;
use crate::error::{Error, Result};
use crate::num::Vector;

/// Gradients that share one MC sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientFamily {
    /// ReLU unit: value loss, derivative seminorm, their sum.
    Relu,
    /// Squared-ReLU unit: value, gradient and Hessian matching terms.
    ReluSq,
    /// Two ReLU nodes with orthonormal teachers, value and Sobolev losses.
    Multinode,
}

impl GradientFamily {
    pub const ALL: [GradientFamily; 3] = [GradientFamily::Relu, GradientFamily::ReluSq, GradientFamily::Multinode];

    pub fn model_name(self) -> &'static str {
        match self {
            GradientFamily::Relu => "relu",
            GradientFamily::ReluSq => "relu_sq",
            GradientFamily::Multinode => "multinode",
        }
    }

    pub fn kinds(self) -> &'static [&'static str] {
        match self {
            GradientFamily::Relu => &["l2", "h1_semi", "h1"],
            GradientFamily::ReluSq => &["i1", "i2", "i3"],
            GradientFamily::Multinode => &["l2", "h1"],
        }
    }

    fn id(self) -> u64 {
        self as u64
    }

    fn nodes(self) -> usize {
        match self {
            GradientFamily::Multinode => 2,
            _ => 1,
        }
    }

    /// Entries per kind in the stacked gradient vector.
    pub fn block_len(self, dim: usize) -> usize {
        self.nodes() * dim
    }
}

/// Students and teachers of one random trial.
#[derive(Debug, Clone)]
pub struct TrialPoint {
    pub students: Vec<Vector>,
    pub teachers: Vec<Vector>,
}

/// Random trial configuration: `w* ~ N(0, I)` and `w = w* + e` with `e` uniform in the ball of
/// radius `|w*|`. Multi-node trials use orthonormal teachers and unit-ball offsets.
pub fn trial_point(family: GradientFamily, dim: usize, seed: u64) -> Result<TrialPoint> {
    let mut rng = seeded_rng(seed);
    match family {
        GradientFamily::Relu | GradientFamily::ReluSq => loop {
            let ws = normal_vector(&mut rng, dim);
            let r = ws.norm();
            if r < 1e-3 {
                continue;
            }
            let w = &ws + uniform_in_ball(&mut rng, dim, r);
            if w.norm() > 1e-3 * r {
                return Ok(TrialPoint { students: vec![w], teachers: vec![ws] });
            }
        },
        GradientFamily::Multinode => {
            if dim < 2 {
                return Err(Error::InvalidArgument("two teachers need dim >= 2".into()));
            }
            let a = normal_vector(&mut rng, dim);
            let a = &a / a.norm();
            let b = normal_vector(&mut rng, dim);
            let b = &b - &a * a.dot(&b);
            let b = &b / b.norm();
            let teachers = vec![a, b];
            let students = teachers.iter().map(|t| t + uniform_in_ball(&mut rng, dim, 0.9)).collect();
            Ok(TrialPoint { students, teachers })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub model: &'static str,
    pub kind: &'static str,
    pub dim: usize,
    pub log2_n: u32,
    pub mse: f64,
}

/// Mean over trials of the per-entry squared error between MC and closed-form gradients.
pub fn convergence_study(family: GradientFamily, dims: &[usize], log2_grid: &[u32], trials: usize, seed: u64) -> Result<Vec<ConvergenceRow>> {
    if trials == 0 || log2_grid.is_empty() || dims.is_empty() {
        return Err(Error::InvalidArgument("need at least one trial, dimension and sample size".into()));
    }
    if log2_grid.iter().any(|&n| n > 40) {
        return Err(Error::InvalidArgument("log2 sample size above 40".into()));
    }
    let n_kinds = family.kinds().len();
    let tasks: Vec<(usize, usize)> = dims.iter().flat_map(|&d| (0..trials).map(move |t| (d, t))).collect();
    // errors[task][n_index][kind]
    let errors: Vec<Vec<Vec<f64>>> = tasks
        .par_iter()
        .map(|&(dim, trial)| -> Result<Vec<Vec<f64>>> {
            let point = trial_point(family, dim, mix_seed(&[seed, family.id(), dim as u64, trial as u64]))?;
            let cf = family_closed_form(family, &point)?;
            let block = family.block_len(dim);
            log2_grid
                .iter()
                .map(|&ln| {
                    let cfg = McConfig::new(1u64 << ln, mix_seed(&[seed, family.id(), dim as u64, trial as u64, ln as u64]), dim);
                    let est = family_mc(family, &point, &cfg)?;
                    Ok((0..n_kinds)
                        .map(|k| {
                            let r = k * block..(k + 1) * block;
                            est.mean[r.clone()].iter().zip(&cf[r]).map(|(m, c)| (m - c).powi(2)).sum::<f64>() / block as f64
                        })
                        .collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (k, &kind) in family.kinds().iter().enumerate() {
        for (di, &dim) in dims.iter().enumerate() {
            for (ni, &ln) in log2_grid.iter().enumerate() {
                let sum: f64 = (0..trials).map(|t| errors[di * trials + t][ni][k]).sum();
                rows.push(ConvergenceRow { model: family.model_name(), kind, dim, log2_n: ln, mse: sum / trials as f64 });
            }
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log(mse)` against `log(n)` for `(log2_n, mse)` pairs.
pub fn loglog_slope(points: &[(u32, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(l, _)| l as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, m)| m.ln()).collect();
    crate::num::linear_fit(&xs, &ys).0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseRow {
    pub model: &'static str,
    pub kind: &'static str,
    pub dim: usize,
    pub point_id: usize,
    /// Error norm over its standard deviation, `|mean - cf| / sqrt(sum se^2)`.
    pub standardized_error: f64,
    pub max_abs_z: f64,
}

/// Compares MC and closed-form gradients at `points` random trials per dimension.
pub fn pointwise_check(family: GradientFamily, dims: &[usize], points: usize, n_samples: u64, seed: u64) -> Result<Vec<PointwiseRow>> {
    let tasks: Vec<(usize, usize)> = dims.iter().flat_map(|&d| (0..points).map(move |p| (d, p))).collect();
    let per_task: Vec<Vec<PointwiseRow>> = tasks
        .par_iter()
        .map(|&(dim, pid)| -> Result<Vec<PointwiseRow>> {
            let point = trial_point(family, dim, mix_seed(&[seed, family.id(), dim as u64, pid as u64, 1]))?;
            let cf = family_closed_form(family, &point)?;
            let cfg = McConfig::new(n_samples, mix_seed(&[seed, family.id(), dim as u64, pid as u64, 2]), dim);
            let est = family_mc(family, &point, &cfg)?;
            let block = family.block_len(dim);
            Ok(family
                .kinds()
                .iter()
                .enumerate()
                .map(|(k, &kind)| {
                    let r = k * block..(k + 1) * block;
                    let sub = est.slice(r.clone());
                    let max_abs_z = sub.z_scores(&cf[r.clone()]).iter().fold(0.0f64, |m, z| m.max(z.abs()));
                    PointwiseRow {
                        model: family.model_name(),
                        kind,
                        dim,
                        point_id: pid,
                        standardized_error: sub.standardized_error(&cf[r]),
                        max_abs_z,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_points_are_in_the_basin() {
        for s in 0..50 {
            let p = trial_point(GradientFamily::Relu, 4, s).unwrap();
            assert!((&p.students[0] - &p.teachers[0]).norm() <= p.teachers[0].norm());
            let m = trial_point(GradientFamily::Multinode, 4, s).unwrap();
            assert!(m.teachers[0].dot(&m.teachers[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn small_study_has_negative_slope() {
        let rows = convergence_study(GradientFamily::Relu, &[4], &[8, 10, 12, 14], 8, 1).unwrap();
        assert_eq!(rows.len(), 3 * 4);
        for kind in GradientFamily::Relu.kinds() {
            let pts: Vec<(u32, f64)> = rows.iter().filter(|r| r.kind == *kind).map(|r| (r.log2_n, r.mse)).collect();
            assert!(pts.iter().all(|p| p.1 > 0.0 && p.1.is_finite()));
            let slope = loglog_slope(&pts);
            assert!((-1.4..=-0.6).contains(&slope), "{kind}: {slope}");
        }
    }

    #[test]
    fn multinode_family_agrees() {
        let rows = pointwise_check(GradientFamily::Multinode, &[4], 2, 200_000, 3).unwrap();
        assert!(rows.iter().all(|r| r.standardized_error < 4.0), "{rows:?}");
    }
}
