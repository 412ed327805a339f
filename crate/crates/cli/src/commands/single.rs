//! Single-unit experiments: Hessian landscape, one-step GD comparison and gradient flows.

use std::f64::consts::PI;
use std::path::Path;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sobolev_core::mc::rng::normal_vector;
use sobolev_core::num::{pair_geometry, rk4_integrate_every, symmetric_eigs, Vector};
use sobolev_core::relu1::{flow_quadratic_forms, flow_rhs, gd_compare, gd_step_matrices, hessians, HessianReport};
use sobolev_core::LossKind;

use super::{basin_pair, nan_on_error, rng_for};
use crate::config::{parse_kinds, Params};
use crate::error::{ensure, CliResult};
use crate::output::CsvTable;
use crate::row;

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct LandscapeArgs {
    /// Dimension of the theta sweep [default: 2]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of theta values in (0, pi) [default: 64]
    #[arg(long)]
    pub theta_grid: Option<usize>,
    /// |w*| / |w| along the sweep [default: 1]
    #[arg(long)]
    pub norm_ratio: Option<f64>,
    /// Random pairs inside the convexity region, per dimension [default: 1000]
    #[arg(long)]
    pub random_points: Option<usize>,
    /// Dimensions of the random pairs [default: 2,8,32]
    #[arg(long, value_delimiter = ',')]
    pub random_dims: Option<Vec<usize>>,
    /// Theta grid size on [0, pi/2) for the quadratic-form matrices [default: 1000]
    #[arg(long)]
    pub quad_grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeParams {
    pub seed: u64,
    pub dim: usize,
    pub theta_grid: usize,
    pub norm_ratio: f64,
    pub random_points: usize,
    pub random_dims: Vec<usize>,
    pub quad_grid: usize,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        Self { seed: 0, dim: 2, theta_grid: 64, norm_ratio: 1.0, random_points: 1000, random_dims: vec![2, 8, 32], quad_grid: 1000 }
    }
}

fn landscape_row(t: &mut CsvTable, r: &HessianReport) {
    let g = &r.geometry;
    t.push(row![
        g.theta,
        g.alpha,
        r.numeric_kappa_l2(),
        r.numeric_kappa_h1(),
        r.spectrum_l2.min(),
        *r.eigenvalues_h1.last().expect("d >= 2")
    ]);
}

fn spectra_rows(t: &mut CsvTable, dim: usize, id: usize, r: &HessianReport) {
    let cf = &r.closed_form;
    let sets = [
        ("l2", &r.spectrum_l2.eigenvalues, cf.l2_max, cf.l2_min, cf.l2_bulk),
        ("h1", &r.eigenvalues_h1, cf.h1_max, cf.h1_min, cf.h1_bulk),
    ];
    for (kind, eigs, max, min, bulk) in sets {
        let mut e = eigs.clone();
        e.sort_by(|a, b| b.total_cmp(a));
        let bulk_dev = e[1..e.len() - 1].iter().map(|x| (x - bulk).abs()).fold(0.0, f64::max);
        t.push(row![dim, id, kind, e[0], max, e[e.len() - 1], min, bulk, bulk_dev]);
    }
}

impl Params for LandscapeParams {
    const NAME: &'static str = "landscape";

    fn validate(&self) -> CliResult<()> {
        ensure(self.dim >= 2 && self.random_dims.iter().all(|&d| d >= 2), || "dimensions must be at least 2".into())?;
        ensure(self.theta_grid >= 1 && self.quad_grid >= 1, || "grids need at least one point".into())?;
        ensure(self.norm_ratio > 0.0 && self.norm_ratio.is_finite(), || "norm_ratio must be positive".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut land = CsvTable::new(&["theta", "alpha", "kappa_l2", "kappa_h1", "lam_min_l2", "lam_min_h1"]);
        let mut spectra = CsvTable::new(&[
            "dim",
            "point_id",
            "kind",
            "lam_max",
            "lam_max_expected",
            "lam_min",
            "lam_min_expected",
            "bulk_expected",
            "bulk_max_dev",
        ]);
        let grid: Vec<HessianReport> = (0..self.theta_grid)
            .into_par_iter()
            .map(|i| {
                let theta = PI * (i + 1) as f64 / (self.theta_grid + 1) as f64;
                let wstar = Vector::from_fn(self.dim, |j, _| if j == 0 { self.norm_ratio } else { 0.0 });
                let w = Vector::from_fn(self.dim, |j, _| match j {
                    0 => theta.cos(),
                    1 => theta.sin(),
                    _ => 0.0,
                });
                hessians(&w, &wstar)
            })
            .collect::<sobolev_core::Result<_>>()?;
        for r in &grid {
            landscape_row(&mut land, r);
        }
        for &dim in &self.random_dims {
            let reports: Vec<HessianReport> = (0..self.random_points)
                .into_par_iter()
                .map(|id| {
                    let mut rng = rng_for(self.seed, &[1, dim as u64, id as u64]);
                    loop {
                        let wstar = normal_vector(&mut rng, dim);
                        let w = normal_vector(&mut rng, dim);
                        let g = pair_geometry(&w, &wstar)?;
                        if g.theta > 0.0 && 4.0 * g.alpha_sin_sq() < 1.0 {
                            return hessians(&w, &wstar);
                        }
                    }
                })
                .collect::<sobolev_core::Result<_>>()?;
            for (id, r) in reports.iter().enumerate() {
                landscape_row(&mut land, r);
                spectra_rows(&mut spectra, dim, id, r);
            }
        }
        let mut quad = CsvTable::new(&[
            "theta",
            "lambda",
            "lam_min_m1",
            "lam_min_m2",
            "lam_min_n1",
            "lam_min_n2",
            "lam_min_n3",
            "lam_min_n4",
            "lam_max_n5",
        ]);
        for i in 0..self.quad_grid {
            let theta = PI / 2.0 * i as f64 / self.quad_grid as f64;
            let f = flow_quadratic_forms(theta)?;
            let n = gd_step_matrices(theta)?;
            let min = |m| symmetric_eigs(m).map(|s| s.min());
            quad.push(row![
                theta,
                f.lambda_theta,
                min(&f.m1)?,
                min(&f.m2)?,
                min(&n[0])?,
                min(&n[1])?,
                min(&n[2])?,
                min(&n[3])?,
                symmetric_eigs(&n[4])?.max()
            ]);
        }
        Ok(vec![land.write(out, "landscape.csv")?, spectra.write(out, "spectra.csv")?, quad.write(out, "quadforms.csv")?])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct GdCompareArgs {
    /// Random basin points (point 0 is the collinear case w = w*/2) [default: 500]
    #[arg(long)]
    pub points: Option<usize>,
    /// Dimension [default: 8]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Step size as a fraction of the largest guaranteed step [default: 0.9]
    #[arg(long)]
    pub eta_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdCompareParams {
    pub seed: u64,
    pub points: usize,
    pub dim: usize,
    pub eta_factor: f64,
}

impl Default for GdCompareParams {
    fn default() -> Self {
        Self { seed: 0, points: 500, dim: 8, eta_factor: 0.9 }
    }
}

impl Params for GdCompareParams {
    const NAME: &'static str = "gd-compare";

    fn validate(&self) -> CliResult<()> {
        ensure(self.dim >= 1 && self.points >= 1, || "need dim >= 1 and points >= 1".into())?;
        ensure(self.eta_factor > 0.0 && self.eta_factor.is_finite(), || "eta_factor must be positive".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut t = CsvTable::new(&["point_id", "theta", "norm_w", "norm_wstar", "eta", "max_step_c", "err_l2", "err_h1", "gain_f", "in_basin"]);
        for id in 0..self.points {
            let mut rng = rng_for(self.seed, &[2, id as u64]);
            let (w, wstar) = if id == 0 {
                let wstar = normal_vector(&mut rng, self.dim);
                (&wstar * 0.5, wstar)
            } else {
                basin_pair(&mut rng, self.dim)
            };
            let g = pair_geometry(&w, &wstar)?;
            let probe = gd_compare(&w, &wstar, 1.0)?;
            let eta = self.eta_factor * probe.max_step_c;
            let r = gd_compare(&w, &wstar, eta)?;
            t.push(row![id, g.theta, g.norm_w, g.norm_wstar, eta, r.max_step_c, r.err_l2, r.err_h1, r.gain_f, r.in_basin]);
        }
        Ok(vec![t.write(out, "gd_compare.csv")?])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct FlowArgs {
    /// l2, h1 or both [default: both]
    #[arg(long)]
    pub kind: Option<String>,
    /// Dimension [default: 8]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Random basin initializations [default: 100]
    #[arg(long)]
    pub inits: Option<usize>,
    /// RK4 step [default: 0.001]
    #[arg(long)]
    pub step: Option<f64>,
    /// Final time [default: 10]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write every n-th step [default: 100]
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub seed: u64,
    pub kind: String,
    pub dim: usize,
    pub inits: usize,
    pub step: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self { seed: 0, kind: "both".into(), dim: 8, inits: 100, step: 1e-3, t_end: 10.0, record_every: 100 }
    }
}

pub(crate) fn check_grid(step: f64, t_end: f64, record_every: usize) -> CliResult<()> {
    ensure(step > 0.0 && t_end.is_finite() && step <= t_end, || format!("need 0 < step <= t_end, got {step}, {t_end}"))?;
    ensure(record_every >= 1, || "record_every must be at least 1".into())
}

impl Params for FlowParams {
    const NAME: &'static str = "flow";

    fn validate(&self) -> CliResult<()> {
        parse_kinds(&self.kind)?;
        ensure(self.dim >= 1 && self.inits >= 1, || "need dim >= 1 and inits >= 1".into())?;
        check_grid(self.step, self.t_end, self.record_every)
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let kinds = parse_kinds(&self.kind)?;
        let runs: Vec<Vec<(LossKind, Vec<f64>, Vec<f64>)>> = (0..self.inits)
            .into_par_iter()
            .map(|id| {
                let mut rng = rng_for(self.seed, &[3, id as u64]);
                let (w0, wstar) = basin_pair(&mut rng, self.dim);
                kinds
                    .iter()
                    .map(|&kind| {
                        let tr = rk4_integrate_every(|w| nan_on_error(flow_rhs(kind, w, &wstar), self.dim), &w0, self.step, self.t_end, &wstar, self.record_every)?;
                        Ok((kind, tr.times, tr.v_values))
                    })
                    .collect::<sobolev_core::Result<Vec<_>>>()
            })
            .collect::<sobolev_core::Result<_>>()?;
        let mut t = CsvTable::new(&["init_id", "kind", "t", "v"]);
        for (id, per_kind) in runs.iter().enumerate() {
            for (kind, times, vs) in per_kind {
                for (time, v) in times.iter().zip(vs) {
                    t.push(row![id, kind.as_str(), *time, *v]);
                }
            }
        }
        Ok(vec![t.write(out, "flow.csv")?])
    }
}
