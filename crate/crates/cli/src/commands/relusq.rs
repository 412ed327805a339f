use std::path::Path;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sobolev_core::num::rk4_integrate_every;
use sobolev_core::relusq::{descent_check, h2_flow_rhs, H2Objective};

use super::single::check_grid;
use super::{basin_pair, nan_on_error, rng_for};
use crate::config::Params;
use crate::error::{ensure, CliResult};
use crate::output::CsvTable;
use crate::row;

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct RelusqArgs {
    /// Dimension [default: 4]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Random basin points for the descent inequalities [default: 1000]
    #[arg(long)]
    pub points: Option<usize>,
    /// Flow initializations [default: 100]
    #[arg(long)]
    pub inits: Option<usize>,
    /// RK4 step [default: 0.001]
    #[arg(long)]
    pub step: Option<f64>,
    /// Final time [default: 5]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write every n-th step [default: 50]
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelusqParams {
    pub seed: u64,
    pub dim: usize,
    pub points: usize,
    pub inits: usize,
    pub step: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl Default for RelusqParams {
    fn default() -> Self {
        Self { seed: 0, dim: 4, points: 1000, inits: 100, step: 1e-3, t_end: 5.0, record_every: 50 }
    }
}

impl Params for RelusqParams {
    const NAME: &'static str = "relusq";

    fn validate(&self) -> CliResult<()> {
        ensure(self.dim >= 1 && self.points >= 1 && self.inits >= 1, || "need dim, points and inits >= 1".into())?;
        check_grid(self.step, self.t_end, self.record_every)
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut descent = CsvTable::new(&["point_id", "inner_i1", "inner_i2", "inner_i3", "degenerate"]);
        for id in 0..self.points {
            let (w, wstar) = basin_pair(&mut rng_for(self.seed, &[4, id as u64]), self.dim);
            let c = descent_check(&w, &wstar)?;
            descent.push(row![id, c.inner[0], c.inner[1], c.inner[2], c.degenerate]);
        }
        let objectives = [H2Objective::I1, H2Objective::H2];
        let runs: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..self.inits)
            .into_par_iter()
            .map(|id| {
                let (w0, wstar) = basin_pair(&mut rng_for(self.seed, &[5, id as u64]), self.dim);
                objectives
                    .iter()
                    .map(|&obj| {
                        let tr = rk4_integrate_every(|w| nan_on_error(h2_flow_rhs(obj, w, &wstar), self.dim), &w0, self.step, self.t_end, &wstar, self.record_every)?;
                        Ok((tr.times, tr.v_values))
                    })
                    .collect::<sobolev_core::Result<Vec<_>>>()
            })
            .collect::<sobolev_core::Result<_>>()?;
        let mut flow = CsvTable::new(&["init_id", "objective", "t", "v"]);
        for (id, per_obj) in runs.iter().enumerate() {
            for (obj, (times, vs)) in objectives.iter().zip(per_obj) {
                for (t, v) in times.iter().zip(vs) {
                    flow.push(row![id, obj.as_str(), *t, *v]);
                }
            }
        }
        Ok(vec![descent.write(out, "relusq_descent.csv")?, flow.write(out, "relusq_flow.csv")?])
    }
}
