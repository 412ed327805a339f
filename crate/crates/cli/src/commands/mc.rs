use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};
use sobolev_core::mc::rng::mix_seed;
use sobolev_core::mc::{convergence_study, pointwise_check, sgd_sweep, GradientFamily, SgdConfig};

use crate::config::{parse_kinds, Params};
use crate::error::{ensure, CliError, CliResult};
use crate::output::CsvTable;
use crate::row;

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct VerifyArgs {
    /// Dimensions [default: 4,16,64]
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Smallest sample size, as log2 [default: 10]
    #[arg(long)]
    pub n_min: Option<u32>,
    /// Largest sample size, as log2 [default: 17]
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Random (w, w*) trials averaged per cell [default: 64]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Points per dimension for the pointwise check [default: 3]
    #[arg(long)]
    pub pointwise_points: Option<usize>,
    /// Samples per pointwise estimate [default: 1000000]
    #[arg(long)]
    pub pointwise_n: Option<u64>,
    /// Gradient families: relu, relu_sq, multinode [default: all]
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub n_min: u32,
    pub n_max: u32,
    pub trials: usize,
    pub pointwise_points: usize,
    pub pointwise_n: u64,
    pub families: Vec<String>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            seed: 0,
            dims: vec![4, 16, 64],
            n_min: 10,
            n_max: 17,
            trials: 64,
            pointwise_points: 3,
            pointwise_n: 1_000_000,
            families: GradientFamily::ALL.iter().map(|f| f.model_name().to_string()).collect(),
        }
    }
}

fn family(name: &str) -> CliResult<GradientFamily> {
    GradientFamily::ALL
        .into_iter()
        .find(|f| f.model_name() == name)
        .ok_or_else(|| CliError::Validation(format!("unknown gradient family `{name}`")))
}

impl Params for VerifyParams {
    const NAME: &'static str = "verify-gradients";

    fn validate(&self) -> CliResult<()> {
        ensure(!self.dims.is_empty() && self.dims.iter().all(|&d| d >= 2), || "dims must be >= 2".into())?;
        ensure(self.n_min <= self.n_max && self.n_max <= 30, || "need n_min <= n_max <= 30".into())?;
        ensure(self.trials >= 1 && self.pointwise_n >= 2, || "need trials >= 1 and pointwise_n >= 2".into())?;
        ensure(!self.families.is_empty(), || "no gradient families selected".into())?;
        self.families.iter().try_for_each(|f| family(f).map(|_| ()))
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let grid: Vec<u32> = (self.n_min..=self.n_max).collect();
        let mut conv = CsvTable::new(&["model", "kind", "dim", "log2_n", "mse"]);
        let mut point = CsvTable::new(&["model", "kind", "dim", "point_id", "standardized_error", "max_abs_z"]);
        for (i, name) in self.families.iter().enumerate() {
            let fam = family(name)?;
            for r in convergence_study(fam, &self.dims, &grid, self.trials, mix_seed(&[self.seed, 8, i as u64]))? {
                conv.push(row![r.model, r.kind, r.dim, r.log2_n, r.mse]);
            }
            if self.pointwise_points > 0 {
                for r in pointwise_check(fam, &self.dims, self.pointwise_points, self.pointwise_n, mix_seed(&[self.seed, 9, i as u64]))? {
                    point.push(row![r.model, r.kind, r.dim, r.point_id, r.standardized_error, r.max_abs_z]);
                }
            }
        }
        Ok(vec![conv.write(out, "convergence.csv")?, point.write(out, "pointwise.csv")?])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SgdArgs {
    /// Dimension [default: 16]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Minibatch size [default: 64]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Training-set size [default: 10000]
    #[arg(long)]
    pub n_train: Option<usize>,
    /// Learning rate [default: 0.01]
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// SGD steps [default: 2000]
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Number of seeds, derived from the base seed [default: 12]
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Record every n-th step [default: 10]
    #[arg(long)]
    pub log_every: Option<usize>,
    /// l2, h1 or both [default: both]
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdParams {
    pub seed: u64,
    pub dim: usize,
    pub batch_size: usize,
    pub n_train: usize,
    pub learning_rate: f64,
    pub n_steps: usize,
    pub seeds: usize,
    pub log_every: usize,
    pub kind: String,
}

impl Default for SgdParams {
    fn default() -> Self {
        let c = SgdConfig::default();
        Self {
            seed: 0,
            dim: c.dim,
            batch_size: c.batch_size,
            n_train: c.n_train,
            learning_rate: c.learning_rate,
            n_steps: c.n_steps,
            seeds: 12,
            log_every: c.log_every,
            kind: "both".into(),
        }
    }
}

impl Params for SgdParams {
    const NAME: &'static str = "sgd";

    fn validate(&self) -> CliResult<()> {
        parse_kinds(&self.kind)?;
        ensure(self.dim >= 2, || "dim must be at least 2".into())?;
        ensure(self.batch_size >= 1 && self.batch_size <= self.n_train, || "need 1 <= batch_size <= n_train".into())?;
        ensure(self.learning_rate >= 0.0 && self.learning_rate.is_finite(), || "learning_rate must be non-negative".into())?;
        ensure(self.seeds >= 1 && self.log_every >= 1, || "need seeds >= 1 and log_every >= 1".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let base = SgdConfig {
            dim: self.dim,
            batch_size: self.batch_size,
            n_train: self.n_train,
            learning_rate: self.learning_rate,
            n_steps: self.n_steps,
            seed: self.seed,
            loss_kind: sobolev_core::LossKind::L2,
            log_every: self.log_every,
        };
        let seeds: Vec<u64> = (0..self.seeds as u64).map(|i| mix_seed(&[self.seed, 10, i])).collect();
        let mut t = CsvTable::new(&["seed", "kind", "step", "err_sq", "kappa"]);
        for (seed, kind, trace) in sgd_sweep(&base, &seeds, &parse_kinds(&self.kind)?)? {
            for ((step, e), k) in trace.steps.iter().zip(&trace.err_sq).zip(&trace.kappa) {
                t.push(row![seed, kind.as_str(), *step, *e, *k]);
            }
        }
        Ok(vec![t.write(out, "sgd.csv")?])
    }
}
