//! Linear-model conditioning/variance study and Chebyshev differentiation checks.

use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};
use sobolev_core::linear::{conditioning, random_design, variance_study, LinearProblem};
use sobolev_core::mc::rng::{mix_seed, normal_vector};
use sobolev_core::num::Vector;
use sobolev_core::spectral::{cheb_diff_matrix, fdm_diff_matrix, monomial_error, SpectralGrid};

use super::rng_for;
use crate::config::Params;
use crate::error::{ensure, CliResult};
use crate::output::CsvTable;
use crate::row;

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct LinearArgs {
    /// Rows of each design [default: 100]
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns of each design [default: 10]
    #[arg(long)]
    pub d: Option<usize>,
    /// Random Gaussian designs [default: 10]
    #[arg(long)]
    pub designs: Option<usize>,
    /// Ridge strengths [default: 0.1,1,10]
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Noise standard deviation [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Noise draws per (design, lambda) [default: 10000]
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearParams {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub designs: usize,
    pub lambdas: Vec<f64>,
    pub sigma: f64,
    pub trials: usize,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self { seed: 0, n: 100, d: 10, designs: 10, lambdas: vec![0.1, 1.0, 10.0], sigma: 1.0, trials: 10_000 }
    }
}

impl Params for LinearParams {
    const NAME: &'static str = "linear";

    fn validate(&self) -> CliResult<()> {
        ensure(self.d >= 1 && self.n >= self.d, || "need 1 <= d <= n".into())?;
        ensure(self.designs >= 1 && self.trials >= 2, || "need designs >= 1 and trials >= 2".into())?;
        ensure(!self.lambdas.is_empty() && self.lambdas.iter().all(|&l| l > 0.0 && l.is_finite()), || "lambdas must be positive".into())?;
        ensure(self.sigma > 0.0 && self.sigma.is_finite(), || "sigma must be positive".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut t = CsvTable::new(&[
            "design_id",
            "lambda",
            "kappa_l2",
            "kappa_h1",
            "var_l2",
            "var_h1",
            "formula_l2",
            "formula_h1",
            "se_l2",
            "se_h1",
        ]);
        for id in 0..self.designs {
            let x = random_design(self.n, self.d, mix_seed(&[self.seed, 11, id as u64]));
            let wstar = normal_vector(&mut rng_for(self.seed, &[12, id as u64]), self.d);
            for (li, &lambda) in self.lambdas.iter().enumerate() {
                let p = LinearProblem::new(x.clone(), wstar.clone(), self.sigma, lambda)?;
                let (kl, kh) = conditioning(&p)?;
                let v = variance_study(&p, self.trials, mix_seed(&[self.seed, 13, id as u64, li as u64]))?;
                t.push(row![id, lambda, kl, kh, v.var_l2, v.var_h1, v.formula_l2, v.formula_h1, v.se_l2, v.se_h1]);
            }
        }
        Ok(vec![t.write(out, "linear.csv")?])
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ChebyshevArgs {
    /// Largest collocation order checked [default: 20]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Orders whose full matrices are written [default: 1,2]
    #[arg(long, value_delimiter = ',')]
    pub dump_orders: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChebyshevParams {
    pub seed: u64,
    pub n_max: usize,
    pub dump_orders: Vec<usize>,
}

impl Default for ChebyshevParams {
    fn default() -> Self {
        Self { seed: 0, n_max: 20, dump_orders: vec![1, 2] }
    }
}

impl Params for ChebyshevParams {
    const NAME: &'static str = "chebyshev";

    fn validate(&self) -> CliResult<()> {
        ensure(self.n_max >= 2 && self.n_max <= 512, || "n_max must be in [2, 512]".into())?;
        ensure(self.dump_orders.iter().all(|&n| n >= 1 && n <= 64), || "dump_orders must be in [1, 64]".into())
    }

    fn execute(&self, out: &Path) -> CliResult<Vec<String>> {
        let mut mono = CsvTable::new(&["n", "k", "max_error", "tolerance"]);
        let mut sin = CsvTable::new(&["method", "n", "max_error"]);
        for n in 1..=self.n_max {
            let g = SpectralGrid::new(n)?;
            for k in 0..=n as u32 {
                mono.push(row![n, k, monomial_error(&g, k), 1e-10 * (n * n) as f64]);
            }
            let err = (&g.diff * g.points.map(f64::sin) - g.points.map(f64::cos)).amax();
            sin.push(row![ "chebyshev", n, err]);
            if n >= 2 {
                let uniform = Vector::from_fn(n + 1, |i, _| -1.0 + 2.0 * i as f64 / n as f64);
                let d = fdm_diff_matrix(&uniform)?;
                let err = (&d * uniform.map(f64::sin) - uniform.map(f64::cos)).amax();
                sin.push(row!["fdm", n, err]);
            }
        }
        let mut mat = CsvTable::new(&["n", "row", "col", "value"]);
        for &n in &self.dump_orders {
            let d = cheb_diff_matrix(n)?;
            for i in 0..=n {
                for j in 0..=n {
                    mat.push(row![n, i, j, d[(i, j)]]);
                }
            }
        }
        Ok(vec![mono.write(out, "chebyshev.csv")?, mat.write(out, "chebyshev_matrix.csv")?, sin.write(out, "chebyshev_sin.csv")?])
    }
}
