//! Linear regression `y = X w* + noise`: least squares against ridge anchored at `w*`.

use nalgebra::Cholesky;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::rng::{fill_normals, mix_seed, seeded_rng};
use crate::num::{symmetric_eigs, Matrix, Vector};

const MIN_GRAM_EIG: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub x_matrix: Matrix,
    pub wstar: Vector,
    pub noise_sigma: f64,
    pub ridge_lambda: f64,
}

impl LinearProblem {
    pub fn new(x_matrix: Matrix, wstar: Vector, noise_sigma: f64, ridge_lambda: f64) -> Result<Self> {
        if x_matrix.ncols() != wstar.len() {
            return Err(Error::DimensionMismatch { expected: x_matrix.ncols(), got: wstar.len() });
        }
        if !(noise_sigma >= 0.0 && ridge_lambda >= 0.0) {
            return Err(Error::InvalidArgument("noise_sigma and ridge_lambda must be non-negative".into()));
        }
        if x_matrix.iter().chain(wstar.iter()).any(|v| !v.is_finite()) || !noise_sigma.is_finite() || !ridge_lambda.is_finite() {
            return Err(Error::InvalidArgument("non-finite problem data".into()));
        }
        Ok(Self { x_matrix, wstar, noise_sigma, ridge_lambda })
    }

    pub fn gram(&self) -> Matrix {
        self.x_matrix.transpose() * &self.x_matrix
    }

    /// Eigenvalues of `X'X`, descending; fails when the smallest is below `1e-10`.
    pub fn gram_spectrum(&self) -> Result<Vec<f64>> {
        let s = symmetric_eigs(&self.gram())?.eigenvalues;
        if *s.last().expect("d >= 1") <= MIN_GRAM_EIG {
            return Err(Error::Singular("X'X is singular"));
        }
        Ok(s)
    }
}

struct Solvers {
    xt: Matrix,
    plain: Cholesky<f64, nalgebra::Dyn>,
    ridge: Cholesky<f64, nalgebra::Dyn>,
    anchor: Vector,
}

impl Solvers {
    fn new(p: &LinearProblem) -> Result<Self> {
        p.gram_spectrum()?;
        let gram = p.gram();
        let d = gram.nrows();
        let plain = Cholesky::new(gram.clone()).ok_or(Error::Singular("X'X is not positive definite"))?;
        let ridge = Cholesky::new(gram + Matrix::identity(d, d) * p.ridge_lambda).ok_or(Error::Singular("X'X + lambda I is not positive definite"))?;
        Ok(Self { xt: p.x_matrix.transpose(), plain, ridge, anchor: &p.wstar * p.ridge_lambda })
    }

    fn fit(&self, y: &Vector) -> (Vector, Vector) {
        let xty = &self.xt * y;
        let w_l2 = self.plain.solve(&xty);
        let w_h1 = self.ridge.solve(&(xty + &self.anchor));
        (w_l2, w_h1)
    }
}

/// `((X'X)^-1 X'y, (X'X + lambda I)^-1 (X'y + lambda w*))`.
pub fn fit_estimators(p: &LinearProblem, y: &Vector) -> Result<(Vector, Vector)> {
    if y.len() != p.x_matrix.nrows() {
        return Err(Error::DimensionMismatch { expected: p.x_matrix.nrows(), got: y.len() });
    }
    Ok(Solvers::new(p)?.fit(y))
}

/// `(kappa(X'X), kappa(X'X + lambda I))` from the numeric spectrum of `X'X`.
pub fn conditioning(p: &LinearProblem) -> Result<(f64, f64)> {
    let s = p.gram_spectrum()?;
    let (hi, lo) = (s[0], *s.last().expect("d >= 1"));
    Ok((hi / lo, (hi + p.ridge_lambda) / (lo + p.ridge_lambda)))
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceStudy {
    /// Empirical in-sample error `E |X (w_hat - w*)|^2`.
    pub var_l2: f64,
    pub var_h1: f64,
    /// `sigma^2 d`.
    pub formula_l2: f64,
    /// `sigma^2 sum s_i^2 / (s_i + lambda)^2` over the eigenvalues `s_i` of `X'X`.
    pub formula_h1: f64,
    /// Standard errors of the two empirical means.
    pub se_l2: f64,
    pub se_h1: f64,
    pub mean_l2: Vec<f64>,
    pub mean_h1: Vec<f64>,
    /// Per-coordinate standard errors of the estimator means.
    pub mean_se_l2: Vec<f64>,
    pub mean_se_h1: Vec<f64>,
    pub trials: usize,
}

const BLOCK: usize = 256;

#[derive(Clone)]
struct Sums {
    err: [f64; 2],
    err_sq: [f64; 2],
    w: [Vector; 2],
    w_sq: [Vector; 2],
}

impl Sums {
    fn zeros(d: usize) -> Self {
        Self { err: [0.0; 2], err_sq: [0.0; 2], w: [Vector::zeros(d), Vector::zeros(d)], w_sq: [Vector::zeros(d), Vector::zeros(d)] }
    }

    fn add(&mut self, o: &Sums) {
        for k in 0..2 {
            self.err[k] += o.err[k];
            self.err_sq[k] += o.err_sq[k];
            self.w[k] += &o.w[k];
            self.w_sq[k] += &o.w_sq[k];
        }
    }
}

/// Monte-Carlo bias/variance comparison over fresh noise draws with `X` fixed.
pub fn variance_study(p: &LinearProblem, trials: usize, seed: u64) -> Result<VarianceStudy> {
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least two trials".into()));
    }
    let solvers = Solvers::new(p)?;
    let s = p.gram_spectrum()?;
    let (n, d) = p.x_matrix.shape();
    let clean = &p.x_matrix * &p.wstar;
    let n_blocks = trials.div_ceil(BLOCK);
    let blocks: Vec<Sums> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded_rng(mix_seed(&[seed, b as u64]));
            let mut sums = Sums::zeros(d);
            let mut noise = Vector::zeros(n);
            for _ in 0..BLOCK.min(trials - b * BLOCK) {
                fill_normals(&mut rng, noise.as_mut_slice());
                let y = &clean + &noise * p.noise_sigma;
                let (w1, w2) = solvers.fit(&y);
                for (k, w) in [w1, w2].into_iter().enumerate() {
                    let e = (&p.x_matrix * (&w - &p.wstar)).norm_squared();
                    sums.err[k] += e;
                    sums.err_sq[k] += e * e;
                    sums.w_sq[k] += w.component_mul(&w);
                    sums.w[k] += w;
                }
            }
            sums
        })
        .collect();
    let mut total = Sums::zeros(d);
    for b in &blocks {
        total.add(b);
    }
    let t = trials as f64;
    let mean_se = |sum: &Vector, sq: &Vector| -> (Vec<f64>, Vec<f64>) {
        let m: Vec<f64> = sum.iter().map(|v| v / t).collect();
        let se = sq.iter().zip(&m).map(|(q, mu)| ((q / t - mu * mu).max(0.0) * t / (t - 1.0) / t).sqrt()).collect();
        (m, se)
    };
    let var = |k: usize| total.err[k] / t;
    let se = |k: usize| ((total.err_sq[k] / t - var(k).powi(2)).max(0.0) * t / (t - 1.0) / t).sqrt();
    let (mean_l2, mean_se_l2) = mean_se(&total.w[0], &total.w_sq[0]);
    let (mean_h1, mean_se_h1) = mean_se(&total.w[1], &total.w_sq[1]);
    let sigma2 = p.noise_sigma * p.noise_sigma;
    Ok(VarianceStudy {
        var_l2: var(0),
        var_h1: var(1),
        formula_l2: sigma2 * d as f64,
        formula_h1: sigma2 * s.iter().map(|&si| si * si / (si + p.ridge_lambda).powi(2)).sum::<f64>(),
        se_l2: se(0),
        se_h1: se(1),
        mean_l2,
        mean_h1,
        mean_se_l2,
        mean_se_h1,
        trials,
    })
}

/// Gaussian design with `n` rows and `d` columns.
pub fn random_design(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    let mut data = vec![0.0; n * d];
    fill_normals(&mut rng, &mut data);
    Matrix::from_row_slice(n, d, &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two(lambda: f64, sigma: f64) -> LinearProblem {
        let x = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        LinearProblem::new(x, Vector::from_row_slice(&[0.5, -1.0]), sigma, lambda).unwrap()
    }

    #[test]
    fn zero_ridge_matches_least_squares() {
        let p = LinearProblem::new(random_design(20, 3, 1), Vector::from_row_slice(&[1.0, 2.0, 3.0]), 1.0, 0.0).unwrap();
        let y = Vector::from_fn(20, |i, _| (i as f64).sin());
        let (a, b) = fit_estimators(&p, &y).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_recovers_teacher() {
        let p = LinearProblem::new(random_design(30, 4, 2), Vector::from_row_slice(&[1.0, -2.0, 0.5, 3.0]), 0.0, 0.7).unwrap();
        let y = &p.x_matrix * &p.wstar;
        let (a, b) = fit_estimators(&p, &y).unwrap();
        assert!((a - &p.wstar).amax() < 1e-10 && (b - &p.wstar).amax() < 1e-10);
    }

    #[test]
    fn conditioning_example() {
        let (kl, kh) = conditioning(&two_by_two(1.0, 1.0)).unwrap();
        assert!((kl - 4.0).abs() < 1e-12 && (kh - 2.5).abs() < 1e-12);
        let (kl, kh) = conditioning(&two_by_two(0.0, 1.0)).unwrap();
        assert_eq!(kl, kh);
    }

    #[test]
    fn singular_design_rejected() {
        let x = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = LinearProblem::new(x, Vector::zeros(2), 1.0, 1.0).unwrap();
        assert!(matches!(conditioning(&p), Err(Error::Singular(_))));
    }

    #[test]
    fn variance_example() {
        let v = variance_study(&two_by_two(1.0, 1.0), 10_000, 4).unwrap();
        assert!((v.formula_l2 - 2.0).abs() < 1e-12);
        assert!((v.formula_h1 - 0.89).abs() < 1e-12);
        assert!((v.var_l2 / 2.0 - 1.0).abs() < 0.03);
        assert!((v.var_h1 / 0.89 - 1.0).abs() < 0.03);
        assert!(v.var_h1 < v.var_l2);
    }

    #[test]
    fn noiseless_variance_is_zero() {
        let v = variance_study(&two_by_two(1.0, 0.0), 1000, 4).unwrap();
        assert!(v.var_l2 < 1e-25 && v.var_h1 < 1e-25);
    }

    #[test]
    fn kappa_decreases_with_ridge() {
        let x = random_design(40, 5, 9);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let p = LinearProblem::new(x.clone(), Vector::zeros(5), 1.0, i as f64 * 0.5).unwrap();
            let (_, kh) = conditioning(&p).unwrap();
            assert!(kh <= prev);
            prev = kh;
        }
    }

    proptest! {
        #[test]
        fn ridge_improves_conditioning(seed in 0u64..1000, lambda in 0.01f64..10.0) {
            let p = LinearProblem::new(random_design(12, 4, seed), Vector::zeros(4), 1.0, lambda).unwrap();
            let (kl, kh) = conditioning(&p).unwrap();
            prop_assert!(kh < kl);
        }
    }
}
