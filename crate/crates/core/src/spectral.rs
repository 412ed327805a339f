//! Chebyshev collocation and finite-difference differentiation matrices, and the gridded H1 loss.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::{Matrix, Vector};

/// Chebyshev points together with their differentiation matrix.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub n: usize,
    pub points: Vector,
    pub diff: Matrix,
}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self { n, points: cheb_points(n)?, diff: cheb_diff_matrix(n)? })
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("Chebyshev order must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `cos(j pi / n)` for `j = 0..=n`, evaluated as `sin(pi (n - 2j) / 2n)` for exact symmetry.
pub fn cheb_points(n: usize) -> Result<Vector> {
    check_order(n)?;
    let nf = n as f64;
    Ok(Vector::from_fn(n + 1, |j, _| (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin()))
}

/// Collocation differentiation matrix on [`cheb_points`]; the diagonal is minus the off-diagonal row sum.
pub fn cheb_diff_matrix(n: usize) -> Result<Matrix> {
    check_order(n)?;
    let nf = n as f64;
    let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
    let mut d = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i == j {
                continue;
            }
            // x_i - x_j through a product of sines avoids cancellation.
            let gap = 2.0 * (PI * (i + j) as f64 / (2.0 * nf)).sin() * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = c(i) / c(j) * sign / gap;
            d[(i, j)] = v;
            row_sum += v;
        }
        d[(i, i)] = -row_sum;
    }
    Ok(d)
}

/// Second-order three-point differentiation on a strictly increasing grid, one-sided at the ends.
pub fn fdm_diff_matrix(grid: &Vector) -> Result<Matrix> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.as_slice().windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
    }
    let x = grid.as_slice();
    let mut d = Matrix::zeros(n, n);
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[(0, 0)] = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
    d[(0, 1)] = (h1 + h2) / (h1 * h2);
    d[(0, 2)] = -h1 / (h2 * (h1 + h2));
    for i in 1..n - 1 {
        let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        d[(i, i - 1)] = -h2 / (h1 * (h1 + h2));
        d[(i, i)] = (h2 - h1) / (h1 * h2);
        d[(i, i + 1)] = h1 / (h2 * (h1 + h2));
    }
    let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    d[(n - 1, n - 3)] = h2 / (h1 * (h1 + h2));
    d[(n - 1, n - 2)] = -(h1 + h2) / (h1 * h2);
    d[(n - 1, n - 1)] = (h1 + 2.0 * h2) / (h2 * (h1 + h2));
    Ok(d)
}

/// `mean((pred - target)^2) + mean((pred_grad - D target)^2)`.
pub fn h1_grid_loss(pred_values: &Vector, pred_input_grads: &Vector, target_values: &Vector, diff: &Matrix) -> Result<f64> {
    let m = target_values.len();
    if pred_values.len() != m || pred_input_grads.len() != m || diff.nrows() != m || diff.ncols() != m {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: values {}, grads {}, targets {}, diff {}x{}",
            pred_values.len(),
            pred_input_grads.len(),
            m,
            diff.nrows(),
            diff.ncols()
        )));
    }
    let target_grads = diff * target_values;
    let value = (pred_values - target_values).norm_squared() / m as f64;
    let grad = (pred_input_grads - target_grads).norm_squared() / m as f64;
    Ok(value + grad)
}

/// Max-norm error of `D` applied to `x^k` against `k x^(k-1)` on the order-`n` grid.
pub fn monomial_error(grid: &SpectralGrid, k: u32) -> f64 {
    let f = grid.points.map(|x| x.powi(k as i32));
    let exact = grid.points.map(|x| if k == 0 { 0.0 } else { k as f64 * x.powi(k as i32 - 1) });
    (&grid.diff * f - exact).amax()
}
