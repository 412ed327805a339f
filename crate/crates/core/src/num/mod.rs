//! Dense linear algebra helpers, pair geometry, eigensolvers and the RK4 integrator.

mod eigen;
mod geometry;
mod ode;

pub use eigen::{eigenvalues_2x2, max_asymmetry, real_eigenvalues, symmetric_eigs, SpectrumReport};
pub use geometry::{angle_between, pair_geometry, PairGeometry};
pub use ode::{rk4_first_hit, rk4_integrate, rk4_integrate_every, rk4_step, FlowTrace};

use crate::error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

pub fn ensure_same_dim(a: &Vector, b: &Vector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(())
}

pub(crate) fn ensure_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has non-finite entries")))
    }
}

/// Central-difference Jacobian of `f` at `x`; column `j` is the derivative along `e_j`.
pub fn numeric_jacobian<F>(mut f: F, x: &Vector, h: f64) -> Matrix
where
    F: FnMut(&Vector) -> Vector,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        cols.push((f(&xp) - f(&xm)) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Matrix::from_fn(rows, n, |i, j| cols[j][i])
}

/// Smallest and largest eigenvalue of a symmetric 2x2 matrix `[[a, b], [b, c]]`.
pub fn sym2_extremes(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid - rad, mid + rad)
}

/// Ordinary least-squares `(slope, intercept)` of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
