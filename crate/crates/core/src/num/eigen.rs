use super::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectrumReport {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

/// Largest `|a_ij - a_ji|` of a square matrix.
pub fn max_asymmetry(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_square(a: &Matrix) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn symmetric_eigs(a: &Matrix) -> Result<SpectrumReport> {
    check_square(a)?;
    let scale = a.amax().max(1.0);
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = Matrix::identity(n, n);

    let frob = m.norm();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * frob {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-30 * frob {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SpectrumReport { eigenvalues, eigenvectors })
}

/// Eigenvalues of a general real matrix via real Schur form, sorted descending.
///
/// Fails when a conjugate pair has an imaginary part above `1e-9` times the
/// matrix scale.
pub fn real_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    check_square(a)?;
    // A deflation threshold of exactly one ulp stalls on roundoff-level subdiagonals.
    let schur = a
        .clone()
        .try_schur(16.0 * f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence(10_000))?;
    let eig = schur.complex_eigenvalues();
    let scale = a.amax().max(1.0);
    let worst_im = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst_im > 1e-9 * scale {
        return Err(Error::ComplexEigenvalues(worst_im));
    }
    let mut out: Vec<f64> = eig.iter().map(|z| z.re).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Eigenvalues `(larger, smaller)` of a real 2x2 matrix from its characteristic polynomial.
pub fn eigenvalues_2x2(m: &Matrix) -> Result<(f64, f64)> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::InvalidArgument("expected a 2x2 matrix".into()));
    }
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = half_tr * half_tr - det;
    let scale = half_tr * half_tr + det.abs();
    if disc < -1e-14 * scale {
        return Err(Error::ComplexEigenvalues((-disc).sqrt()));
    }
    let root = disc.max(0.0).sqrt();
    // Vieta for the smaller-magnitude root avoids cancellation.
    let big = if half_tr >= 0.0 { half_tr + root } else { half_tr - root };
    let small = if big != 0.0 { det / big } else { 0.0 };
    Ok(if big >= small { (big, small) } else { (small, big) })
}
