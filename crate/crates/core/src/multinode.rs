//! K-node student/teacher system with orthonormal teachers: per-node population fields,
//! the planar reduction under the cyclic parametrization, and the circulant `t`-dynamics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{angle_between, eigenvalues_2x2, numeric_jacobian, real_eigenvalues, rk4_first_hit, rk4_integrate, Matrix, Vector};
use crate::LossKind;

fn weight(kind: LossKind) -> f64 {
    match kind {
        LossKind::L2 => 1.0,
        LossKind::H1 => 2.0,
    }
}

/// Negative population gradient `-E grad_{w_j}` of every student node.
///
/// Under the Sobolev loss only the `(pi - angle)` terms are doubled; the `sin` terms are shared.
pub fn multinode_gradients(w: &[Vector], wstar: &[Vector], kind: LossKind) -> Result<Vec<Vector>> {
    let d = w.first().map(|v| v.len()).ok_or_else(|| Error::InvalidArgument("no student nodes".into()))?;
    for v in w.iter().chain(wstar) {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    if w.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::Singular("a student node is zero"));
    }
    if wstar.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::ZeroTeacher);
    }
    let f = weight(kind);
    let out = w
        .iter()
        .map(|wj| {
            let unit = wj / wj.norm();
            let mut acc = Vector::zeros(d);
            let mut radial = 0.0;
            for ws in wstar {
                let t = angle_between(wj, ws);
                acc += ws * (f * (PI - t));
                radial += ws.norm() * t.sin();
            }
            for wk in w {
                let t = angle_between(wj, wk);
                acc -= wk * (f * (PI - t));
                radial -= wk.norm() * t.sin();
            }
            (acc + unit * radial) / (2.0 * PI)
        })
        .collect();
    Ok(out)
}

/// First student node `x e_1 + y (e_2 + ... + e_K)` of the cyclic parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub x: f64,
    pub y: f64,
    pub k: usize,
}

impl ReducedState {
    pub fn new(x: f64, y: f64, k: usize) -> Self {
        Self { x, y, k }
    }

    /// `x in (0, 1]`, `y in [0, 1]`, `x > y`.
    pub fn in_omega(&self) -> bool {
        self.x > 0.0 && self.x <= 1.0 && (0.0..=1.0).contains(&self.y) && self.x > self.y
    }

    /// Student nodes in the teacher basis (teachers are `e_1..e_K`).
    pub fn students(&self) -> Vec<Vector> {
        (0..self.k)
            .map(|j| Vector::from_fn(self.k, |i, _| if i == j { self.x } else { self.y }))
            .collect()
    }

    pub fn distance_to_optimum(&self) -> f64 {
        (self.x - 1.0).hypot(self.y)
    }
}

/// Angles of the first node in the planar reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSet {
    /// Angle to its own teacher.
    pub theta: f64,
    /// Angle to any other teacher.
    pub phi_star: f64,
    /// Angle to any other student.
    pub phi: f64,
    /// `1 / |w_1|`.
    pub alpha_red: f64,
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidArgument(format!("need K >= 2, got {k}")))
    } else {
        Ok(())
    }
}

/// Angles from the `atan2` forms of the cosine identities; exact on the diagonal `x = y`.
pub fn reduced_angles(state: &ReducedState) -> Result<AngleSet> {
    check_k(state.k)?;
    let (x, y, k) = (state.x, state.y, state.k as f64);
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite reduced state".into()));
    }
    let norm = (x * x + (k - 1.0) * y * y).sqrt();
    if norm == 0.0 {
        return Err(Error::Singular("reduced state at the origin"));
    }
    let alpha = 1.0 / norm;
    let theta = ((k - 1.0).sqrt() * y.abs()).atan2(x);
    let phi_star = (x * x + (k - 2.0) * y * y).sqrt().atan2(y);
    let q = alpha * alpha * (x - y) * (x - y);
    let phi = (alpha * (x - y).abs() * (2.0 - q).max(0.0).sqrt()).atan2(1.0 - q);
    Ok(AngleSet { theta, phi_star, phi, alpha_red: alpha })
}

/// Planar field `(xdot, ydot)` of the first node under the cyclic parametrization.
pub fn reduced_field(kind: LossKind, state: &ReducedState) -> Result<(f64, f64)> {
    let a = reduced_angles(state)?;
    let (x, y, k) = (state.x, state.y, state.k as f64);
    let f = weight(kind);
    let radial = (k - 1.0) * (a.alpha_red * a.phi_star.sin() - a.phi.sin()) + a.alpha_red * a.theta.sin();
    let gx = -(PI - a.theta) + PI * x + (PI - a.phi) * (k - 1.0) * y;
    let gy = -(PI - a.phi_star) + PI * y + (PI - a.phi) * (x + (k - 2.0) * y);
    Ok(((radial * x - f * gx) / (2.0 * PI), (radial * y - f * gy) / (2.0 * PI)))
}

fn reduced_vector_field(kind: LossKind, k: usize) -> impl FnMut(&Vector) -> Vector {
    move |s: &Vector| match reduced_field(kind, &ReducedState::new(s[0], s[1], k)) {
        Ok((dx, dy)) => Vector::from_row_slice(&[dx, dy]),
        Err(_) => Vector::from_element(2, f64::NAN),
    }
}

/// Central-difference Jacobian of the planar field at `(x, y)`.
pub fn reduced_jacobian(kind: LossKind, k: usize, x: f64, y: f64, h: f64) -> Result<Matrix> {
    check_k(k)?;
    let j = numeric_jacobian(reduced_vector_field(kind, k), &Vector::from_row_slice(&[x, y]), h);
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("Jacobian stencil touches the origin"));
    }
    Ok(j)
}

/// First flow time at which `|(x, y) - (1, 0)| < tol`, or `None` before `t_max`.
pub fn time_to_optimum(kind: LossKind, start: &ReducedState, tol: f64, step: f64, t_max: f64) -> Result<Option<f64>> {
    check_k(start.k)?;
    let x0 = Vector::from_row_slice(&[start.x, start.y]);
    let hit = rk4_first_hit(reduced_vector_field(kind, start.k), &x0, step, t_max, |s| (s[0] - 1.0).hypot(s[1]) < tol)?;
    Ok(hit.map(|(t, _)| t))
}

/// The linear model `-M3 (x - 1, y)` stated for the planar field near `(1, 0)`.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub m3: Matrix,
    pub eigs_l2: (f64, f64),
    pub eigs_h1: (f64, f64),
}

pub fn linearization(k: usize) -> Result<Linearization> {
    check_k(k)?;
    let kf = k as f64;
    let m3 = Matrix::from_row_slice(2, 2, &[0.5, (kf - 1.0) / 4.0, 0.25, kf / 4.0]);
    let eigs_l2 = eigenvalues_2x2(&m3)?;
    let eigs_h1 = eigenvalues_2x2(&(&m3 * 2.0))?;
    Ok(Linearization { m3, eigs_l2, eigs_h1 })
}

/// Diagonal fixed points `(x_l2, x_h1)` of the two planar fields.
pub fn saddle_points(k: usize) -> Result<(f64, f64)> {
    check_k(k)?;
    let kf = k as f64;
    let root = (kf - 1.0).sqrt();
    let acos = (1.0 / kf.sqrt()).acos();
    let x_l2 = (root - acos + PI) / (PI * kf);
    let x_h1 = (root + 2.0 * PI - 2.0 * acos) / (2.0 * PI * kf);
    Ok((x_l2, x_h1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `log |x(t) - x*|` against `t`.
    pub exponent: f64,
    /// `-K/2` for the value loss, `-K` for the Sobolev loss.
    pub expected: f64,
    /// Largest `|x - y|` seen along the trajectory.
    pub max_off_diagonal: f64,
    /// `max_off_diagonal > 1e-8`.
    pub left_diagonal: bool,
}

/// Integrates the planar field from `(x0, x0)` and fits the exponential approach to the saddle.
pub fn diagonal_decay(kind: LossKind, k: usize, x0: f64, t_end: f64) -> Result<DecayFit> {
    let (x_l2, x_h1) = saddle_points(k)?;
    let x_star = match kind {
        LossKind::L2 => x_l2,
        LossKind::H1 => x_h1,
    };
    if !(x0 > x_star && x0 <= 1.0) {
        return Err(Error::InvalidArgument(format!("x0 = {x0} outside ({x_star}, 1]")));
    }
    let start = Vector::from_row_slice(&[x0, x0]);
    let step = (t_end / 2000.0).min(1e-3);
    let trace = rk4_integrate(reduced_vector_field(kind, k), &start, step, t_end, &start)?;
    let mut max_off = 0.0f64;
    let (mut n, mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, s) in trace.times.iter().zip(&trace.states) {
        max_off = max_off.max((s[0] - s[1]).abs());
        let gap = (s[0] - x_star).abs();
        if gap > 1e-11 {
            let l = gap.ln();
            n += 1.0;
            st += t;
            sl += l;
            stt += t * t;
            stl += t * l;
        }
    }
    if n < 3.0 {
        return Err(Error::InvalidArgument("too few usable samples for the decay fit".into()));
    }
    let exponent = (n * stl - st * sl) / (n * stt - st * st);
    let kf = k as f64;
    Ok(DecayFit {
        exponent,
        expected: match kind {
            LossKind::L2 => -kf / 2.0,
            LossKind::H1 => -kf,
        },
        max_off_diagonal: max_off,
        left_diagonal: max_off > 1e-8,
    })
}

/// Circulant coefficients: node `j` has `t_{(i - j) mod K}` along teacher `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzState {
    pub t: Vector,
}

impl ToeplitzState {
    pub fn new(t: Vector) -> Self {
        Self { t }
    }

    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn students(&self) -> Vec<Vector> {
        let k = self.k();
        (0..k).map(|j| Vector::from_fn(k, |i, _| self.t[(i + k - j) % k])).collect()
    }
}

/// `tdot` for the circulant parametrization: the teacher-basis coordinates of the first node's field.
pub fn toeplitz_field(kind: LossKind, state: &ToeplitzState) -> Result<Vector> {
    let k = state.k();
    check_k(k)?;
    let t = &state.t;
    let norm = t.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Singular("toeplitz state is zero"));
    }
    let f = weight(kind);
    let total_sq = t.norm_squared();
    let mut out = Vector::zeros(k);
    let mut radial = 0.0;
    // Teachers: angle to e_j has cos = t_j / |t|.
    for j in 0..k {
        let rest = (total_sq - t[j] * t[j]).max(0.0).sqrt();
        let ang = rest.atan2(t[j]);
        out[j] += f * (PI - ang);
        radial += ang.sin();
    }
    // Students: node j is t cyclically shifted by j, with the same norm.
    for j in 0..k {
        let shifted = Vector::from_fn(k, |i, _| t[(i + k - j) % k]);
        let ang = angle_between(t, &shifted);
        out -= &shifted * (f * (PI - ang));
        radial -= norm * ang.sin();
    }
    out += t * (radial / norm);
    Ok(out / (2.0 * PI))
}

/// Central-difference Jacobian of the `t`-field at `e_1`.
pub fn toeplitz_jacobian(kind: LossKind, k: usize, h: f64) -> Result<Matrix> {
    check_k(k)?;
    let mut e1 = Vector::zeros(k);
    e1[0] = 1.0;
    let j = numeric_jacobian(
        |t| toeplitz_field(kind, &ToeplitzState::new(t.clone())).unwrap_or_else(|_| Vector::from_element(k, f64::NAN)),
        &e1,
        h,
    );
    Ok(j)
}

/// Eigenvalues (descending) of the negated `t`-field Jacobian at `e_1`.
pub fn toeplitz_rates(kind: LossKind, k: usize, h: f64) -> Result<Vec<f64>> {
    real_eigenvalues(&-toeplitz_jacobian(kind, k, h)?)
}

/// Stated linearization of the `t`-field: `1/2` on the diagonal, `1/4` elsewhere.
pub fn toeplitz_linear_model(k: usize) -> Matrix {
    Matrix::from_fn(k, k, |i, j| if i == j { 0.5 } else { 0.25 })
}
