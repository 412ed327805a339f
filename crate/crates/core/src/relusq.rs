//! Squared-ReLU unit `x -> relu(w.x)^2` with value, gradient and Hessian matching terms.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{pair_geometry, Matrix, Vector};

/// Population gradients of the value term and the first- and second-derivative matching terms.
#[derive(Debug, Clone, PartialEq)]
pub struct H2GradientBundle {
    pub grad_i1: Vector,
    pub grad_i2: Vector,
    pub grad_i3: Vector,
}

impl H2GradientBundle {
    pub fn total(&self) -> Vector {
        &self.grad_i1 + &self.grad_i2 + &self.grad_i3
    }
}

fn g_coef(theta: f64) -> f64 {
    (PI - theta) + theta.sin() * theta.cos()
}

fn h_coef(theta: f64) -> f64 {
    2.0 * theta.sin() + 2.0 * (PI - theta) * theta.cos()
}

fn g1_coef(theta: f64) -> f64 {
    theta.sin() + 2.0 * (PI - theta) * theta.cos()
}

pub fn h2_gradients(w: &Vector, wstar: &Vector) -> Result<H2GradientBundle> {
    let g = pair_geometry(w, wstar)?;
    if g.norm_w == 0.0 {
        return Err(Error::Singular("student vector w is zero"));
    }
    let (a, b, t) = (g.norm_w, g.norm_wstar, g.theta);
    let (s, c) = t.sin_cos();
    let grad_i1 = w * (3.0 * a * a - b * b / PI * g_coef(t)) - wstar * (a * b / PI * h_coef(t));
    let grad_i2 = (w * (a * a - c * s / (2.0 * PI) * b * b) - wstar * (a * b / (2.0 * PI) * g1_coef(t))) * 4.0;
    let grad_i3 = w * (4.0 * a * a) - wstar * (4.0 * (PI - t) / PI * w.dot(wstar));
    Ok(H2GradientBundle { grad_i1, grad_i2, grad_i3 })
}

/// Population value loss `E (relu(w.x)^2 - relu(w*.x)^2)^2 / 2`.
pub fn value_loss(w: &Vector, wstar: &Vector) -> Result<f64> {
    let g = pair_geometry(w, wstar)?;
    let (a, b, t) = (g.norm_w, g.norm_wstar, g.theta);
    let (s, c) = t.sin_cos();
    let cross = a * a * b * b / (2.0 * PI) * (3.0 * s * c + (PI - t) * (1.0 + 2.0 * c * c));
    Ok(0.5 * (1.5 * a.powi(4) - 2.0 * cross + 1.5 * b.powi(4)))
}

/// Descent-direction check for the three terms at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentCheck {
    /// `-(w - w*)' grad I_j < 0` for j = 1, 2, 3.
    pub negative: [bool; 3],
    /// The three values `-(w - w*)' grad I_j`.
    pub inner: [f64; 3],
    /// `w = w*`: all gradients vanish and the flags are vacuous.
    pub degenerate: bool,
    /// Point outside `|w - w*| < |w*|`.
    pub guarantee_void: bool,
}

pub fn descent_check(w: &Vector, wstar: &Vector) -> Result<DescentCheck> {
    let b = h2_gradients(w, wstar)?;
    let e = w - wstar;
    if e.iter().all(|&x| x == 0.0) {
        return Ok(DescentCheck { negative: [true; 3], inner: [0.0; 3], degenerate: true, guarantee_void: false });
    }
    let inner = [-e.dot(&b.grad_i1), -e.dot(&b.grad_i2), -e.dot(&b.grad_i3)];
    Ok(DescentCheck {
        negative: inner.map(|x| x < 0.0),
        inner,
        degenerate: false,
        guarantee_void: e.norm() >= wstar.norm(),
    })
}

/// Quadratic-form matrices in `z = (|w*|, |w|)` behind the first two descent inequalities:
/// `(w-w*)' grad I1 = 3(|w|^2 - |w||w*|)^2 + |w||w*| z'M z / 2pi` and
/// `(w-w*)' grad I2 = (2/pi)(2pi(|w|^2 - |w||w*|cos)^2 + |w||w*| z'M2 z / 2)`.
pub fn descent_matrices(theta: f64) -> (Matrix, Matrix) {
    let (s, c) = theta.sin_cos();
    let (g, h, g1) = (g_coef(theta), h_coef(theta), g1_coef(theta));
    let off = -(3.0 * PI + g + h * c);
    let m = Matrix::from_row_slice(2, 2, &[2.0 * g * c + 2.0 * h, off, off, 6.0 * PI * (2.0 - c)]);
    let off2 = -c * (g1 + s + 2.0 * PI * c);
    let m2 = Matrix::from_row_slice(2, 2, &[2.0 * g1 + 2.0 * c * c * s, off2, off2, 4.0 * PI * c]);
    (m, m2)
}

/// Which objective drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum H2Objective {
    /// Value term only.
    I1,
    /// Value plus first- and second-derivative terms.
    H2,
}

impl H2Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            H2Objective::I1 => "i1",
            H2Objective::H2 => "h2",
        }
    }
}

pub fn h2_flow_rhs(objective: H2Objective, w: &Vector, wstar: &Vector) -> Result<Vector> {
    let b = h2_gradients(w, wstar)?;
    Ok(match objective {
        H2Objective::I1 => -b.grad_i1,
        H2Objective::H2 => -b.total(),
    })
}
