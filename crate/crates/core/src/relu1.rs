//! Single ReLU unit `x -> relu(w.x)` trained against a teacher `w*` under Gaussian inputs:
//! closed-form population gradients, Hessians, flow quadratic forms and the one-step GD comparison.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{max_asymmetry, pair_geometry, real_eigenvalues, symmetric_eigs, Matrix, PairGeometry, SpectrumReport, Vector};
use crate::LossKind;

/// Population gradients of the value loss, the derivative seminorm and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub grad_l2: Vector,
    pub grad_semi: Vector,
    pub grad_h1: Vector,
}

fn nonzero_student(g: &PairGeometry) -> Result<()> {
    if g.norm_w == 0.0 {
        Err(Error::Singular("student vector w is zero"))
    } else {
        Ok(())
    }
}

pub fn population_gradients(w: &Vector, wstar: &Vector) -> Result<GradientBundle> {
    let g = pair_geometry(w, wstar)?;
    nonzero_student(&g)?;
    let theta = g.theta;
    let grad_l2 = (w - wstar) * 0.5 + (wstar * theta - w * (g.norm_wstar / g.norm_w * theta.sin())) / (2.0 * PI);
    let grad_semi = w * 0.5 - wstar * ((PI - theta) / (2.0 * PI));
    let grad_h1 = &grad_l2 + &grad_semi;
    Ok(GradientBundle { grad_l2, grad_semi, grad_h1 })
}

/// Population value loss and derivative seminorm `(L, J)`, each with the factor 1/2.
pub fn population_losses(w: &Vector, wstar: &Vector) -> Result<(f64, f64)> {
    let g = pair_geometry(w, wstar)?;
    let (a, b, t) = (g.norm_w, g.norm_wstar, g.theta);
    let base = 0.25 * (a * a + b * b);
    let l2 = base - a * b / (2.0 * PI) * (t.sin() + (PI - t) * t.cos());
    let semi = base - (PI - t) / (2.0 * PI) * a * b * t.cos();
    Ok((l2, semi))
}

/// Negated population gradient of the selected loss.
pub fn flow_rhs(kind: LossKind, w: &Vector, wstar: &Vector) -> Result<Vector> {
    let b = population_gradients(w, wstar)?;
    Ok(match kind {
        LossKind::L2 => -b.grad_l2,
        LossKind::H1 => -b.grad_h1,
    })
}

/// Extreme and bulk eigenvalues predicted for both Hessians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormSpectrum {
    pub l2_max: f64,
    pub l2_min: f64,
    pub l2_bulk: f64,
    pub h1_max: f64,
    pub h1_min: f64,
    pub h1_bulk: f64,
}

impl ClosedFormSpectrum {
    pub fn from_geometry(g: &PairGeometry) -> Self {
        let q = g.alpha_sin_sq();
        Self {
            l2_max: 0.5,
            l2_min: 0.5 - 2.0 * q,
            l2_bulk: 0.5 - q,
            h1_max: 1.0,
            h1_min: 1.0 - 3.0 * q,
            h1_bulk: 1.0 - q,
        }
    }
}

/// Condition number `1 / (1 - 4 alpha sin^2)` of the value-loss Hessian, `None` outside convexity.
pub fn kappa_l2_formula(g: &PairGeometry) -> Option<f64> {
    let denom = 1.0 - 4.0 * g.alpha_sin_sq();
    (denom > 0.0).then(|| 1.0 / denom)
}

/// Condition number `1 / (1 - 3 alpha sin^2)` of the Sobolev-loss Hessian, `None` outside convexity.
pub fn kappa_h1_formula(g: &PairGeometry) -> Option<f64> {
    let denom = 1.0 - 3.0 * g.alpha_sin_sq();
    (denom > 0.0).then(|| 1.0 / denom)
}

#[derive(Debug, Clone)]
pub struct HessianReport {
    pub geometry: PairGeometry,
    pub hess_l2: Matrix,
    pub hess_h1: Matrix,
    pub spectrum_l2: SpectrumReport,
    /// Real eigenvalues of the Sobolev Hessian, descending. The matrix is not symmetric
    /// for `d >= 2`, so no orthonormal eigenbasis is reported.
    pub eigenvalues_h1: Vec<f64>,
    /// `max |H_ij - H_ji|` of the Sobolev Hessian.
    pub asymmetry_h1: f64,
    pub kappa_l2: Option<f64>,
    pub kappa_h1: Option<f64>,
    pub closed_form: ClosedFormSpectrum,
}

impl HessianReport {
    pub fn numeric_kappa_l2(&self) -> Option<f64> {
        let min = self.spectrum_l2.min();
        (min > 0.0).then(|| self.spectrum_l2.max() / min)
    }

    pub fn numeric_kappa_h1(&self) -> Option<f64> {
        let min = *self.eigenvalues_h1.last()?;
        (min > 0.0).then(|| self.eigenvalues_h1[0] / min)
    }
}

fn hessian_parts(w: &Vector, wstar: &Vector) -> Result<(PairGeometry, Matrix, Matrix)> {
    let g = pair_geometry(w, wstar)?;
    if w.len() < 2 {
        return Err(Error::Unsupported("Hessians need dimension d >= 2"));
    }
    nonzero_student(&g)?;
    if g.alpha_is_infinite() {
        return Err(Error::Singular("student parallel to teacher (sin theta = 0)"));
    }
    let d = w.len();
    let v = w / g.norm_w;
    let u = wstar / g.norm_wstar;
    let (c, s) = (g.theta.cos(), g.theta.sin());
    let eye = Matrix::identity(d, d);
    let proj = &eye - &v * v.transpose();
    let uu = &u * u.transpose();
    let vu = &v * u.transpose();
    let core_l2 = &uu - &vu * c + &eye * (s * s);
    let core_h1 = &uu * 2.0 - &vu * c + &eye * (s * s);
    let hess_l2 = &eye * 0.5 - core_l2 * &proj * g.alpha;
    let hess_h1 = &eye - core_h1 * &proj * g.alpha;
    Ok((g, hess_l2, hess_h1))
}

/// Value-loss Hessian `I/2 - alpha (u u' - cos v u' + sin^2 I)(I - v v')`.
pub fn hessian_l2(w: &Vector, wstar: &Vector) -> Result<Matrix> {
    hessian_parts(w, wstar).map(|(_, h, _)| h)
}

/// Sobolev-loss Hessian `I - alpha (2 u u' - cos v u' + sin^2 I)(I - v v')`.
pub fn hessian_h1(w: &Vector, wstar: &Vector) -> Result<Matrix> {
    hessian_parts(w, wstar).map(|(_, _, h)| h)
}

pub fn hessians(w: &Vector, wstar: &Vector) -> Result<HessianReport> {
    let (geometry, hess_l2, hess_h1) = hessian_parts(w, wstar)?;
    let spectrum_l2 = symmetric_eigs(&hess_l2)?;
    let eigenvalues_h1 = real_eigenvalues(&hess_h1)?;
    Ok(HessianReport {
        asymmetry_h1: max_asymmetry(&hess_h1),
        kappa_l2: kappa_l2_formula(&geometry),
        kappa_h1: kappa_h1_formula(&geometry),
        closed_form: ClosedFormSpectrum::from_geometry(&geometry),
        geometry,
        hess_l2,
        hess_h1,
        spectrum_l2,
        eigenvalues_h1,
    })
}

fn sym2(a: f64, b: f64, c: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, b, b, c])
}

/// `z' m z` for `z = (|w*|, |w|)`.
pub fn quad_form(m: &Matrix, norm_wstar: f64, norm_w: f64) -> f64 {
    m[(0, 0)] * norm_wstar * norm_wstar + 2.0 * m[(0, 1)] * norm_wstar * norm_w + m[(1, 1)] * norm_w * norm_w
}

/// Matrices of the flow identities `(w - w*)' grad = z' M z / (4 pi)`, `z = (|w*|, |w|)`.
#[derive(Debug, Clone)]
pub struct FlowQuadForms {
    /// Value loss.
    pub m1: Matrix,
    /// Derivative seminorm.
    pub m2: Matrix,
    /// Smallest eigenvalue of `m2`.
    pub lambda_theta: f64,
}

pub fn lambda_theta(theta: f64) -> f64 {
    let a = 2.0 * PI - theta;
    a - (theta * theta + a * a * theta.cos().powi(2)).sqrt()
}

fn check_half_range(theta: f64) -> Result<()> {
    if (0.0..=PI / 2.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("theta = {theta} outside [0, pi/2]")))
    }
}

pub fn flow_quadratic_forms(theta: f64) -> Result<FlowQuadForms> {
    check_half_range(theta)?;
    let (s, c) = theta.sin_cos();
    let m1 = sym2((2.0 * theta).sin() + 2.0 * PI - 2.0 * theta, -(2.0 * PI - theta) * c - s, 2.0 * PI);
    let m2 = sym2(2.0 * PI - 2.0 * theta, -(2.0 * PI - theta) * c, 2.0 * PI);
    Ok(FlowQuadForms { m1, m2, lambda_theta: lambda_theta(theta) })
}

/// Matrices `N1..N5` of the one-step comparison, all in `z = (|w*|, |w|)`:
/// `|grad L|^2 = z'N1 z / 4pi^2`, `(w-w*)' grad L = z'N2 z / 4pi`, `|grad H|^2 = z'N3 z / 4pi^2`,
/// `(w-w*)' grad H = z'N4 z / 4pi`, `N5 = N1 - N3`.
pub fn gd_step_matrices(theta: f64) -> Result<[Matrix; 5]> {
    check_half_range(theta)?;
    let (s, c) = theta.sin_cos();
    let tp = theta - PI;
    let s2 = (2.0 * theta).sin();
    let n1 = sym2(tp * tp + s * s - tp * s2, PI * tp * c - PI * s, PI * PI);
    let n2 = sym2(s2 + 2.0 * PI - 2.0 * theta, (theta - 2.0 * PI) * c - s, 2.0 * PI);
    let n3 = sym2(4.0 * tp * tp + s * s - 2.0 * tp * s2, 4.0 * PI * tp * c - 2.0 * PI * s, 4.0 * PI * PI);
    let n4 = sym2(s2 - 4.0 * tp, (2.0 * theta - 4.0 * PI) * c - s, 4.0 * PI);
    let n5 = &n1 - &n3;
    Ok([n1, n2, n3, n4, n5])
}

#[derive(Debug, Clone, Serialize)]
pub struct GdCompareReport {
    pub w_new_l2: Vec<f64>,
    pub w_new_h1: Vec<f64>,
    /// `|w_new - w*|` after the value-loss step.
    pub err_l2: f64,
    /// `|w_new - w*|` after the Sobolev-loss step.
    pub err_h1: f64,
    /// `err_l2 - err_h1`.
    pub gain_f: f64,
    /// Largest step with a guaranteed gain; infinite when `w = w*`.
    pub max_step_c: f64,
    /// `|w - w*| < |w*|`; outside the basin the guarantee is void.
    pub in_basin: bool,
    /// Quadratic-form values `z' N_i z` for `N1..N5`.
    pub forms: [f64; 5],
}

pub fn gd_compare(w: &Vector, wstar: &Vector, eta: f64) -> Result<GdCompareReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {eta}")));
    }
    let b = population_gradients(w, wstar)?;
    let g = pair_geometry(w, wstar)?;
    let e = w - wstar;
    let new_l2 = w - &b.grad_l2 * eta;
    let new_h1 = w - &b.grad_h1 * eta;
    let err_l2 = (&new_l2 - wstar).norm();
    let err_h1 = (&new_h1 - wstar).norm();

    let denom = b.grad_l2.norm_squared() - b.grad_h1.norm_squared();
    let max_step_c = if denom == 0.0 { f64::INFINITY } else { -2.0 * b.grad_semi.dot(&e) / denom };
    let theta = g.theta.min(PI / 2.0);
    let forms = gd_step_matrices(theta)?.map(|m| quad_form(&m, g.norm_wstar, g.norm_w));
    Ok(GdCompareReport {
        w_new_l2: new_l2.iter().copied().collect(),
        w_new_h1: new_h1.iter().copied().collect(),
        err_l2,
        err_h1,
        gain_f: err_l2 - err_h1,
        max_step_c,
        in_basin: e.norm() < g.norm_wstar,
        forms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    InsideS,
    InSprimeMinusS,
    OutsideSprime,
}

pub fn basin_classify(w: &Vector, wstar: &Vector) -> Result<RegionLabel> {
    let g = pair_geometry(w, wstar)?;
    if g.norm_w == 0.0 {
        return Ok(RegionLabel::OutsideSprime);
    }
    let s = g.theta.sin();
    let ratio = g.norm_w / g.norm_wstar;
    Ok(if s < PI * ratio / 2.0 {
        RegionLabel::InsideS
    } else if s < 2.0 * PI * ratio / 3.0 {
        RegionLabel::InSprimeMinusS
    } else {
        RegionLabel::OutsideSprime
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::numeric_jacobian;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn gradients_vanish_at_teacher() {
        let b = population_gradients(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_eq!(b.grad_l2, Vector::zeros(2));
        assert_eq!(b.grad_semi, Vector::zeros(2));
        assert_eq!(b.grad_h1, Vector::zeros(2));
    }

    #[test]
    fn orthogonal_gradients() {
        let b = population_gradients(&v(&[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!(close(&b.grad_semi, &v(&[-0.25, 0.5]), 1e-15));
        assert!(close(&b.grad_l2, &v(&[-0.25, 0.5 - 1.0 / (2.0 * PI)]), 1e-15));
    }

    #[test]
    fn parallel_gradients_collapse() {
        let ws = v(&[0.3, -1.2, 0.7]);
        let w = &ws * 2.0;
        let b = population_gradients(&w, &ws).unwrap();
        let half = (&w - &ws) * 0.5;
        assert!(close(&b.grad_l2, &half, 1e-15));
        assert!(close(&b.grad_semi, &half, 1e-15));
        let l = flow_rhs(LossKind::L2, &w, &ws).unwrap();
        let h = flow_rhs(LossKind::H1, &w, &ws).unwrap();
        assert!(close(&h, &(l * 2.0), 1e-15));
    }

    #[test]
    fn zero_student_is_singular() {
        assert!(matches!(population_gradients(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::Singular(_))));
    }

    #[test]
    fn value_gradient_is_derivative_of_value_loss() {
        let ws = v(&[0.4, -1.0, 0.8, 0.1]);
        let w = v(&[0.9, -0.2, 0.5, -0.6]);
        let grad = population_gradients(&w, &ws).unwrap().grad_l2;
        let fd = numeric_jacobian(|x| Vector::from_element(1, population_losses(x, &ws).unwrap().0), &w, 1e-6);
        assert!(close(&grad, &fd.row(0).transpose(), 1e-8));
    }

    #[test]
    fn kappa_example() {
        let w = v(&[(PI / 6.0).cos(), (PI / 6.0).sin()]);
        let ws = v(&[1.0, 0.0]);
        let r = hessians(&w, &ws).unwrap();
        let kl = 1.0 / (1.0 - 1.0 / PI);
        let kh = 1.0 / (1.0 - 3.0 / (4.0 * PI));
        assert!((r.kappa_l2.unwrap() - kl).abs() < 1e-12);
        assert!((r.kappa_h1.unwrap() - kh).abs() < 1e-12);
        assert!((r.numeric_kappa_l2().unwrap() - kl).abs() < 1e-8);
        assert!((r.numeric_kappa_h1().unwrap() - kh).abs() < 1e-8);
    }

    #[test]
    fn student_direction_is_top_eigenvector() {
        let w = v(&[0.3, 1.1, -0.4]);
        let ws = v(&[1.0, 0.2, 0.5]);
        let h = hessian_l2(&w, &ws).unwrap();
        let dir = &w / w.norm();
        assert!(close(&(&h * &dir), &(&dir * 0.5), 1e-12));
        let h1 = hessian_h1(&w, &ws).unwrap();
        assert!(close(&(&h1 * &dir), &dir, 1e-12));
    }

    #[test]
    fn hessians_match_finite_differences() {
        let w = v(&[0.7, 0.4, -0.3]);
        let ws = v(&[1.0, -0.2, 0.5]);
        let hl = hessian_l2(&w, &ws).unwrap();
        let hh = hessian_h1(&w, &ws).unwrap();
        let jl = numeric_jacobian(|x| population_gradients(x, &ws).unwrap().grad_l2, &w, 1e-6);
        let jh = numeric_jacobian(|x| population_gradients(x, &ws).unwrap().grad_h1, &w, 1e-6);
        assert!((hl - jl).amax() < 1e-8);
        assert!((&hh - jh).amax() < 1e-8);
        assert!(max_asymmetry(&hh) > 1e-3);
    }

    #[test]
    fn hessian_errors() {
        assert!(matches!(hessians(&v(&[2.0]), &v(&[1.0])), Err(Error::Unsupported(_))));
        assert!(matches!(hessians(&v(&[2.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::Singular(_))));
        assert!(matches!(hessians(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::Singular(_))));
    }

    #[test]
    fn kappa_tends_to_one_near_alignment() {
        let ws = v(&[1.0, 0.0]);
        let w = v(&[1e-7f64.cos(), 1e-7f64.sin()]);
        let r = hessians(&w, &ws).unwrap();
        assert!((r.kappa_l2.unwrap() - 1.0).abs() < 1e-6);
        assert!((r.kappa_h1.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lambda_endpoints() {
        assert_eq!(flow_quadratic_forms(0.0).unwrap().lambda_theta, 0.0);
        assert!((flow_quadratic_forms(PI / 2.0).unwrap().lambda_theta - PI).abs() < 1e-12);
        let f = flow_quadratic_forms(PI / 4.0).unwrap();
        let num = symmetric_eigs(&f.m2).unwrap().min();
        assert!((num - f.lambda_theta).abs() < 1e-10);
        assert!(flow_quadratic_forms(-0.1).is_err());
        assert!(flow_quadratic_forms(2.0).is_err());
    }

    #[test]
    fn lambda_increases_up_to_its_peak() {
        // The closed form rises on [0, ~1.4436] and then falls back to pi at pi/2.
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 * (PI / 2.0) / 1000.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| lambda_theta(t)).collect();
        let peak = (0..vals.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
        assert!((grid[peak] - 1.4436).abs() < 2e-3);
        assert!(vals[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(vals.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn quad_forms_reproduce_inner_products() {
        let ws = v(&[0.5, 1.0, -0.3]);
        let w = v(&[0.8, 0.6, 0.1]);
        let g = pair_geometry(&w, &ws).unwrap();
        let b = population_gradients(&w, &ws).unwrap();
        let e = &w - &ws;
        let f = flow_quadratic_forms(g.theta).unwrap();
        let four_pi = 4.0 * PI;
        assert!((e.dot(&b.grad_l2) - quad_form(&f.m1, g.norm_wstar, g.norm_w) / four_pi).abs() < 1e-13);
        assert!((e.dot(&b.grad_semi) - quad_form(&f.m2, g.norm_wstar, g.norm_w) / four_pi).abs() < 1e-13);
        let n = gd_step_matrices(g.theta).unwrap();
        let q = |m: &Matrix| quad_form(m, g.norm_wstar, g.norm_w);
        let pi2 = 4.0 * PI * PI;
        assert!((b.grad_l2.norm_squared() - q(&n[0]) / pi2).abs() < 1e-13);
        assert!((e.dot(&b.grad_l2) - q(&n[1]) / four_pi).abs() < 1e-13);
        assert!((b.grad_h1.norm_squared() - q(&n[2]) / pi2).abs() < 1e-13);
        assert!((e.dot(&b.grad_h1) - q(&n[3]) / four_pi).abs() < 1e-13);
    }

    #[test]
    fn gd_compare_examples() {
        let ws = v(&[1.0, 0.0]);
        let r = gd_compare(&(&ws * 2.0), &ws, 0.5).unwrap();
        assert!((r.err_l2 - 0.75).abs() < 1e-15);
        assert!((r.err_h1 - 0.5).abs() < 1e-15);
        assert!((r.gain_f - 0.25).abs() < 1e-15);
        assert!((r.max_step_c - 4.0 / 3.0).abs() < 1e-12);
        let r = gd_compare(&ws, &ws, 0.5).unwrap();
        assert_eq!(r.gain_f, 0.0);
        assert!(r.max_step_c.is_infinite());
        assert!(gd_compare(&ws, &ws, 0.0).is_err());
    }

    #[test]
    fn basin_labels() {
        let ws = v(&[1.0, 0.0]);
        assert_eq!(basin_classify(&ws, &ws).unwrap(), RegionLabel::InsideS);
        assert_eq!(basin_classify(&v(&[0.0, 1.0]), &v(&[2.5, 0.0])).unwrap(), RegionLabel::OutsideSprime);
        assert_eq!(basin_classify(&v(&[0.0, 1.0]), &v(&[1.8, 0.0])).unwrap(), RegionLabel::InSprimeMinusS);
        assert_eq!(basin_classify(&v(&[0.0, 0.0]), &ws).unwrap(), RegionLabel::OutsideSprime);
    }

    fn basin_pair(seed: &[f64]) -> (Vector, Vector) {
        let d = seed.len() / 2;
        let ws = Vector::from_row_slice(&seed[..d]);
        let e = Vector::from_row_slice(&seed[d..]);
        let e = if e.norm() > 0.0 { &e / e.norm() * (0.95 * ws.norm() * e.norm().min(1.0)) } else { e };
        (&ws + e, ws)
    }

    proptest! {
        #[test]
        fn bundle_sums(seed in prop::collection::vec(-2.0f64..2.0, 8)) {
            let (w, ws) = basin_pair(&seed);
            prop_assume!(ws.norm() > 0.1 && w.norm() > 1e-6);
            let b = population_gradients(&w, &ws).unwrap();
            prop_assert_eq!(&b.grad_l2 + &b.grad_semi, b.grad_h1);
        }

        #[test]
        fn sobolev_field_decays_faster(seed in prop::collection::vec(-2.0f64..2.0, 8)) {
            let (w, ws) = basin_pair(&seed);
            prop_assume!(ws.norm() > 0.1 && w.norm() > 1e-6);
            let g = pair_geometry(&w, &ws).unwrap();
            let e = &w - &ws;
            let l = e.dot(&flow_rhs(LossKind::L2, &w, &ws).unwrap());
            let h = e.dot(&flow_rhs(LossKind::H1, &w, &ws).unwrap());
            let margin = lambda_theta(g.theta) * (g.norm_w.powi(2) + g.norm_wstar.powi(2)) / (4.0 * PI);
            prop_assert!(h <= l - margin + 1e-12);
        }

        #[test]
        fn hessian_spectra_follow_closed_form(seed in prop::collection::vec(-2.0f64..2.0, 10)) {
            let (w, ws) = basin_pair(&seed);
            prop_assume!(ws.norm() > 0.1 && w.norm() > 1e-3);
            let r = hessians(&w, &ws);
            prop_assume!(r.is_ok());
            let r = r.unwrap();
            let cf = r.closed_form;
            prop_assert!(max_asymmetry(&r.hess_l2) < 1e-12);
            prop_assert!((r.spectrum_l2.max() - cf.l2_max).abs() < 1e-9);
            prop_assert!((r.spectrum_l2.min() - cf.l2_min).abs() < 1e-9);
            prop_assert!((r.eigenvalues_h1[0] - cf.h1_max).abs() < 1e-9);
            prop_assert!((r.eigenvalues_h1[4] - cf.h1_min).abs() < 1e-9);
            for k in 1..4 {
                prop_assert!((r.spectrum_l2.eigenvalues[k] - cf.l2_bulk).abs() < 1e-9);
                prop_assert!((r.eigenvalues_h1[k] - cf.h1_bulk).abs() < 1e-9);
            }
        }
    }
}
