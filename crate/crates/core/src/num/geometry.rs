use std::f64::consts::PI;

use serde::Serialize;

use super::{ensure_finite, ensure_same_dim, Vector};
use crate::error::{Error, Result};

/// Norms, angle and the curvature scale `alpha` of a student/teacher pair.
///
/// `alpha` is `f64::INFINITY` when `sin(theta) = 0` or `norm_w = 0`; the products
/// `alpha * sin(theta)` and `alpha * sin(theta)^2` stay finite through
/// [`PairGeometry::alpha_sin`] and [`PairGeometry::alpha_sin_sq`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairGeometry {
    pub norm_w: f64,
    pub norm_wstar: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl PairGeometry {
    pub fn alpha_is_infinite(&self) -> bool {
        self.alpha.is_infinite()
    }

    /// `alpha * sin(theta) = |w*| / (2 pi |w|)`.
    pub fn alpha_sin(&self) -> f64 {
        self.norm_wstar / (2.0 * PI * self.norm_w)
    }

    /// `alpha * sin(theta)^2 = |w*| sin(theta) / (2 pi |w|)`.
    pub fn alpha_sin_sq(&self) -> f64 {
        self.norm_wstar * self.theta.sin() / (2.0 * PI * self.norm_w)
    }
}

/// Angle in `[0, pi]` between two vectors, `2 atan2(|a^ - b^|, |a^ + b^|)`.
///
/// Accurate near 0 and pi where `acos` of the normalized inner product loses
/// half the digits. A zero vector is treated as orthogonal to everything.
pub fn angle_between(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return PI / 2.0;
    }
    let ua = a / na;
    let ub = b / nb;
    let diff = (&ua - &ub).norm();
    let sum = (&ua + &ub).norm();
    (2.0 * diff.atan2(sum)).clamp(0.0, PI)
}

pub fn pair_geometry(w: &Vector, wstar: &Vector) -> Result<PairGeometry> {
    ensure_same_dim(w, wstar)?;
    ensure_finite(w, "w")?;
    ensure_finite(wstar, "wstar")?;
    let norm_wstar = wstar.norm();
    if norm_wstar == 0.0 {
        return Err(Error::ZeroTeacher);
    }
    let norm_w = w.norm();
    let theta = angle_between(w, wstar);
    let sin = theta.sin();
    let alpha = if norm_w == 0.0 || sin == 0.0 {
        f64::INFINITY
    } else {
        norm_wstar / (2.0 * PI * norm_w * sin)
    };
    Ok(PairGeometry { norm_w, norm_wstar, theta, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn identical_directions_flag_alpha() {
        let g = pair_geometry(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_eq!(g.theta, 0.0);
        assert!(g.alpha_is_infinite());
        assert_eq!(g.alpha_sin_sq(), 0.0);
    }

    #[test]
    fn orthogonal_units() {
        let g = pair_geometry(&v(&[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((g.theta - PI / 2.0).abs() < 1e-15);
        assert!((g.alpha - 0.159_154_943_091_895_34).abs() < 1e-15);
    }

    #[test]
    fn thirty_degrees() {
        let w = v(&[3f64.sqrt() / 2.0, 0.5]);
        let g = pair_geometry(&w, &v(&[1.0, 0.0])).unwrap();
        let acos = (w[0] / w.norm()).clamp(-1.0, 1.0).acos();
        assert!((g.theta - PI / 6.0).abs() < 1e-15);
        assert!((g.theta - acos).abs() < 1e-12);
        assert!((g.alpha - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn small_angles_keep_relative_accuracy() {
        let eps = 1e-9;
        let g = pair_geometry(&v(&[1.0, eps]), &v(&[1.0, 0.0])).unwrap();
        assert!((g.theta / eps - 1.0).abs() < 1e-9);
        let g = pair_geometry(&v(&[-1.0, eps]), &v(&[1.0, 0.0])).unwrap();
        assert!(((PI - g.theta) / eps - 1.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert_eq!(
            pair_geometry(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        );
        assert_eq!(pair_geometry(&v(&[1.0, 0.0]), &v(&[0.0, 0.0])), Err(Error::ZeroTeacher));
    }

    #[test]
    fn zero_student_is_flagged() {
        let g = pair_geometry(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!(g.alpha_is_infinite());
    }

    proptest! {
        #[test]
        fn scale_invariance(
            a in prop::collection::vec(-5.0f64..5.0, 3),
            b in prop::collection::vec(-5.0f64..5.0, 3),
            c in 0.01f64..100.0,
            cs in 0.01f64..100.0,
        ) {
            let w = v(&a);
            let ws = v(&b);
            prop_assume!(w.norm() > 1e-3 && ws.norm() > 1e-3);
            let g1 = pair_geometry(&w, &ws).unwrap();
            let g2 = pair_geometry(&(&w * c), &(&ws * cs)).unwrap();
            prop_assert!((g1.theta - g2.theta).abs() < 1e-12);
        }
    }
}
