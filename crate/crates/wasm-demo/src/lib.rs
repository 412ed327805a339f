//! Browser bindings. Each export returns a flat, row-interleaved `Float64Array`.

use std::f64::consts::PI;

use sobolev_core::multinode::{reduced_field, ReducedState};
use sobolev_core::num::{pair_geometry, rk4_integrate_every, Vector};
use sobolev_core::relu1::{flow_rhs, kappa_h1_formula, kappa_l2_formula};
use sobolev_core::{Error, LossKind, Result};
use wasm_bindgen::prelude::*;

fn parse_kind(kind: &str) -> Result<LossKind> {
    match kind {
        "l2" => Ok(LossKind::L2),
        "h1" => Ok(LossKind::H1),
        other => Err(Error::InvalidArgument(format!("unknown loss kind {other:?}"))),
    }
}

/// Rows `[theta, kappa_l2, kappa_h1]` for `theta` in `(0, pi/2)` at fixed `|w| / |w*|`.
/// Outside the convexity region the condition number is NaN.
pub fn kappa_rows(norm_ratio: f64, samples: usize) -> Result<Vec<f64>> {
    if !(norm_ratio > 0.0 && norm_ratio.is_finite()) || samples == 0 {
        return Err(Error::InvalidArgument("need norm_ratio > 0 and samples > 0".into()));
    }
    let wstar = Vector::from_row_slice(&[1.0, 0.0]);
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let theta = 0.5 * PI * (i + 1) as f64 / (samples + 1) as f64;
        let w = Vector::from_row_slice(&[norm_ratio * theta.cos(), norm_ratio * theta.sin()]);
        let g = pair_geometry(&w, &wstar)?;
        out.push(theta);
        out.push(kappa_l2_formula(&g).unwrap_or(f64::NAN));
        out.push(kappa_h1_formula(&g).unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// Rows `[t, V_l2, V_h1]` of `|w(t) - w*|^2` for a planar unit with teacher `e_1`.
pub fn decay_rows(w0_x: f64, w0_y: f64, t_end: f64, step: f64, record_every: usize) -> Result<Vec<f64>> {
    let wstar = Vector::from_row_slice(&[1.0, 0.0]);
    let w0 = Vector::from_row_slice(&[w0_x, w0_y]);
    let trace = |kind| {
        let field = |w: &Vector| flow_rhs(kind, w, &wstar).unwrap_or_else(|_| Vector::from_element(2, f64::NAN));
        rk4_integrate_every(field, &w0, step, t_end, &wstar, record_every)
    };
    let l2 = trace(LossKind::L2)?;
    let h1 = trace(LossKind::H1)?;
    Ok(l2
        .times
        .iter()
        .zip(l2.v_values.iter().zip(&h1.v_values))
        .flat_map(|(&t, (&a, &b))| [t, a, b])
        .collect())
}

/// Rows `[x, y]` of the planar reduction of a `K`-node network, sampled every `record_every` steps.
pub fn trajectory_rows(k: usize, kind: &str, x0: f64, y0: f64, t_end: f64, step: f64, record_every: usize) -> Result<Vec<f64>> {
    let kind = parse_kind(kind)?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need K >= 2, got {k}")));
    }
    let field = |s: &Vector| match reduced_field(kind, &ReducedState::new(s[0], s[1], k)) {
        Ok((dx, dy)) => Vector::from_row_slice(&[dx, dy]),
        Err(_) => Vector::from_element(2, f64::NAN),
    };
    let start = Vector::from_row_slice(&[x0, y0]);
    let target = Vector::from_row_slice(&[1.0, 0.0]);
    let trace = rk4_integrate_every(field, &start, step, t_end, &target, record_every)?;
    Ok(trace.states.iter().flat_map(|s| [s[0], s[1]]).collect())
}

fn js(result: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    result.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = kappaCurve)]
pub fn kappa_curve(norm_ratio: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(kappa_rows(norm_ratio, samples))
}

#[wasm_bindgen(js_name = decayCurves)]
pub fn decay_curves(w0_x: f64, w0_y: f64, t_end: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(decay_rows(w0_x, w0_y, t_end, 1e-3, 20))
}

#[wasm_bindgen(js_name = planarTrajectory)]
pub fn planar_trajectory(k: usize, kind: &str, x0: f64, y0: f64, t_end: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(trajectory_rows(k, kind, x0, y0, t_end, 1e-2, 5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_rows_match_the_unit_ratio_example() {
        let rows = kappa_rows(1.0, 5).unwrap();
        assert_eq!(rows.len(), 15);
        for row in rows.chunks(3) {
            let q = row[0].sin() / (2.0 * PI);
            assert!((row[1] - 1.0 / (1.0 - 4.0 * q)).abs() < 1e-12);
            assert!((row[2] - 1.0 / (1.0 - 3.0 * q)).abs() < 1e-12);
            assert!(row[2] <= row[1]);
        }
    }

    #[test]
    fn kappa_is_nan_outside_convexity() {
        let rows = kappa_rows(0.1, 3).unwrap();
        assert!(rows[1].is_nan());
        assert!(kappa_rows(0.0, 3).is_err());
    }

    #[test]
    fn sobolev_decay_is_never_slower() {
        let rows = decay_rows(0.6, 0.5, 3.0, 1e-3, 50).unwrap();
        assert_eq!(rows[0], 0.0);
        assert!((rows[1] - 0.41).abs() < 1e-12);
        for row in rows.chunks(3) {
            assert!(row[2] <= row[1] + 1e-15);
        }
        let last = &rows[rows.len() - 3..];
        assert!((last[0] - 3.0).abs() < 1e-12);
        assert!(last[2] < 0.1 * last[1]);
    }

    #[test]
    fn planar_trajectory_approaches_the_optimum() {
        let rows = trajectory_rows(3, "h1", 0.8, 0.2, 40.0, 1e-2, 10).unwrap();
        assert_eq!(&rows[..2], &[0.8, 0.2]);
        let n = rows.len();
        assert!((rows[n - 2] - 1.0).hypot(rows[n - 1]) < 1e-3);
        assert!(trajectory_rows(3, "h2", 0.8, 0.2, 1.0, 1e-2, 1).is_err());
        assert!(trajectory_rows(1, "l2", 0.8, 0.2, 1.0, 1e-2, 1).is_err());
    }
}
