use super::{ensure_same_dim, Vector};
use crate::error::{Error, Result};

/// Sampled trajectory of an ODE with `V = |x - target|^2` at each sample.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub v_values: Vec<f64>,
    pub target: Vector,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trace holds the initial state")
    }
}

pub fn rk4_step<F>(field: &mut F, x: &Vector, h: f64) -> Vector
where
    F: FnMut(&Vector) -> Vector,
{
    let k1 = field(x);
    let k2 = field(&(x + &k1 * (h / 2.0)));
    let k3 = field(&(x + &k2 * (h / 2.0)));
    let k4 = field(&(x + &k3 * h));
    x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

fn check_grid(step: f64, t_end: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite() && t_end.is_finite() && step <= t_end) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < step <= t_end, got step={step}, t_end={t_end}"
        )));
    }
    Ok(((t_end / step) - 1e-9).ceil().max(1.0) as usize)
}

/// Classic fixed-step RK4 from `t = 0` to `t_end`, recording every step.
pub fn rk4_integrate<F>(field: F, x0: &Vector, step: f64, t_end: f64, target: &Vector) -> Result<FlowTrace>
where
    F: FnMut(&Vector) -> Vector,
{
    rk4_integrate_every(field, x0, step, t_end, target, 1)
}

/// As [`rk4_integrate`] but records only every `record_every`-th step (plus the last one).
///
/// The final step is shortened when `t_end` is not a multiple of `step`.
pub fn rk4_integrate_every<F>(
    mut field: F,
    x0: &Vector,
    step: f64,
    t_end: f64,
    target: &Vector,
    record_every: usize,
) -> Result<FlowTrace>
where
    F: FnMut(&Vector) -> Vector,
{
    ensure_same_dim(x0, target)?;
    let n_steps = check_grid(step, t_end)?;
    let record_every = record_every.max(1);
    let v_of = |x: &Vector| (x - target).norm_squared();

    let mut trace = FlowTrace {
        times: vec![0.0],
        states: vec![x0.clone()],
        v_values: vec![v_of(x0)],
        target: target.clone(),
    };
    let mut x = x0.clone();
    for i in 1..=n_steps {
        let t_prev = (i - 1) as f64 * step;
        let t = if i == n_steps { t_end } else { i as f64 * step };
        x = rk4_step(&mut field, &x, t - t_prev);
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if i % record_every == 0 || i == n_steps {
            trace.times.push(t);
            trace.v_values.push(v_of(&x));
            trace.states.push(x.clone());
        }
    }
    Ok(trace)
}

/// Integrates until `stop(x)` holds; returns the first grid time and state where it does,
/// or `None` if `t_max` is reached first.
pub fn rk4_first_hit<F, S>(mut field: F, x0: &Vector, step: f64, t_max: f64, mut stop: S) -> Result<Option<(f64, Vector)>>
where
    F: FnMut(&Vector) -> Vector,
    S: FnMut(&Vector) -> bool,
{
    let n_steps = check_grid(step, t_max)?;
    if stop(x0) {
        return Ok(Some((0.0, x0.clone())));
    }
    let mut x = x0.clone();
    for i in 1..=n_steps {
        x = rk4_step(&mut field, &x, step);
        let t = i as f64 * step;
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if stop(&x) {
            return Ok(Some((t, x)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn exponential_decay() {
        let tr = rk4_integrate(|x| -x, &scalar(1.0), 1e-3, 1.0, &scalar(0.0)).unwrap();
        let x1 = tr.final_state()[0];
        assert!((x1 - (-1f64).exp()).abs() < 1e-9);
        assert_eq!(tr.len(), 1001);
        assert!((tr.times[1000] - 1.0).abs() < 1e-15);
        assert!((tr.v_values[1000] - x1 * x1).abs() < 1e-15);
    }

    #[test]
    fn doubled_rate() {
        let tr = rk4_integrate(|x| -2.0 * x, &scalar(1.0), 1e-3, 1.0, &scalar(0.0)).unwrap();
        assert!((tr.final_state()[0] - (-2f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn zero_field_is_constant() {
        let x0 = Vector::from_row_slice(&[1.0, -2.0]);
        let tr = rk4_integrate(|x| x * 0.0, &x0, 0.1, 1.0, &Vector::zeros(2)).unwrap();
        assert!(tr.states.iter().all(|s| s == &x0));
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let tr = rk4_integrate(|x| -x, &scalar(1.0), h, 1.0, &scalar(0.0)).unwrap();
            (tr.final_state()[0] - (-1f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn blow_up_is_reported() {
        let r = rk4_integrate(|x| x.map(|c| c * c * 1e3), &scalar(1.0), 0.1, 10.0, &scalar(0.0));
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn invalid_grid() {
        assert!(rk4_integrate(|x| -x, &scalar(1.0), 2.0, 1.0, &scalar(0.0)).is_err());
        assert!(rk4_integrate(|x| -x, &scalar(1.0), 0.0, 1.0, &scalar(0.0)).is_err());
    }

    #[test]
    fn strided_recording_keeps_end() {
        let tr = rk4_integrate_every(|x| -x, &scalar(1.0), 0.01, 1.0, &scalar(0.0), 30).unwrap();
        assert_eq!(tr.times.len(), 1 + 3 + 1);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn first_hit() {
        let hit = rk4_first_hit(|x| -x, &scalar(1.0), 1e-3, 10.0, |x| x[0] < 0.5).unwrap().unwrap();
        assert!((hit.0 - 2f64.ln()).abs() < 1e-3);
        assert!(rk4_first_hit(|x| -x, &scalar(1.0), 1e-3, 0.1, |x| x[0] < 0.5).unwrap().is_none());
    }
}
