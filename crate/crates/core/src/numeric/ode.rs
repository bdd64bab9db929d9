//! Fixed-step classical Runge-Kutta integration.

use crate::error::{Error, Result};

/// Default step used by the dynamics lab.
pub const DEFAULT_DT: f64 = 1e-3;

/// Sampled solution of an ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One RK4 step of size `h` from `(t, y)`.
pub fn rk4_step<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(t + h, &axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` with step `dt`; the final
/// step is shortened to land exactly on `t1`.
pub fn rk4_integrate<F>(rhs: F, y0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let mut times = Vec::new();
    let mut states = Vec::new();
    rk4_visit(rhs, y0, t0, t1, dt, |t, y| {
        times.push(t);
        states.push(y.to_vec());
    })?;
    Ok(Trajectory { times, states })
}

/// Same stepping as [`rk4_integrate`] but hands each sample `(t, y)` to
/// `visit` instead of storing it. Returns the final state.
pub fn rk4_visit<F, V>(rhs: F, y0: &[f64], t0: f64, t1: f64, dt: f64, mut visit: V) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    V: FnMut(f64, &[f64]),
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param(format!("dt must be > 0, got {dt}")));
    }
    if !(t1 > t0) || !t1.is_finite() {
        return Err(Error::param(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let mut y = y0.to_vec();
    visit(t0, &y);
    let mut step = 0usize;
    loop {
        let t = t0 + step as f64 * dt;
        let remaining = t1 - t;
        // A sub-ulp leftover means the previous sample already sits on t1.
        if remaining <= dt * 1e-9 {
            break;
        }
        let last = remaining <= dt * (1.0 + 1e-9);
        let h = if last { remaining } else { dt };
        let next = rk4_step(&rhs, t, &y, h);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step,
                detail: format!("non-finite state at t = {}", t + h),
                last_finite: y,
            });
        }
        y = next;
        step += 1;
        visit(if last { t1 } else { t0 + step as f64 * dt }, &y);
        if last {
            break;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_constant() {
        let tr = rk4_integrate(|_, y| vec![0.0; y.len()], &[1.0, 2.0], 0.0, 1.0, 0.1).unwrap();
        assert!(tr.states.iter().all(|s| s == &[1.0, 2.0]));
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn exponential_decay() {
        let tr = rk4_integrate(|_, y| vec![-y[0]], &[1.0], 0.0, 1.0, 1e-3).unwrap();
        let err = (tr.last_state()[0] - (-1.0f64).exp()).abs();
        assert!(err <= 1e-9, "{err}");
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (-1.0f64).exp();
        let err = |dt: f64| {
            let tr = rk4_integrate(|_, y| vec![-y[0]], &[1.0], 0.0, 1.0, dt).unwrap();
            (tr.last_state()[0] - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn short_last_step_lands_on_end() {
        let tr = rk4_integrate(|_, _| vec![1.0], &[0.0], 0.0, 1.05, 0.1).unwrap();
        assert_eq!(*tr.times.last().unwrap(), 1.05);
        assert!((tr.last_state()[0] - 1.05).abs() < 1e-12);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn divergence_reports_last_finite() {
        let res = rk4_integrate(|_, y| vec![y[0] * y[0]], &[1.0], 0.0, 2.0, 0.01);
        match res {
            Err(Error::Divergence { last_finite, .. }) => assert!(last_finite[0].is_finite()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(rk4_integrate(|_, y| y.to_vec(), &[1.0], 0.0, 1.0, 0.0).is_err());
        assert!(rk4_integrate(|_, y| y.to_vec(), &[1.0], 1.0, 1.0, 0.1).is_err());
    }
}
