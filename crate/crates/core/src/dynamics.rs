//! Gradient-flow lab for the 2D cow/camel toy under exponential loss.
//!
//! With `x = w_inv + w_spu` and `y = w_inv - w_spu` the flows decouple:
//!
//! ```text
//! dx/dt = 2p (e^{-x} - 2γx)        dy/dt = 2(1-p) (e^{-y} - 2γy)
//! ```
//!
//! (the `γ` terms vanish for ERM). Both coordinates start at zero and, for
//! IB-ERM, settle at `x* = W0(1/(2γ))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{lambert_w0, rk4_integrate, rk4_visit, RngStream};
use crate::objectives::{LinearModel, Loss, ObjectiveConfig};
use crate::sem::{gen_2d, EnvDataset, EnvParams};
use crate::trainer::{fit_with, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    Erm,
    IbErm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    /// Average selection bias over training environments.
    pub p: f64,
    pub gamma: f64,
}

impl FlowSpec {
    pub fn erm(p: f64) -> Result<Self> {
        Self::new(FlowKind::Erm, p, 0.0)
    }

    pub fn ib_erm(p: f64, gamma: f64) -> Result<Self> {
        Self::new(FlowKind::IbErm, p, gamma)
    }

    pub fn new(kind: FlowKind, p: f64, gamma: f64) -> Result<Self> {
        if !(p > 0.5 && p < 1.0) {
            return Err(Error::param(format!("p must lie in (1/2, 1), got {p}")));
        }
        if kind == FlowKind::IbErm && !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param(format!("gamma must be > 0 for IB-ERM, got {gamma}")));
        }
        Ok(Self { kind, p, gamma })
    }

    /// Skips the `p > 1/2` check; the symmetric boundary `p = 1/2` is useful in tests.
    pub fn new_unchecked(kind: FlowKind, p: f64, gamma: f64) -> Self {
        Self { kind, p, gamma }
    }

    fn effective_gamma(&self) -> f64 {
        match self.kind {
            FlowKind::Erm => 0.0,
            FlowKind::IbErm => self.gamma,
        }
    }
}

/// `W0(1/(2γ))`, the IB-ERM equilibrium of both rotated coordinates.
pub fn equilibrium_x(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::param(format!("gamma must be > 0, got {gamma}")));
    }
    lambert_w0(1.0 / (2.0 * gamma))
}

/// Right-hand side in rotated coordinates `(x, y)`.
pub fn flow_rhs(spec: &FlowSpec) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    let (p, g) = (spec.p, spec.effective_gamma());
    move |_t, s| {
        vec![
            2.0 * p * ((-s[0]).exp() - 2.0 * g * s[0]),
            2.0 * (1.0 - p) * ((-s[1]).exp() - 2.0 * g * s[1]),
        ]
    }
}

pub fn to_weights(x: f64, y: f64) -> (f64, f64) {
    (0.5 * (x + y), 0.5 * (x - y))
}

/// `|w_spu / w_inv|`, with the value at the origin replaced by its one-sided
/// limit along the flow, `|ẇ_spu(0) / ẇ_inv(0)| = |2p - 1|`.
pub fn weight_ratio(spec: &FlowSpec, w_inv: f64, w_spu: f64) -> f64 {
    if w_inv == 0.0 && w_spu == 0.0 {
        let d = flow_rhs(spec)(0.0, &[0.0, 0.0]);
        let (di, ds) = to_weights(d[0], d[1]);
        return (ds / di).abs();
    }
    (w_spu / w_inv).abs()
}

/// Flow trajectory with states in `(w_inv, w_spu)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<(f64, f64)>,
}

/// Integrate the flow from the origin to `t_end`.
pub fn simulate_flow(spec: &FlowSpec, t_end: f64, dt: f64) -> Result<FlowTrajectory> {
    if !(t_end > 0.0) {
        return Err(Error::param("t_end must be > 0"));
    }
    let tr = rk4_integrate(flow_rhs(spec), &[0.0, 0.0], 0.0, t_end, dt)?;
    Ok(FlowTrajectory {
        times: tr.times,
        states: tr.states.iter().map(|s| to_weights(s[0], s[1])).collect(),
    })
}

/// Closed-form ERM flow: `x = ln(1 + 2pt)`, `y = ln(1 + 2(1-p)t)`.
pub fn erm_flow_exact(p: f64, t: f64) -> (f64, f64) {
    let x = (2.0 * p * t).ln_1p();
    let y = (2.0 * (1.0 - p) * t).ln_1p();
    to_weights(x, y)
}

/// Bound on the time IB-ERM needs to push the ratio below `eps`.
pub fn t_ib_bound(gamma: f64, p: f64, eps: f64) -> Result<f64> {
    Ok(equilibrium_x(gamma)? / (2.0 * (1.0 - p) * eps))
}

/// Lower bound on the ERM ratio after time `t`.
pub fn erm_ratio_lower_bound(p: f64, t: f64) -> f64 {
    ((1.0 + 2.0 * p) / (3.0 - 2.0 * p)).ln() / t.ln_1p()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem5Report {
    pub p: f64,
    pub gamma: f64,
    pub eps: f64,
    pub dt: f64,
    pub x_star: f64,
    pub t_ib: f64,
    /// First time after which the IB-ERM ratio stays `<= eps` up to `t_ib`.
    pub crossing_time: Option<f64>,
    /// Same for the threshold `eps / x*`.
    pub crossing_time_scaled: Option<f64>,
    pub ib_ratio_at_crossing: Option<f64>,
    pub ib_ratio_at_tib: f64,
    pub erm_ratio_at_tib: f64,
    pub erm_lower_bound: f64,
    pub ib_within_bound: bool,
    pub erm_above_bound: bool,
    pub pass: bool,
}

/// Last time the ratio entered `[0, threshold]` without leaving again.
struct CrossingTracker {
    threshold: f64,
    entered: Option<(f64, f64)>,
}

impl CrossingTracker {
    fn new(threshold: f64) -> Self {
        Self {
            threshold,
            entered: None,
        }
    }

    fn observe(&mut self, t: f64, ratio: f64) {
        if ratio <= self.threshold {
            if self.entered.is_none() {
                self.entered = Some((t, ratio));
            }
        } else {
            self.entered = None;
        }
    }
}

/// Integrate both flows to `T_ib` and check the two inequalities.
pub fn theorem5_report(p: f64, gamma: f64, eps: f64, dt: f64) -> Result<Theorem5Report> {
    if !(eps > 0.0) {
        return Err(Error::param("eps must be > 0"));
    }
    if eps >= 1.0 {
        return Err(Error::param("eps >= 1 makes the ratio bound degenerate"));
    }
    let ib = FlowSpec::ib_erm(p, gamma)?;
    let erm = FlowSpec::erm(p)?;
    let x_star = equilibrium_x(gamma)?;
    let t_ib = t_ib_bound(gamma, p, eps)?;

    let mut cross = CrossingTracker::new(eps);
    let mut cross_scaled = CrossingTracker::new(eps / x_star);
    let last_ib = rk4_visit(flow_rhs(&ib), &[0.0, 0.0], 0.0, t_ib, dt, |t, s| {
        let (wi, ws) = to_weights(s[0], s[1]);
        let r = weight_ratio(&ib, wi, ws);
        cross.observe(t, r);
        cross_scaled.observe(t, r);
    })?;
    let last_erm = rk4_visit(flow_rhs(&erm), &[0.0, 0.0], 0.0, t_ib, dt, |_, _| {})?;

    let (wi, ws) = to_weights(last_ib[0], last_ib[1]);
    let ib_ratio_at_tib = weight_ratio(&ib, wi, ws);
    let (ei, es) = to_weights(last_erm[0], last_erm[1]);
    let erm_ratio_at_tib = weight_ratio(&erm, ei, es);
    let erm_lower_bound = erm_ratio_lower_bound(p, t_ib);
    let ib_within_bound = cross.entered.is_some_and(|(t, _)| t <= t_ib);
    let erm_above_bound = erm_ratio_at_tib >= erm_lower_bound;
    Ok(Theorem5Report {
        p,
        gamma,
        eps,
        dt,
        x_star,
        t_ib,
        crossing_time: cross.entered.map(|c| c.0),
        crossing_time_scaled: cross_scaled.entered.map(|c| c.0),
        ib_ratio_at_crossing: cross.entered.map(|c| c.1),
        ib_ratio_at_tib,
        erm_ratio_at_tib,
        erm_lower_bound,
        ib_within_bound,
        erm_above_bound,
        pass: ib_within_bound && erm_above_bound,
    })
}

/// Sampled trajectory rows `(t, w_inv, w_spu, ratio)` every `stride` steps,
/// always including the final state.
pub fn trajectory_rows(spec: &FlowSpec, t_end: f64, dt: f64, stride: usize) -> Result<Vec<[f64; 4]>> {
    let stride = stride.max(1);
    let mut rows = Vec::new();
    let mut k = 0usize;
    let mut last = None;
    rk4_visit(flow_rhs(spec), &[0.0, 0.0], 0.0, t_end, dt, |t, s| {
        let (wi, ws) = to_weights(s[0], s[1]);
        let row = [t, wi, ws, weight_ratio(spec, wi, ws)];
        if k.is_multiple_of(stride) {
            rows.push(row);
            last = None;
        } else {
            last = Some(row);
        }
        k += 1;
    })?;
    rows.extend(last);
    Ok(rows)
}

/// Training environments for the 2D toy recoded to `{-1, +1}`.
pub fn signed_2d_envs(ps: &[f64], n: usize, rng: &RngStream) -> Result<Vec<EnvDataset>> {
    ps.iter()
        .enumerate()
        .map(|(e, &p)| {
            let params = EnvParams {
                env_id: e,
                p: Some(p),
                ..Default::default()
            };
            Ok(gen_2d(&params, n, &mut rng.fork_indexed("env", e))?.to_signed())
        })
        .collect()
}

/// `|w_spu| / sqrt(w_inv² + w_spu²)` for a 2D model.
pub fn planar_spurious_ratio(model: &LinearModel) -> f64 {
    let (wi, ws) = (model.w[0], model.w[1]);
    let r = (wi * wi + ws * ws).sqrt();
    if r == 0.0 {
        0.0
    } else {
        ws.abs() / r
    }
}

/// Gradient descent on the 2D toy with exponential loss; returns the
/// planar spurious ratio before every step and after the last.
pub fn gd_ratio_curve(envs: &[EnvDataset], gamma: f64, tc: &TrainConfig) -> Result<(LinearModel, Vec<f64>)> {
    let cfg = ObjectiveConfig {
        loss: Loss::Exponential,
        lambda: 0.0,
        gamma,
    };
    let mut ratios = Vec::with_capacity(tc.steps + 1);
    let (model, _) = fit_with(envs, &cfg, tc, &mut RngStream::root(0), |_, m| {
        ratios.push(planar_spurious_ratio(m));
    })?;
    Ok((model, ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn equilibrium_values() {
        let x = equilibrium_x(1e6).unwrap();
        assert!((x - 5e-7).abs() < 1e-12);
        assert!((equilibrium_x(1.0 / (2.0 * E)).unwrap() - 1.0).abs() < 1e-14);
        let w = equilibrium_x(0.58).unwrap();
        assert!((w * w.exp() - 1.0 / 1.16).abs() < 1e-12);
        assert!(equilibrium_x(0.0).is_err());
    }

    #[test]
    fn rhs_vanishes_at_equilibrium() {
        for g in [0.1, 0.58, 1.0, 10.0] {
            let spec = FlowSpec::ib_erm(0.9, g).unwrap();
            let xs = equilibrium_x(g).unwrap();
            let r = flow_rhs(&spec)(0.0, &[xs, xs]);
            assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
        }
    }

    #[test]
    fn erm_rhs_at_origin() {
        let spec = FlowSpec::erm(0.8).unwrap();
        let r = flow_rhs(&spec)(0.0, &[0.0, 0.0]);
        assert!((r[0] - 1.6).abs() < 1e-15 && (r[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ib_flow_monotone_to_equilibrium() {
        let spec = FlowSpec::ib_erm(0.9, 0.58).unwrap();
        let tr = rk4_integrate(flow_rhs(&spec), &[0.0, 0.0], 0.0, 200.0, 1e-2).unwrap();
        let xs = equilibrium_x(0.58).unwrap();
        for w in tr.states.windows(2) {
            assert!(w[1][0] >= w[0][0] && w[1][1] >= w[0][1]);
            // Lyapunov function (x - x*)^2 never increases
            assert!((w[1][0] - xs).powi(2) <= (w[0][0] - xs).powi(2));
            assert!((w[1][1] - xs).powi(2) <= (w[0][1] - xs).powi(2));
        }
        let last = tr.last_state();
        assert!((last[0] - xs).abs() <= 1e-6 && (last[1] - xs).abs() <= 1e-6);
    }

    #[test]
    fn symmetric_boundary_has_no_spurious_weight() {
        let spec = FlowSpec::new_unchecked(FlowKind::IbErm, 0.5, 0.3);
        let tr = simulate_flow(&spec, 5.0, 1e-2).unwrap();
        assert!(tr.states.iter().all(|(_, ws)| *ws == 0.0));
    }

    #[test]
    fn erm_flow_matches_closed_form() {
        let spec = FlowSpec::erm(0.9).unwrap();
        let tr = simulate_flow(&spec, 50.0, 1e-2).unwrap();
        let (wi, ws) = *tr.states.last().unwrap();
        let (ei, es) = erm_flow_exact(0.9, 50.0);
        assert!((wi - ei).abs() < 1e-9 && (ws - es).abs() < 1e-9);
    }

    #[test]
    fn origin_ratio_uses_slope_limit() {
        let spec = FlowSpec::erm(0.9).unwrap();
        assert!((weight_ratio(&spec, 0.0, 0.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn t_ib_scales_inversely_with_eps() {
        let a = t_ib_bound(0.58, 0.9, 1e-3).unwrap();
        let b = t_ib_bound(0.58, 0.9, 2e-3).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_eps_rejected() {
        assert!(theorem5_report(0.9, 0.58, 1.0, 1e-3).is_err());
        assert!(theorem5_report(0.9, 0.58, 0.0, 1e-3).is_err());
        assert!(theorem5_report(0.4, 0.58, 0.1, 1e-3).is_err());
    }

    #[test]
    fn trajectory_rows_include_endpoints() {
        let spec = FlowSpec::ib_erm(0.8, 1.0).unwrap();
        let rows = trajectory_rows(&spec, 1.0, 0.01, 7).unwrap();
        assert_eq!(rows[0][0], 0.0);
        assert_eq!(rows.last().unwrap()[0], 1.0);
    }
}
