//! Risks, the IRMv1 invariance penalty, the pooled-variance bottleneck
//! penalty, and their penalized sum with exact gradients for linear models.
//!
//! Gradients are taken with respect to the parameter vector `(w, b)`, intercept
//! last. The IRMv1 scalar multiplies the whole output `w·x + b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, Matrix};
use crate::sem::{EnvDataset, Task};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: vec![0.0; dim],
            b: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Parameters flattened as `(w, b)`.
    pub fn params(&self) -> Vec<f64> {
        let mut v = self.w.clone();
        v.push(self.b);
        v
    }

    pub fn from_params(theta: &[f64]) -> Self {
        let (w, b) = theta.split_at(theta.len() - 1);
        Self {
            w: w.to_vec(),
            b: b[0],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.w.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Loss {
    Square,
    Logistic,
    Exponential,
}

impl Loss {
    fn check_task(self, task: Task) -> Result<()> {
        match (self, task) {
            (Loss::Square, Task::Regression) => Ok(()),
            (Loss::Logistic | Loss::Exponential, Task::Classification) => Ok(()),
            _ => Err(Error::Incompatible(format!("{self:?} loss on a {task:?} task"))),
        }
    }

    /// Loss value and its first two derivatives in the prediction.
    #[inline]
    fn eval(self, pred: f64, y: f64) -> (f64, f64, f64) {
        match self {
            Loss::Square => {
                let r = pred - y;
                (r * r, 2.0 * r, 2.0)
            }
            Loss::Logistic => {
                // One exponential serves both softplus and the sigmoid.
                let e = (-pred.abs()).exp();
                let sig = if pred >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
                (pred.max(0.0) + e.ln_1p() - y * pred, sig - y, sig * (1.0 - sig))
            }
            Loss::Exponential => {
                let ys = 2.0 * y - 1.0;
                let e = (-ys * pred).exp();
                (e, -ys * e, e)
            }
        }
    }
}

/// Penalty weights selecting ERM, IRM, IB-ERM or IB-IRM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub loss: Loss,
    pub lambda: f64,
    pub gamma: f64,
}

impl ObjectiveConfig {
    pub fn erm(loss: Loss) -> Self {
        Self {
            loss,
            lambda: 0.0,
            gamma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.gamma >= 0.0) || !self.lambda.is_finite() || !self.gamma.is_finite() {
            return Err(Error::param("lambda and gamma must be finite and >= 0"));
        }
        Ok(())
    }
}

fn check_dim(model: &LinearModel, x: &Matrix) -> Result<()> {
    if x.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.cols(),
        });
    }
    Ok(())
}

/// Row-wise `w·x + b`.
pub fn predict(model: &LinearModel, x: &Matrix) -> Result<Vec<f64>> {
    check_dim(model, x)?;
    Ok(x.row_iter().map(|r| dot(&model.w, r) + model.b).collect())
}

/// Mean loss over the environment.
pub fn risk(model: &LinearModel, env: &EnvDataset, loss: Loss) -> Result<f64> {
    loss.check_task(env.task)?;
    let pred = predict(model, &env.x)?;
    Ok(mean_by(&pred, &env.y, |p, y| loss.eval(p, y).0))
}

fn mean_by(pred: &[f64], y: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    pred.iter().zip(y).map(|(&p, &y)| f(p, y)).sum::<f64>() / pred.len() as f64
}

/// Derivative of the risk of `s·f` at `s = 1`.
fn irm_slope(pred: &[f64], y: &[f64], loss: Loss) -> f64 {
    mean_by(pred, y, |p, y| loss.eval(p, y).1 * p)
}

/// `(d/ds R(s·f) at s = 1)^2`.
pub fn irmv1_penalty(model: &LinearModel, env: &EnvDataset, loss: Loss) -> Result<f64> {
    loss.check_task(env.task)?;
    let pred = predict(model, &env.x)?;
    Ok(irm_slope(&pred, &env.y, loss).powi(2))
}

/// Population variance of predictions pooled over every sample of every environment.
pub fn variance_penalty(model: &LinearModel, envs: &[EnvDataset]) -> Result<f64> {
    let mut preds = Vec::new();
    for env in envs {
        preds.extend(predict(model, &env.x)?);
    }
    if preds.is_empty() {
        return Err(Error::param("variance penalty needs at least one sample"));
    }
    Ok(population_variance(&preds))
}

pub(crate) fn population_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n
}

/// Value and gradient terms reported separately.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveBreakdown {
    pub value: f64,
    pub risk_sum: f64,
    pub irm_sum: f64,
    pub variance: f64,
    pub grad: Vec<f64>,
}

/// `Σ_e (R_e + λ·irmv1_e + γ·Var_pooled)` and its gradient in `(w, b)`.
pub fn objective_and_gradient(
    model: &LinearModel,
    envs: &[EnvDataset],
    cfg: &ObjectiveConfig,
) -> Result<(f64, Vec<f64>)> {
    let b = objective_breakdown(model, envs, cfg)?;
    Ok((b.value, b.grad))
}

pub fn objective_breakdown(
    model: &LinearModel,
    envs: &[EnvDataset],
    cfg: &ObjectiveConfig,
) -> Result<ObjectiveBreakdown> {
    cfg.validate()?;
    if envs.is_empty() {
        return Err(Error::param("objective needs at least one environment"));
    }
    let d = model.dim();
    let mut grad = vec![0.0; d + 1];
    let mut risk_sum = 0.0;
    let mut irm_sum = 0.0;
    let mut all_preds: Vec<Vec<f64>> = Vec::with_capacity(envs.len());
    let mut total_n = 0usize;
    let mut pred_sum = 0.0;

    for env in envs {
        cfg.loss.check_task(env.task)?;
        let pred = predict(model, &env.x)?;
        let n = env.len() as f64;
        let mut r = 0.0;
        let mut slope = 0.0;
        let mut g_risk = vec![0.0; d + 1];
        let mut g_slope = vec![0.0; d + 1];
        for (i, row) in env.x.row_iter().enumerate() {
            let (l, l1, l2) = cfg.loss.eval(pred[i], env.y[i]);
            r += l;
            slope += l1 * pred[i];
            let c_slope = l2 * pred[i] + l1;
            for k in 0..d {
                g_risk[k] += l1 * row[k];
                g_slope[k] += c_slope * row[k];
            }
            g_risk[d] += l1;
            g_slope[d] += c_slope;
        }
        r /= n;
        slope /= n;
        risk_sum += r;
        irm_sum += slope * slope;
        for k in 0..=d {
            grad[k] += g_risk[k] / n + cfg.lambda * 2.0 * slope * g_slope[k] / n;
        }
        total_n += env.len();
        pred_sum += pred.iter().sum::<f64>();
        all_preds.push(pred);
    }

    let mut variance = 0.0;
    if total_n == 0 {
        return Err(Error::param("objective needs at least one sample"));
    }
    let mean = pred_sum / total_n as f64;
    let mut g_var = vec![0.0; d + 1];
    for (env, pred) in envs.iter().zip(&all_preds) {
        for (row, &p) in env.x.row_iter().zip(pred) {
            let c = p - mean;
            variance += c * c;
            for k in 0..d {
                g_var[k] += c * row[k];
            }
        }
    }
    variance /= total_n as f64;
    // Var(f) appears once per environment.
    let n_env = envs.len() as f64;
    for k in 0..d {
        grad[k] += cfg.gamma * n_env * 2.0 * g_var[k] / total_n as f64;
    }
    let value = risk_sum + cfg.lambda * irm_sum + cfg.gamma * n_env * variance;
    Ok(ObjectiveBreakdown {
        value,
        risk_sum,
        irm_sum,
        variance,
        grad,
    })
}
