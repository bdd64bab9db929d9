//! Full-batch training, random hyperparameter search and OOD evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{norm, RngStream};
use crate::objectives::{objective_and_gradient, predict, risk, LinearModel, Loss, ObjectiveConfig};
use crate::sem::{generate_benchmark, make_test_env, EnvDataset, Example, FixedWeights, GeneratorSpec, Shift, Task};

/// Fraction of every training environment held out for validation.
pub const VALIDATION_FRACTION: f64 = 0.2;
pub const DEFAULT_STEPS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Zeros,
    Gaussian(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    /// Plain full-batch gradient descent.
    Gd,
    /// Full-batch Adam with the usual (0.9, 0.999, 1e-8) constants.
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub steps: usize,
    pub init: Init,
    pub optimizer: Optimizer,
}

impl TrainConfig {
    pub fn gd(lr: f64, steps: usize) -> Self {
        Self {
            lr,
            steps,
            init: Init::Zeros,
            optimizer: Optimizer::Gd,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::param(format!("learning rate must be finite and > 0, got {}", self.lr)));
        }
        if self.steps < 1 {
            return Err(Error::param("steps must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub model: LinearModel,
    pub objective_curve: Vec<f64>,
    pub final_train_risk: f64,
    pub val_risk: f64,
}

fn check_envs(envs: &[EnvDataset]) -> Result<()> {
    let first = envs
        .first()
        .ok_or_else(|| Error::param("training needs at least one environment"))?;
    for e in envs {
        if e.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: e.dim(),
            });
        }
        if e.task != first.task {
            return Err(Error::Incompatible("environments mix tasks".into()));
        }
    }
    Ok(())
}

fn init_model(dim: usize, init: Init, rng: &mut RngStream) -> LinearModel {
    match init {
        Init::Zeros => LinearModel::zeros(dim),
        Init::Gaussian(scale) => LinearModel {
            w: (0..dim).map(|_| rng.normal(0.0, scale)).collect(),
            b: 0.0,
        },
    }
}

/// Optimize the penalized objective on `envs` without any held-out split.
///
/// Returns the final model and the objective recorded before each update and
/// after the last one (`steps + 1` values).
pub fn fit(
    envs: &[EnvDataset],
    cfg: &ObjectiveConfig,
    tc: &TrainConfig,
    rng: &mut RngStream,
) -> Result<(LinearModel, Vec<f64>)> {
    fit_with(envs, cfg, tc, rng, |_, _| {})
}

/// [`fit`] with a callback invoked with `(step, model)` before each update and
/// once after the last.
pub fn fit_with<F>(
    envs: &[EnvDataset],
    cfg: &ObjectiveConfig,
    tc: &TrainConfig,
    rng: &mut RngStream,
    mut observe: F,
) -> Result<(LinearModel, Vec<f64>)>
where
    F: FnMut(usize, &LinearModel),
{
    check_envs(envs)?;
    tc.validate()?;
    cfg.validate()?;
    let mut model = init_model(envs[0].dim(), tc.init, rng);
    let mut theta = model.params();
    let mut curve = Vec::with_capacity(tc.steps + 1);
    let (mut m1, mut m2) = (vec![0.0; theta.len()], vec![0.0; theta.len()]);
    let (beta1, beta2, eps) = (0.9f64, 0.999f64, 1e-8);
    for step in 0..=tc.steps {
        observe(step, &model);
        let (value, grad) = objective_and_gradient(&model, envs, cfg)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                step,
                detail: format!("objective = {value}"),
                last_finite: theta,
            });
        }
        curve.push(value);
        if step == tc.steps {
            break;
        }
        match tc.optimizer {
            Optimizer::Gd => {
                for (t, g) in theta.iter_mut().zip(&grad) {
                    *t -= tc.lr * g;
                }
            }
            Optimizer::Adam => {
                let k = (step + 1) as i32;
                let (c1, c2) = (1.0 - beta1.powi(k), 1.0 - beta2.powi(k));
                for i in 0..theta.len() {
                    m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
                    m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
                    theta[i] -= tc.lr * (m1[i] / c1) / ((m2[i] / c2).sqrt() + eps);
                }
            }
        }
        model = LinearModel::from_params(&theta);
    }
    Ok((model, curve))
}

/// Deterministic 80/20 split of each environment into (train, validation).
pub fn split_envs(envs: &[EnvDataset], rng: &RngStream) -> (Vec<EnvDataset>, Vec<EnvDataset>) {
    envs.iter()
        .map(|env| {
            let perm = rng.fork_indexed("split", env.env_id).permutation(env.len());
            let n_val = ((env.len() as f64 * VALIDATION_FRACTION).round() as usize).clamp(1, env.len() - 1);
            let (val, train) = perm.split_at(n_val);
            (env.subset(train), env.subset(val))
        })
        .unzip()
}

fn mean_risk(model: &LinearModel, envs: &[EnvDataset], loss: Loss) -> Result<f64> {
    let mut s = 0.0;
    for e in envs {
        s += risk(model, e, loss)?;
    }
    Ok(s / envs.len() as f64)
}

/// Hold out 20% of each environment, train on the rest, report validation risk.
pub fn train_gd(
    envs: &[EnvDataset],
    cfg: &ObjectiveConfig,
    tc: &TrainConfig,
    rng: &RngStream,
) -> Result<TrainResult> {
    check_envs(envs)?;
    if envs.iter().any(|e| e.len() < 2) {
        return Err(Error::param("every environment needs at least two samples to split"));
    }
    let (train, val) = split_envs(envs, rng);
    let (model, objective_curve) = fit(&train, cfg, tc, &mut rng.fork("init"))?;
    Ok(TrainResult {
        final_train_risk: mean_risk(&model, &train, cfg.loss)?,
        val_risk: mean_risk(&model, &val, cfg.loss)?,
        model,
        objective_curve,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Mse,
    ClassError,
}

impl Metric {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => Metric::Mse,
            Task::Classification => Metric::ClassError,
        }
    }
}

/// Test metric; classification predicts class 1 when the score is `>= 0`.
pub fn evaluate(model: &LinearModel, env: &EnvDataset, metric: Metric) -> Result<f64> {
    if Metric::for_task(env.task) != metric {
        return Err(Error::Incompatible(format!("{metric:?} on a {:?} task", env.task)));
    }
    let pred = predict(model, &env.x)?;
    let n = env.len() as f64;
    Ok(match metric {
        Metric::Mse => pred.iter().zip(&env.y).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / n,
        Metric::ClassError => {
            pred.iter()
                .zip(&env.y)
                .filter(|(p, y)| (**p >= 0.0) as u8 as f64 != **y)
                .count() as f64
                / n
        }
    })
}

/// `‖v_spu‖ / ‖v‖` with `v = Sᵀw` split after the first `m` coordinates.
pub fn spurious_ratio(model: &LinearModel, fw: &FixedWeights, m: usize) -> f64 {
    let v = fw
        .scrambler
        .transpose()
        .matvec(&model.w)
        .expect("scrambler matches model width");
    let (inv, spu) = v.split_at(m);
    let (ni, ns) = (norm(inv), norm(spu));
    let total = (ni * ni + ns * ns).sqrt();
    if total == 0.0 {
        0.0
    } else {
        ns / total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Erm,
    Irm,
    IbErm,
    IbIrm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Erm, Method::Irm, Method::IbErm, Method::IbIrm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Erm => "ERM",
            Method::Irm => "IRM",
            Method::IbErm => "IB-ERM",
            Method::IbIrm => "IB-IRM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "erm" => Some(Method::Erm),
            "irm" => Some(Method::Irm),
            "iberm" => Some(Method::IbErm),
            "ibirm" => Some(Method::IbIrm),
            _ => None,
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, Method::Irm | Method::IbIrm)
    }

    pub fn uses_gamma(self) -> bool {
        matches!(self, Method::IbErm | Method::IbIrm)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One sampled hyperparameter configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HParams {
    pub lambda: f64,
    pub gamma: f64,
    pub lr: f64,
}

/// Sample `(λ, γ, lr)` in a fixed order so that every method sees the same
/// learning rate for the same query; unused weights are zeroed.
pub fn sample_hparams(method: Method, rng: &mut RngStream) -> HParams {
    let lambda = 10f64.powf(rng.uniform(-1.0, 4.0));
    let gamma = 1.0 - 10f64.powf(rng.uniform(-2.0, 0.0));
    let lr = 10f64.powf(rng.uniform(-3.0, -1.0));
    HParams {
        lambda: if method.uses_lambda() { lambda } else { 0.0 },
        gamma: if method.uses_gamma() { gamma } else { 0.0 },
        lr,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub n_queries: usize,
    pub n_seeds: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            n_queries: 20,
            n_seeds: 50,
        }
    }
}

/// Knobs of a sweep that are not part of the benchmark definition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub steps: usize,
    pub optimizer: Optimizer,
    pub shift: Shift,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            optimizer: Optimizer::Gd,
            shift: Shift::ScrambleSpurious,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub example: String,
    pub n_envs: usize,
    pub method: Method,
    pub data_seed: usize,
    pub hparam_id: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub lr: f64,
    pub val_risk: f64,
    pub test_metric: f64,
    /// Worst shifted environment.
    pub test_metric_worst: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Row with the smallest validation risk per (example, n_envs, method, seed).
    /// Ties go to the lower `hparam_id`; non-finite risks never win.
    pub fn selected(&self) -> Vec<&SweepRow> {
        let mut best: Vec<&SweepRow> = Vec::new();
        for row in &self.rows {
            let key = (&row.example, row.n_envs, row.method, row.data_seed);
            match best
                .iter_mut()
                .find(|b| (&b.example, b.n_envs, b.method, b.data_seed) == key)
            {
                Some(b) => {
                    if better(row, b) {
                        *b = row;
                    }
                }
                None => best.push(row),
            }
        }
        best
    }
}

fn better(a: &SweepRow, b: &SweepRow) -> bool {
    match (a.val_risk.is_finite(), b.val_risk.is_finite()) {
        (true, false) => true,
        (false, _) => false,
        (true, true) => a.val_risk < b.val_risk || (a.val_risk == b.val_risk && a.hparam_id < b.hparam_id),
    }
}

/// Short name used in files: `ex1`, `ex2s`, `twod`, ...
pub fn example_label(spec: &GeneratorSpec) -> String {
    let base = match spec.example {
        Example::Ex1 => "ex1",
        Example::Ex2 => "ex2",
        Example::Ex3 => "ex3",
        Example::TwoD => "twod",
        Example::Xor => "xor",
    };
    if spec.scramble && matches!(spec.example, Example::Ex1 | Example::Ex2 | Example::Ex3) {
        format!("{base}s")
    } else {
        base.to_string()
    }
}

pub fn loss_for(task: Task) -> Loss {
    match task {
        Task::Regression => Loss::Square,
        Task::Classification => Loss::Logistic,
    }
}

struct SeedData {
    train: Vec<EnvDataset>,
    test: Vec<EnvDataset>,
}

fn seed_data(spec: &GeneratorSpec, shift: Shift, seed_rng: &RngStream) -> Result<SeedData> {
    let (params, fw, train) = generate_benchmark(spec, &seed_rng.fork("data"))?;
    let test = params
        .iter()
        .map(|p| make_test_env(spec, p, &fw, shift, &mut seed_rng.fork_indexed("test", p.env_id)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedData { train, test })
}

fn run_cell(
    spec: &GeneratorSpec,
    method: Method,
    data: &SeedData,
    seed: usize,
    query: usize,
    settings: &SweepSettings,
    seed_rng: &RngStream,
) -> Result<SweepRow> {
    let task = spec.example.task();
    let query_rng = seed_rng.fork_indexed("query", query);
    let hp = sample_hparams(method, &mut query_rng.fork("hparams"));
    let cfg = ObjectiveConfig {
        loss: loss_for(task),
        lambda: hp.lambda,
        gamma: hp.gamma,
    };
    let tc = TrainConfig {
        lr: hp.lr,
        steps: settings.steps,
        init: Init::Zeros,
        optimizer: settings.optimizer,
    };
    let mut row = SweepRow {
        example: example_label(spec),
        n_envs: spec.n_envs,
        method,
        data_seed: seed,
        hparam_id: query,
        lambda: hp.lambda,
        gamma: hp.gamma,
        lr: hp.lr,
        val_risk: f64::INFINITY,
        test_metric: f64::NAN,
        test_metric_worst: f64::NAN,
    };
    match train_gd(&data.train, &cfg, &tc, &query_rng.fork("train")) {
        Ok(res) => {
            let metric = Metric::for_task(task);
            let scores = data
                .test
                .iter()
                .map(|e| evaluate(&res.model, e, metric))
                .collect::<Result<Vec<_>>>()?;
            row.val_risk = res.val_risk;
            row.test_metric = scores.iter().sum::<f64>() / scores.len() as f64;
            row.test_metric_worst = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
        // A diverged query stays in the report with infinite validation risk.
        Err(e) if e.is_divergence() => {}
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Random search for several methods sharing data seeds and query streams.
///
/// Cells are independent and run on the current rayon pool; rows come back
/// ordered by (method, seed, query) regardless of scheduling.
pub fn sweep(
    spec: &GeneratorSpec,
    methods: &[Method],
    protocol: Protocol,
    settings: &SweepSettings,
    rng: &RngStream,
) -> Result<SweepReport> {
    spec.validate()?;
    if protocol.n_queries < 1 || protocol.n_seeds < 1 {
        return Err(Error::param("protocol needs n_queries >= 1 and n_seeds >= 1"));
    }
    let seeds: Vec<(RngStream, SeedData)> = (0..protocol.n_seeds)
        .into_par_iter()
        .map(|s| {
            let seed_rng = rng.fork_indexed("seed", s);
            let data = seed_data(spec, settings.shift, &seed_rng)?;
            Ok((seed_rng, data))
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(Method, usize, usize)> = methods
        .iter()
        .flat_map(|&m| (0..protocol.n_seeds).flat_map(move |s| (0..protocol.n_queries).map(move |q| (m, s, q))))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(m, s, q)| run_cell(spec, m, &seeds[s].1, s, q, settings, &seeds[s].0))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}

/// Single-method random search.
pub fn random_search(
    spec: &GeneratorSpec,
    method: Method,
    protocol: Protocol,
    settings: &SweepSettings,
    rng: &RngStream,
) -> Result<SweepReport> {
    sweep(spec, &[method], protocol, settings, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{random_orthogonal, Matrix};

    fn linear_env(n: usize, rng: &mut RngStream) -> EnvDataset {
        let w = [1.5, -2.0, 0.5];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let r: Vec<f64> = (0..3).map(|_| rng.std_normal()).collect();
            y.push(r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.25);
            rows.push(r);
        }
        EnvDataset {
            env_id: 0,
            x: Matrix::from_rows(&rows).unwrap(),
            y,
            z_inv: None,
            z_spu: None,
            task: Task::Regression,
        }
    }

    #[test]
    fn exact_linear_fit() {
        let env = linear_env(200, &mut RngStream::root(1));
        let res = train_gd(&[env], &ObjectiveConfig::erm(Loss::Square), &TrainConfig::gd(0.1, 2000), &RngStream::root(2)).unwrap();
        assert!(res.final_train_risk <= 1e-6, "{}", res.final_train_risk);
        assert!(res.val_risk <= 1e-6);
        assert_eq!(res.objective_curve.len(), 2001);
    }

    #[test]
    fn descent_below_curvature_bound() {
        let env = linear_env(100, &mut RngStream::root(3));
        // Curvature of the mean square loss is at most 2·λmax(XᵀX/n) <= 2·mean‖(x,1)‖².
        let bound: f64 = env.x.row_iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).sum::<f64>()
            / env.len() as f64
            * 2.0;
        let lr = 0.9 / bound;
        let (_, curve) = fit(&[env], &ObjectiveConfig::erm(Loss::Square), &TrainConfig::gd(lr, 300), &mut RngStream::root(4)).unwrap();
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn deterministic_training() {
        let env = linear_env(80, &mut RngStream::root(5));
        let cfg = ObjectiveConfig {
            loss: Loss::Square,
            lambda: 0.1,
            gamma: 0.1,
        };
        let tc = TrainConfig {
            init: Init::Gaussian(0.1),
            ..TrainConfig::gd(0.01, 200)
        };
        let a = train_gd(std::slice::from_ref(&env), &cfg, &tc, &RngStream::root(6)).unwrap();
        let b = train_gd(&[env], &cfg, &tc, &RngStream::root(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported() {
        let env = linear_env(50, &mut RngStream::root(7));
        let err = fit(&[env], &ObjectiveConfig::erm(Loss::Square), &TrainConfig::gd(100.0, 500), &mut RngStream::root(8)).unwrap_err();
        assert!(err.is_divergence());
    }

    #[test]
    fn split_is_disjoint_and_stable() {
        let mut env = linear_env(50, &mut RngStream::root(9));
        env.y = (0..50).map(|i| i as f64).collect();
        let rng = RngStream::root(10);
        let (tr, va) = split_envs(&[env.clone()], &rng);
        assert_eq!(va[0].len(), 10);
        let mut all: Vec<f64> = tr[0].y.iter().chain(&va[0].y).cloned().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, env.y);
        let (_, va2) = split_envs(&[env], &rng);
        assert_eq!(va[0].y, va2[0].y);
    }

    fn cls_env(pred_rows: Vec<Vec<f64>>, y: Vec<f64>) -> EnvDataset {
        EnvDataset {
            env_id: 0,
            x: Matrix::from_rows(&pred_rows).unwrap(),
            y,
            z_inv: None,
            z_spu: None,
            task: Task::Classification,
        }
    }

    #[test]
    fn class_error_counts() {
        let env = cls_env(vec![vec![1.0], vec![-1.0], vec![0.0], vec![-2.0]], vec![1.0, 0.0, 0.0, 1.0]);
        let id = LinearModel { w: vec![1.0], b: 0.0 };
        // predictions 1,0,1,0 against 1,0,0,1
        assert_eq!(evaluate(&id, &env, Metric::ClassError).unwrap(), 0.5);
        let perfect = cls_env(vec![vec![1.0], vec![-1.0]], vec![1.0, 0.0]);
        assert_eq!(evaluate(&id, &perfect, Metric::ClassError).unwrap(), 0.0);
        let zero = LinearModel::zeros(1);
        assert_eq!(evaluate(&zero, &perfect, Metric::ClassError).unwrap(), 0.5);
        assert!(evaluate(&zero, &perfect, Metric::Mse).is_err());
    }

    #[test]
    fn spurious_ratio_cases() {
        let spec = GeneratorSpec::new(Example::Ex1, 1);
        let mut fw = FixedWeights::draw(&spec, &mut RngStream::root(0)).unwrap();
        let mut w = vec![0.0; 10];
        w[0] = 2.0;
        w[3] = -1.0;
        assert_eq!(spurious_ratio(&LinearModel { w: w.clone(), b: 0.0 }, &fw, 5), 0.0);
        let mut ws = vec![0.0; 10];
        ws[7] = 3.0;
        assert_eq!(spurious_ratio(&LinearModel { w: ws, b: 0.0 }, &fw, 5), 1.0);

        let mut rng = RngStream::root(1);
        fw.scrambler = random_orthogonal(&mut rng, 10).unwrap();
        let w: Vec<f64> = (0..10).map(|_| rng.std_normal()).collect();
        let v = fw.scrambler.transpose().matvec(&w).unwrap();
        let direct = norm(&v[5..]) / norm(&v);
        let got = spurious_ratio(&LinearModel { w, b: 0.0 }, &fw, 5);
        assert!((got - direct).abs() < 1e-14);
    }

    #[test]
    fn gamma_samples_in_range() {
        let mut rng = RngStream::root(2);
        for _ in 0..10_000 {
            let hp = sample_hparams(Method::IbIrm, &mut rng);
            assert!(hp.gamma > 0.0 && hp.gamma <= 0.99 + 1e-12, "{}", hp.gamma);
            assert!((0.1..=1e4).contains(&hp.lambda));
            assert!((1e-3..=1e-1).contains(&hp.lr));
        }
        let erm = sample_hparams(Method::Erm, &mut rng);
        assert_eq!((erm.lambda, erm.gamma), (0.0, 0.0));
    }

    #[test]
    fn single_cell_sweep() {
        let spec = GeneratorSpec::new(Example::Ex2, 2).with_n(50);
        let settings = SweepSettings {
            steps: 20,
            ..Default::default()
        };
        let proto = Protocol { n_queries: 1, n_seeds: 1 };
        let rep = random_search(&spec, Method::IbErm, proto, &settings, &RngStream::root(3)).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].example, "ex2");
    }

    #[test]
    fn selection_is_argmin() {
        let spec = GeneratorSpec::new(Example::Ex3, 2).with_n(40);
        let settings = SweepSettings {
            steps: 30,
            ..Default::default()
        };
        let proto = Protocol { n_queries: 5, n_seeds: 3 };
        let rep = sweep(&spec, &[Method::Erm, Method::Irm], proto, &settings, &RngStream::root(4)).unwrap();
        assert_eq!(rep.rows.len(), 30);
        let sel = rep.selected();
        assert_eq!(sel.len(), 6);
        for s in sel {
            let min = rep
                .rows
                .iter()
                .filter(|r| r.method == s.method && r.data_seed == s.data_seed)
                .map(|r| r.val_risk)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(s.val_risk, min);
        }
    }

    #[test]
    fn sweep_independent_of_thread_count() {
        let spec = GeneratorSpec::new(Example::Ex1, 3).with_n(30);
        let settings = SweepSettings {
            steps: 25,
            ..Default::default()
        };
        let proto = Protocol { n_queries: 3, n_seeds: 2 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sweep(&spec, &Method::ALL, proto, &settings, &RngStream::root(5)).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn methods_share_learning_rate() {
        let mut r1 = RngStream::root(6);
        let mut r2 = RngStream::root(6);
        assert_eq!(sample_hparams(Method::Erm, &mut r1).lr, sample_hparams(Method::IbIrm, &mut r2).lr);
    }
}
