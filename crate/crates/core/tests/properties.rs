use ibirm_core::entropy::{pmf_convolve, pmf_entropy};
use ibirm_core::numeric::{lambert_w0, norm, random_orthogonal};
use ibirm_core::objectives::{irmv1_penalty, objective_and_gradient, variance_penalty};
use ibirm_core::report::{fmt_f64, mean_std};
use ibirm_core::trainer::spurious_ratio;
use ibirm_core::{EnvDataset, FixedWeights, LinearModel, Loss, Matrix, ObjectiveConfig, Pmf, RngStream, Task};
use proptest::prelude::*;

fn dataset(seed: u64, n: usize, d: usize, task: Task) -> EnvDataset {
    let mut rng = RngStream::root(seed);
    let data: Vec<f64> = (0..n * d).map(|_| rng.std_normal()).collect();
    let y = (0..n)
        .map(|_| match task {
            Task::Regression => rng.std_normal(),
            Task::Classification => rng.bernoulli(0.5) as u8 as f64,
        })
        .collect();
    EnvDataset {
        env_id: 0,
        x: Matrix::from_vec(n, d, data).unwrap(),
        y,
        z_inv: None,
        z_spu: None,
        task,
    }
}

fn loss_strategy() -> impl Strategy<Value = (Loss, Task)> {
    prop_oneof![
        Just((Loss::Square, Task::Regression)),
        Just((Loss::Logistic, Task::Classification)),
        Just((Loss::Exponential, Task::Classification)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penalties_are_nonnegative(
        seed in 0u64..1000,
        (loss, task) in loss_strategy(),
        w in prop::collection::vec(-3.0f64..3.0, 3),
        b in -2.0f64..2.0,
    ) {
        let env = dataset(seed, 25, 3, task);
        let model = LinearModel { w, b };
        prop_assert!(irmv1_penalty(&model, &env, loss).unwrap() >= 0.0);
        prop_assert!(variance_penalty(&model, &[env.clone(), dataset(seed + 1, 7, 3, task)]).unwrap() >= 0.0);
    }

    #[test]
    fn gradient_matches_central_differences(
        seed in 0u64..1000,
        (loss, task) in loss_strategy(),
        li in 0usize..3,
        gi in 0usize..3,
    ) {
        let grid = [0.0, 0.1, 10.0];
        let cfg = ObjectiveConfig { loss, lambda: grid[li], gamma: grid[gi] };
        let envs: Vec<_> = (0..3).map(|e| dataset(seed * 3 + e, 15, 2, task)).collect();
        let mut rng = RngStream::root(seed).fork("model");
        let model = LinearModel { w: vec![rng.normal(0.0, 0.5), rng.normal(0.0, 0.5)], b: rng.normal(0.0, 0.5) };
        let (_, g) = objective_and_gradient(&model, &envs, &cfg).unwrap();
        let theta = model.params();
        for k in 0..theta.len() {
            let h = 1e-5;
            let f = |s: f64| {
                let mut t = theta.clone();
                t[k] += s;
                objective_and_gradient(&LinearModel::from_params(&t), &envs, &cfg).unwrap().0
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let scale = g[k].abs().max(fd.abs()).max(1.0);
            prop_assert!((g[k] - fd).abs() / scale <= 1e-5, "k={} analytic={} fd={}", k, g[k], fd);
        }
    }

    #[test]
    fn erm_objective_ignores_sample_order(seed in 0u64..1000, (loss, task) in loss_strategy()) {
        let env = dataset(seed, 20, 3, task);
        let mut rng = RngStream::root(seed).fork("perm");
        let perm = rng.permutation(env.len());
        let shuffled = env.subset(&perm);
        let model = LinearModel { w: vec![0.3, -0.2, 0.1], b: 0.05 };
        let cfg = ObjectiveConfig::erm(loss);
        let a = objective_and_gradient(&model, &[env], &cfg).unwrap().0;
        let b = objective_and_gradient(&model, &[shuffled], &cfg).unwrap().0;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn variance_scales_quadratically(seed in 0u64..1000, c in -5.0f64..5.0) {
        let env = dataset(seed, 30, 3, Task::Regression);
        let m = LinearModel { w: vec![0.4, -1.0, 0.7], b: 0.3 };
        let scaled = LinearModel { w: m.w.iter().map(|v| c * v).collect(), b: m.b };
        let v = variance_penalty(&m, std::slice::from_ref(&env)).unwrap();
        let vs = variance_penalty(&scaled, &[env]).unwrap();
        prop_assert!((vs - c * c * v).abs() <= 1e-10 * v.max(1.0) * c.abs().max(1.0).powi(2));
    }

    #[test]
    fn lambert_round_trip(x in 0.0f64..1e3) {
        let w = lambert_w0(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 8.0 * f64::EPSILON * x.max(1e-300) + 1e-300);
    }

    #[test]
    fn orthogonal_preserves_norm(seed in 0u64..500, dim in 1usize..9) {
        let mut rng = RngStream::root(seed);
        let q = random_orthogonal(&mut rng, dim).unwrap();
        let v: Vec<f64> = (0..dim).map(|_| rng.std_normal()).collect();
        let qv = q.matvec(&v).unwrap();
        prop_assert!((norm(&qv) - norm(&v)).abs() <= 1e-12 * norm(&v).max(1.0));
    }

    #[test]
    fn sum_entropy_dominates(
        a in prop::collection::btree_map(-6i32..6, 0.01f64..1.0, 1..6),
        b in prop::collection::btree_map(-6i32..6, 0.01f64..1.0, 1..6),
    ) {
        let mk = |m: &std::collections::BTreeMap<i32, f64>| {
            let total: f64 = m.values().sum();
            Pmf::new(m.keys().map(|&k| k as f64).collect(), m.values().map(|v| v / total).collect()).unwrap()
        };
        let (p, q) = (mk(&a), mk(&b));
        let h = pmf_entropy(&pmf_convolve(&p, &q));
        prop_assert!(h >= pmf_entropy(&p).max(pmf_entropy(&q)) - 1e-12);
    }

    #[test]
    fn float_text_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn population_std_is_shift_invariant(v in prop::collection::vec(-10.0f64..10.0, 1..20), s in -100.0f64..100.0) {
        let shifted: Vec<f64> = v.iter().map(|x| x + s).collect();
        let (m0, s0) = mean_std(&v);
        let (m1, s1) = mean_std(&shifted);
        prop_assert!((m1 - m0 - s).abs() <= 1e-9);
        prop_assert!((s1 - s0).abs() <= 1e-9);
    }

    #[test]
    fn spurious_ratio_is_rotation_consistent(seed in 0u64..500) {
        let mut rng = RngStream::root(seed);
        let (m, o) = (3, 2);
        let s = random_orthogonal(&mut rng, m + o).unwrap();
        let w: Vec<f64> = (0..m + o).map(|_| rng.std_normal()).collect();
        let fw = |scr: Matrix| FixedWeights {
            w_yz: Matrix::identity(m),
            w_zy: Matrix::zeros(o, m),
            scrambler: scr,
            w_star: vec![1.0; m],
        };
        let v = s.transpose().matvec(&w).unwrap();
        let a = spurious_ratio(&LinearModel { w, b: 0.0 }, &fw(s), m);
        let b = spurious_ratio(&LinearModel { w: v, b: 0.0 }, &fw(Matrix::identity(m + o)), m);
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
