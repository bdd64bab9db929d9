//! Structural-equation-model environment generators.
//!
//! All generators produce latents `(z_inv, z_spu)` and observe `x = S·z`, with
//! `S` the identity unless the scrambled variant is requested. Binary tasks
//! (the 2D cow/camel toy and the XOR constructions) keep features in `{0, 1}`;
//! [`EnvDataset::to_signed`] recodes them to `{-1, +1}` when a zero-mean coding
//! is wanted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, random_orthogonal, Matrix, RngStream};

/// Variance of every `N(., 0.1)` noise term in Examples 2 and 3.
pub const LATENT_NOISE_VAR: f64 = 0.1;
pub const NU_ANIMAL: f64 = 1e-2;
pub const NU_BACKGROUND: f64 = 1.0;
pub const THETA_INV_SCALE: f64 = 0.1;
pub const EX1_SIGMA_SQ: [f64; 3] = [0.1, 1.5, 2.0];
pub const EX2_P: [f64; 3] = [0.95, 0.97, 0.99];
pub const EX2_S: [f64; 3] = [0.3, 0.5, 0.7];
/// Range for per-environment agreement probability of the binary toys.
pub const BINARY_AGREEMENT_RANGE: (f64, f64) = (0.7, 0.95);
pub const DEFAULT_XOR_Q: f64 = 0.1;
pub const DEFAULT_XOR_A: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
    TwoD,
    Xor,
}

impl Example {
    pub fn task(self) -> Task {
        match self {
            Example::Ex1 => Task::Regression,
            _ => Task::Classification,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XorVariant {
    BottleneckOnly,
    InvarianceOnly,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub example: Example,
    /// Invariant latent dimension (Examples 1-3).
    pub m: usize,
    /// Spurious latent dimension (Examples 1-3).
    pub o: usize,
    pub n_per_env: usize,
    pub n_envs: usize,
    pub scramble: bool,
    pub xor_variant: Option<XorVariant>,
    /// Label noise `q` of the XOR constructions.
    pub xor_q: f64,
    /// Noise `a` on the second spurious bit of the combined XOR construction.
    pub xor_a: f64,
}

impl GeneratorSpec {
    pub fn new(example: Example, n_envs: usize) -> Self {
        let (m, o) = match example {
            Example::Ex1 | Example::Ex2 | Example::Ex3 => (5, 5),
            _ => (1, 1),
        };
        Self {
            example,
            m,
            o,
            n_per_env: 1000,
            n_envs,
            scramble: false,
            xor_variant: (example == Example::Xor).then_some(XorVariant::Both),
            xor_q: DEFAULT_XOR_Q,
            xor_a: DEFAULT_XOR_A,
        }
    }

    pub fn scrambled(mut self, on: bool) -> Self {
        self.scramble = on;
        self
    }

    pub fn with_n(mut self, n_per_env: usize) -> Self {
        self.n_per_env = n_per_env;
        self
    }

    pub fn with_xor(mut self, v: XorVariant) -> Self {
        self.xor_variant = Some(v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.o < 1 {
            return Err(Error::param("latent dimensions m and o must be >= 1"));
        }
        if self.n_per_env < 2 {
            return Err(Error::param("n_per_env must be >= 2"));
        }
        if self.n_envs < 1 {
            return Err(Error::param("n_envs must be >= 1"));
        }
        if self.example == Example::Xor {
            if self.xor_variant.is_none() {
                return Err(Error::param("xor example needs a variant"));
            }
            for (name, v) in [("q", self.xor_q), ("a", self.xor_a)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::param(format!("xor {name} must lie in [0,1], got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Effective `(invariant, spurious)` latent widths.
    pub fn latent_dims(&self) -> (usize, usize) {
        match self.example {
            Example::Ex1 | Example::Ex2 | Example::Ex3 => (self.m, self.o),
            Example::TwoD => (1, 1),
            Example::Xor => match self.xor_variant.unwrap_or(XorVariant::Both) {
                XorVariant::Both => (1, 2),
                XorVariant::InvarianceOnly => (2, 1),
                XorVariant::BottleneckOnly => (3, 1),
            },
        }
    }

    pub fn feature_dim(&self) -> usize {
        let (m, o) = self.latent_dims();
        m + o
    }
}

/// Per-environment parameters; only the fields of the chosen example are set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    pub env_id: usize,
    pub sigma_sq: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub theta_spu: Option<Vec<f64>>,
    pub u: Option<f64>,
}

impl EnvParams {
    fn require(v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::param(format!("environment parameter {name} is not set")))
    }
}

/// Weights shared by all environments of one benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedWeights {
    pub w_yz: Matrix,
    pub w_zy: Matrix,
    pub scrambler: Matrix,
    pub w_star: Vec<f64>,
}

impl FixedWeights {
    /// Draw once per data seed.
    pub fn draw(spec: &GeneratorSpec, rng: &mut RngStream) -> Result<Self> {
        spec.validate()?;
        let (m, o) = spec.latent_dims();
        let w_yz = Matrix::standard_normal(m, m, rng);
        let w_zy = Matrix::standard_normal(o, m, rng);
        let scrambler = if spec.scramble && matches!(spec.example, Example::Ex1 | Example::Ex2 | Example::Ex3) {
            random_orthogonal(rng, m + o)?
        } else {
            Matrix::identity(m + o)
        };
        let w_star = vec![1.0 / (m as f64).sqrt(); m];
        Ok(Self {
            w_yz,
            w_zy,
            scrambler,
            w_star,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvDataset {
    pub env_id: usize,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub z_inv: Option<Matrix>,
    pub z_spu: Option<Matrix>,
    pub task: Task,
}

impl EnvDataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Rows picked by `idx`; latents follow.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            env_id: self.env_id,
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            z_inv: self.z_inv.as_ref().map(|z| z.select_rows(idx)),
            z_spu: self.z_spu.as_ref().map(|z| z.select_rows(idx)),
            task: self.task,
        }
    }

    /// Recode binary features and latents from `{0, 1}` to `{-1, +1}`.
    pub fn to_signed(&self) -> Self {
        let recode = |m: &Matrix| {
            let data = m.as_slice().iter().map(|v| 2.0 * v - 1.0).collect();
            Matrix::from_vec(m.rows(), m.cols(), data).expect("shape preserved")
        };
        Self {
            env_id: self.env_id,
            x: recode(&self.x),
            y: self.y.clone(),
            z_inv: self.z_inv.as_ref().map(recode),
            z_spu: self.z_spu.as_ref().map(recode),
            task: self.task,
        }
    }
}

fn check_unit(v: f64, name: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::param(format!("{name} must lie in [0,1], got {v}")))
    }
}

fn indicator(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Observe `x = S·(z_inv, z_spu)` row by row.
pub fn apply_scrambler(z_inv: &Matrix, z_spu: &Matrix, s: &Matrix) -> Result<Matrix> {
    let z = z_inv.hstack(z_spu)?;
    if s.cols() != z.cols() {
        return Err(Error::DimensionMismatch {
            expected: s.cols(),
            got: z.cols(),
        });
    }
    z.matmul(&s.transpose())
}

/// Schedule of per-environment parameters for `spec.example`.
pub fn env_params(spec: &GeneratorSpec, rng: &mut RngStream) -> Result<Vec<EnvParams>> {
    if spec.n_envs < 1 {
        return Err(Error::param("n_envs must be >= 1"));
    }
    let mut out = Vec::with_capacity(spec.n_envs);
    for e in 0..spec.n_envs {
        let mut p = EnvParams {
            env_id: e,
            ..Default::default()
        };
        match spec.example {
            Example::Ex1 => {
                p.sigma_sq = Some(if e < 3 {
                    EX1_SIGMA_SQ[e]
                } else {
                    rng.uniform(1e-2, 10.0)
                });
            }
            Example::Ex2 => {
                if e < 3 {
                    p.p = Some(EX2_P[e]);
                    p.s = Some(EX2_S[e]);
                } else {
                    p.p = Some(rng.uniform(0.9, 1.0));
                    p.s = Some(rng.uniform(0.3, 0.7));
                }
            }
            Example::Ex3 => {
                p.theta_spu = Some((0..spec.o).map(|_| rng.std_normal()).collect());
            }
            Example::TwoD => {
                let (lo, hi) = BINARY_AGREEMENT_RANGE;
                p.p = Some(rng.uniform(lo, hi));
            }
            Example::Xor => {
                let (lo, hi) = BINARY_AGREEMENT_RANGE;
                p.u = Some(1.0 - rng.uniform(lo, hi));
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Example 1: linear regression SEM with anti-causal spurious features.
pub fn gen_example1(
    spec: &GeneratorSpec,
    params: &EnvParams,
    fw: &FixedWeights,
    rng: &mut RngStream,
) -> Result<EnvDataset> {
    if spec.example != Example::Ex1 {
        return Err(Error::Incompatible("gen_example1 needs example Ex1".into()));
    }
    spec.validate()?;
    let sigma_sq = EnvParams::require(params.sigma_sq, "sigma_sq")?;
    if !(sigma_sq >= 0.0) {
        return Err(Error::param("sigma_sq must be >= 0"));
    }
    let sigma = sigma_sq.sqrt();
    let (m, o, n) = (spec.m, spec.o, spec.n_per_env);
    let mut z_inv = Matrix::zeros(n, m);
    let mut z_spu = Matrix::zeros(n, o);
    let mut y = Vec::with_capacity(n);
    let scale = 2.0 / (m + o) as f64;
    let mut y_tilde = vec![0.0; m];
    for i in 0..n {
        for v in z_inv.row_mut(i) {
            *v = rng.normal(0.0, sigma);
        }
        let mean_y = fw.w_yz.matvec(z_inv.row(i))?;
        for (t, mu) in y_tilde.iter_mut().zip(&mean_y) {
            *t = rng.normal(*mu, sigma);
        }
        let mean_s = fw.w_zy.matvec(&y_tilde)?;
        for (v, mu) in z_spu.row_mut(i).iter_mut().zip(&mean_s) {
            *v = rng.normal(*mu, 1.0);
        }
        y.push(scale * y_tilde.iter().sum::<f64>());
    }
    let x = apply_scrambler(&z_inv, &z_spu, &fw.scrambler)?;
    Ok(EnvDataset {
        env_id: params.env_id,
        x,
        y,
        z_inv: Some(z_inv),
        z_spu: Some(z_spu),
        task: Task::Regression,
    })
}

/// Example 2: cow/camel on grass/sand with a confounding selection variable.
pub fn gen_example2(
    spec: &GeneratorSpec,
    params: &EnvParams,
    fw: &FixedWeights,
    rng: &mut RngStream,
) -> Result<EnvDataset> {
    if spec.example != Example::Ex2 {
        return Err(Error::Incompatible("gen_example2 needs example Ex2".into()));
    }
    spec.validate()?;
    let p = check_unit(EnvParams::require(params.p, "p")?, "p")?;
    let s = check_unit(EnvParams::require(params.s, "s")?, "s")?;
    // U = 0: cow/grass, 1: cow/sand, 2: camel/sand, 3: camel/grass
    let weights = [p * s, (1.0 - p) * s, p * (1.0 - s), (1.0 - p) * (1.0 - s)];
    let noise_std = LATENT_NOISE_VAR.sqrt();
    let (m, o, n) = (spec.m, spec.o, spec.n_per_env);
    let mut z_inv = Matrix::zeros(n, m);
    let mut z_spu = Matrix::zeros(n, o);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let u = rng.categorical(&weights);
        let animal = if u <= 1 { 1.0 } else { -1.0 };
        let background = if u == 0 || u == 3 { 1.0 } else { -1.0 };
        for v in z_inv.row_mut(i) {
            *v = (rng.normal(0.0, noise_std) + animal) * NU_ANIMAL;
        }
        for v in z_spu.row_mut(i) {
            *v = (rng.normal(0.0, noise_std) + background) * NU_BACKGROUND;
        }
        y.push(indicator(z_inv.row(i).iter().sum()));
    }
    let x = apply_scrambler(&z_inv, &z_spu, &fw.scrambler)?;
    Ok(EnvDataset {
        env_id: params.env_id,
        x,
        y,
        z_inv: Some(z_inv),
        z_spu: Some(z_spu),
        task: Task::Classification,
    })
}

/// Example 3: linear spiral analogue with anti-causal invariant features.
pub fn gen_example3(
    spec: &GeneratorSpec,
    params: &EnvParams,
    fw: &FixedWeights,
    rng: &mut RngStream,
) -> Result<EnvDataset> {
    if spec.example != Example::Ex3 {
        return Err(Error::Incompatible("gen_example3 needs example Ex3".into()));
    }
    spec.validate()?;
    let theta_spu = params
        .theta_spu
        .as_ref()
        .ok_or_else(|| Error::param("environment parameter theta_spu is not set"))?;
    if theta_spu.len() != spec.o {
        return Err(Error::DimensionMismatch {
            expected: spec.o,
            got: theta_spu.len(),
        });
    }
    let noise_std = LATENT_NOISE_VAR.sqrt();
    let (m, o, n) = (spec.m, spec.o, spec.n_per_env);
    let mut z_inv = Matrix::zeros(n, m);
    let mut z_spu = Matrix::zeros(n, o);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = rng.bernoulli(0.5);
        let sign = if label { -1.0 } else { 1.0 };
        for v in z_inv.row_mut(i) {
            *v = rng.normal(sign * THETA_INV_SCALE, noise_std);
        }
        for (v, th) in z_spu.row_mut(i).iter_mut().zip(theta_spu) {
            *v = rng.normal(sign * th, noise_std);
        }
        y.push(label as u8 as f64);
    }
    let x = apply_scrambler(&z_inv, &z_spu, &fw.scrambler)?;
    Ok(EnvDataset {
        env_id: params.env_id,
        x,
        y,
        z_inv: Some(z_inv),
        z_spu: Some(z_spu),
        task: Task::Classification,
    })
}

fn binary_env(env_id: usize, inv: Vec<Vec<f64>>, spu: Vec<Vec<f64>>, y: Vec<f64>) -> Result<EnvDataset> {
    let z_inv = Matrix::from_rows(&inv)?;
    let z_spu = Matrix::from_rows(&spu)?;
    let x = z_inv.hstack(&z_spu)?;
    Ok(EnvDataset {
        env_id,
        x,
        y,
        z_inv: Some(z_inv),
        z_spu: Some(z_spu),
        task: Task::Classification,
    })
}

fn gen_2d_unchecked(env_id: usize, p: f64, n: usize, rng: &mut RngStream) -> Result<EnvDataset> {
    let mut inv = Vec::with_capacity(n);
    let mut spu = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x_inv = rng.bernoulli(0.5);
        let w = rng.bernoulli(1.0 - p);
        let x_spu = x_inv ^ w;
        inv.push(vec![x_inv as u8 as f64]);
        spu.push(vec![x_spu as u8 as f64]);
        y.push(indicator(x_inv as u8 as f64 - 0.5));
    }
    binary_env(env_id, inv, spu, y)
}

/// The 2D cow/camel toy: `y = x_inv`, `x_spu = x_inv xor Bernoulli(1 - p)`.
pub fn gen_2d(params: &EnvParams, n: usize, rng: &mut RngStream) -> Result<EnvDataset> {
    let p = check_unit(EnvParams::require(params.p, "p")?, "p")?;
    if p <= 0.5 {
        return Err(Error::param(format!("selection bias p must exceed 1/2, got {p}")));
    }
    gen_2d_unchecked(params.env_id, p, n, rng)
}

/// Binary XOR constructions separating the roles of invariance and the bottleneck.
pub fn gen_binary_xor(spec: &GeneratorSpec, params: &EnvParams, rng: &mut RngStream) -> Result<EnvDataset> {
    spec.validate()?;
    let variant = spec
        .xor_variant
        .ok_or_else(|| Error::param("xor_variant must be set"))?;
    let u = check_unit(EnvParams::require(params.u, "u")?, "u")?;
    let (q, a) = (check_unit(spec.xor_q, "q")?, check_unit(spec.xor_a, "a")?);
    let n = spec.n_per_env;
    let bit = |b: bool| b as u8 as f64;
    let mut inv = Vec::with_capacity(n);
    let mut spu = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        match variant {
            XorVariant::Both => {
                let x_inv = rng.bernoulli(0.5);
                let label = x_inv ^ rng.bernoulli(q);
                let s1 = label ^ rng.bernoulli(u);
                let s2 = x_inv ^ rng.bernoulli(a);
                inv.push(vec![bit(x_inv)]);
                spu.push(vec![bit(s1), bit(s2)]);
                y.push(bit(label));
            }
            XorVariant::InvarianceOnly => {
                let x1 = rng.bernoulli(0.5);
                let x2 = rng.bernoulli(0.5);
                let label = x1 ^ x2 ^ rng.bernoulli(q);
                let s = label ^ rng.bernoulli(u);
                inv.push(vec![bit(x1), bit(x2)]);
                spu.push(vec![bit(s)]);
                y.push(bit(label));
            }
            XorVariant::BottleneckOnly => {
                let x_inv = rng.bernoulli(0.5);
                let s = x_inv ^ rng.bernoulli(u);
                // Invariant pair whose XOR recovers x_inv; each bit alone is a fair coin.
                let h = rng.bernoulli(0.5);
                inv.push(vec![bit(x_inv), bit(x_inv ^ h), bit(h)]);
                spu.push(vec![bit(s)]);
                y.push(bit(x_inv));
            }
        }
    }
    binary_env(params.env_id, inv, spu, y)
}

/// Dispatch to the generator for `spec.example`.
pub fn generate_env(
    spec: &GeneratorSpec,
    params: &EnvParams,
    fw: &FixedWeights,
    rng: &mut RngStream,
) -> Result<EnvDataset> {
    match spec.example {
        Example::Ex1 => gen_example1(spec, params, fw, rng),
        Example::Ex2 => gen_example2(spec, params, fw, rng),
        Example::Ex3 => gen_example3(spec, params, fw, rng),
        Example::TwoD => gen_2d(params, spec.n_per_env, rng),
        Example::Xor => gen_binary_xor(spec, params, rng),
    }
}

/// Training environments for one data seed: params, shared weights and data.
pub fn generate_benchmark(
    spec: &GeneratorSpec,
    rng: &RngStream,
) -> Result<(Vec<EnvParams>, FixedWeights, Vec<EnvDataset>)> {
    let params = env_params(spec, &mut rng.fork("params"))?;
    let fw = FixedWeights::draw(spec, &mut rng.fork("weights"))?;
    let envs = params
        .iter()
        .map(|p| generate_env(spec, p, &fw, &mut rng.fork_indexed("env", p.env_id)))
        .collect::<Result<Vec<_>>>()?;
    Ok((params, fw, envs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shift {
    ScrambleSpurious,
    InvertSpurious,
    ScaleSpurious(f64),
}

fn permute_spurious(env: &EnvDataset, scrambler: &Matrix, rng: &mut RngStream) -> Result<EnvDataset> {
    let (z_inv, z_spu) = match (&env.z_inv, &env.z_spu) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::State("spurious permutation needs recorded latents".into())),
    };
    let perm = rng.permutation(env.len());
    let z_spu = z_spu.select_rows(&perm);
    let x = apply_scrambler(z_inv, &z_spu, scrambler)?;
    Ok(EnvDataset {
        env_id: env.env_id,
        x,
        y: env.y.clone(),
        z_inv: Some(z_inv.clone()),
        z_spu: Some(z_spu),
        task: env.task,
    })
}

/// Shifted test environment: generate from `params`, then alter the spurious
/// latents before observation.
pub fn make_test_env(
    spec: &GeneratorSpec,
    params: &EnvParams,
    fw: &FixedWeights,
    shift: Shift,
    rng: &mut RngStream,
) -> Result<EnvDataset> {
    match shift {
        Shift::ScrambleSpurious => {
            let base = generate_env(spec, params, fw, &mut rng.fork("base"))?;
            permute_spurious(&base, &fw.scrambler, &mut rng.fork("permute"))
        }
        Shift::InvertSpurious => {
            let mut flipped = params.clone();
            let mut base_rng = rng.fork("base");
            match spec.example {
                Example::Ex2 => {
                    flipped.p = Some(1.0 - EnvParams::require(params.p, "p")?);
                    gen_example2(spec, &flipped, fw, &mut base_rng)
                }
                Example::Ex3 => {
                    let th = params
                        .theta_spu
                        .as_ref()
                        .ok_or_else(|| Error::param("theta_spu is not set"))?;
                    flipped.theta_spu = Some(th.iter().map(|v| -v).collect());
                    gen_example3(spec, &flipped, fw, &mut base_rng)
                }
                Example::TwoD => {
                    let p = check_unit(EnvParams::require(params.p, "p")?, "p")?;
                    gen_2d_unchecked(params.env_id, 1.0 - p, spec.n_per_env, &mut base_rng)
                }
                Example::Xor => {
                    flipped.u = Some(1.0 - EnvParams::require(params.u, "u")?);
                    gen_binary_xor(spec, &flipped, &mut base_rng)
                }
                Example::Ex1 => Err(Error::param(
                    "invert_spurious is undefined for the regression example",
                )),
            }
        }
        Shift::ScaleSpurious(k) => {
            if !k.is_finite() {
                return Err(Error::param("scale factor must be finite"));
            }
            let base = generate_env(spec, params, fw, &mut rng.fork("base"))?;
            let z_inv = base.z_inv.clone().expect("generators record latents");
            let mut z_spu = base.z_spu.clone().expect("generators record latents");
            z_spu.scale(k);
            let x = apply_scrambler(&z_inv, &z_spu, &fw.scrambler)?;
            Ok(EnvDataset {
                x,
                z_spu: Some(z_spu),
                ..base
            })
        }
    }
}

/// Training-time oracle: permute spurious latents across samples and re-observe.
pub fn oracle_permute(env: &EnvDataset, scrambler: &Matrix, rng: &mut RngStream) -> Result<EnvDataset> {
    permute_spurious(env, scrambler, rng)
}

/// Minimum over rows of `sgn(w·z)(w·z)`, i.e. the smallest distance of the
/// invariant support to the labelling hyperplane.
pub fn inv_margin(latents: &Matrix, w_star: &[f64]) -> Result<f64> {
    if latents.rows() == 0 {
        return Err(Error::param("inv_margin needs at least one row"));
    }
    if latents.cols() != w_star.len() {
        return Err(Error::DimensionMismatch {
            expected: w_star.len(),
            got: latents.cols(),
        });
    }
    Ok(latents
        .row_iter()
        .map(|z| {
            let proj = dot(w_star, z);
            let sgn = if proj > 0.0 {
                1.0
            } else if proj < 0.0 {
                -1.0
            } else {
                0.0
            };
            sgn * proj
        })
        .fold(f64::INFINITY, f64::min))
}
