//! Splittable deterministic random streams.
//!
//! Every stream is keyed by a root seed and the ordered list of fork labels
//! that led to it. The key is hashed into a ChaCha20 seed, so a child stream
//! depends only on its lineage and never on how many draws its parent made.
//! Sweep cells forked as `seed/3` and `query/7` therefore see the same numbers
//! regardless of the order in which cells are scheduled.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A single-owner deterministic random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    root_seed: u64,
    lineage: Vec<String>,
    key: [u8; 32],
    core: ChaCha20Rng,
    spare_normal: Option<f64>,
}

/// Distributions accepted by [`RngStream::draw`].
#[derive(Clone, Debug, PartialEq)]
pub enum Dist {
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64 },
    Categorical { probs: Vec<f64> },
}

/// One draw: reals for continuous families, integers for discrete ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    Real(f64),
    Int(usize),
}

impl Sample {
    pub fn as_f64(self) -> f64 {
        match self {
            Sample::Real(v) => v,
            Sample::Int(k) => k as f64,
        }
    }
}

fn derive_key(parent: &[u8; 32], label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(parent);
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.finalize().into()
}

impl RngStream {
    /// Root stream for `seed`.
    pub fn root(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"ibirm-root");
        h.update(seed.to_le_bytes());
        let key: [u8; 32] = h.finalize().into();
        Self::from_key(seed, Vec::new(), key)
    }

    fn from_key(root_seed: u64, lineage: Vec<String>, key: [u8; 32]) -> Self {
        Self {
            root_seed,
            lineage,
            key,
            core: ChaCha20Rng::from_seed(key),
            spare_normal: None,
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn lineage(&self) -> &[String] {
        &self.lineage
    }

    /// Child stream keyed by `label`. Does not touch `self`'s position.
    pub fn fork(&self, label: &str) -> Self {
        assert!(!label.is_empty(), "fork label must be nonempty");
        let mut lineage = self.lineage.clone();
        lineage.push(label.to_string());
        Self::from_key(self.root_seed, lineage, derive_key(&self.key, label))
    }

    /// Shorthand for `fork(&format!("{prefix}/{index}"))`.
    pub fn fork_indexed(&self, prefix: &str, index: usize) -> Self {
        self.fork(&format!("{prefix}/{index}"))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    pub fn std_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        if std == 0.0 {
            return mean;
        }
        mean + std * self.std_normal()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        // p = 1 must always succeed, p = 0 never.
        self.next_f64() < p
    }

    /// Uniform index in `0..n` by rejection, `n >= 1`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.next_f64();
        let mut acc = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // Rounding left u above the cumulative sum; take the last atom with mass.
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            idx.swap(i, j);
        }
        idx
    }

    /// Checked draw from `dist`.
    pub fn draw(&mut self, dist: &Dist) -> Result<Sample> {
        match dist {
            Dist::Gaussian { mean, std } => {
                if !(*std >= 0.0) || !mean.is_finite() || !std.is_finite() {
                    return Err(Error::param(format!("gaussian std must be >= 0, got {std}")));
                }
                Ok(Sample::Real(self.normal(*mean, *std)))
            }
            Dist::Uniform { lo, hi } => {
                if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::param(format!("uniform requires a <= b, got ({lo}, {hi})")));
                }
                Ok(Sample::Real(self.uniform(*lo, *hi)))
            }
            Dist::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::param(format!("bernoulli p must lie in [0,1], got {p}")));
                }
                Ok(Sample::Int(self.bernoulli(*p) as usize))
            }
            Dist::Categorical { probs } => {
                let total: f64 = probs.iter().sum();
                if probs.is_empty()
                    || probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite())
                    || (total - 1.0).abs() > 1e-12
                {
                    return Err(Error::param("categorical probabilities must be a valid pmf"));
                }
                Ok(Sample::Int(self.categorical(probs)))
            }
        }
    }
}
