//! Exact entropy identities behind the variance bottleneck.
//!
//! Discrete quantities are in nats and computed exactly from their pmfs; the
//! continuous side is restricted to a catalogue of families with closed-form
//! differential entropy and variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Pmf, RngStream};

/// Atoms of a sum closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

pub fn pmf_entropy(p: &Pmf) -> f64 {
    -p.probs()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q * q.ln())
        .sum::<f64>()
}

/// Distribution of `X + Y` for independent `X ~ p`, `Y ~ q`.
pub fn pmf_convolve(p: &Pmf, q: &Pmf) -> Pmf {
    let mut atoms = Vec::with_capacity(p.len() * q.len());
    for (a, pa) in p.support().iter().zip(p.probs()) {
        for (b, qb) in q.support().iter().zip(q.probs()) {
            atoms.push((a + b, pa * qb));
        }
    }
    Pmf::from_atoms(atoms, MERGE_TOL)
}

/// `H(X + Y) - max(H(X), H(Y))`.
pub fn sum_entropy_gap(p: &Pmf, q: &Pmf) -> f64 {
    pmf_entropy(&pmf_convolve(p, q)) - pmf_entropy(p).max(pmf_entropy(q))
}

/// Environment-indexed mixture of pmfs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledMixture {
    components: Vec<(f64, Pmf)>,
}

impl LabeledMixture {
    pub fn new(components: Vec<(f64, Pmf)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("mixture needs at least one component"));
        }
        if components.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::param("mixture weights must be nonnegative"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, Pmf)] {
        &self.components
    }

    /// Marginal pmf, unconditional on the component label.
    pub fn marginal(&self) -> Pmf {
        let atoms = self
            .components
            .iter()
            .flat_map(|(w, p)| p.support().iter().zip(p.probs()).map(move |(v, q)| (*v, w * q)))
            .collect();
        Pmf::from_atoms(atoms, MERGE_TOL)
    }
}

/// `H(mixture) - Σ w_e H(p_e)`, i.e. `H(Φ) - H(Φ | E)`.
pub fn conditional_entropy_gap(mix: &LabeledMixture) -> f64 {
    let conditional: f64 = mix.components.iter().map(|(w, p)| w * pmf_entropy(p)).sum();
    pmf_entropy(&mix.marginal()) - conditional
}

/// `(1/2) ln(2πe·variance)`: largest differential entropy at that variance.
pub fn gaussian_entropy_bound(variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::param(format!("variance must be > 0, got {variance}")));
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * variance).ln())
}

/// Continuous families with closed-form entropy and variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnalyticFamily {
    Uniform { a: f64, b: f64 },
    Laplace { scale: f64 },
    Gaussian { variance: f64 },
    /// Triangular on `[a, b]` with mode `c`.
    Triangular { a: f64, b: f64, c: f64 },
}

impl AnalyticFamily {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticFamily::Uniform { .. } => "uniform",
            AnalyticFamily::Laplace { .. } => "laplace",
            AnalyticFamily::Gaussian { .. } => "gaussian",
            AnalyticFamily::Triangular { .. } => "triangular",
        }
    }

    pub fn differential_entropy(&self) -> f64 {
        match *self {
            AnalyticFamily::Uniform { a, b } => (b - a).ln(),
            AnalyticFamily::Laplace { scale } => 1.0 + (2.0 * scale).ln(),
            AnalyticFamily::Gaussian { variance } => {
                0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * variance).ln()
            }
            AnalyticFamily::Triangular { a, b, .. } => 0.5 + ((b - a) / 2.0).ln(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            AnalyticFamily::Uniform { a, b } => (b - a).powi(2) / 12.0,
            AnalyticFamily::Laplace { scale } => 2.0 * scale * scale,
            AnalyticFamily::Gaussian { variance } => variance,
            AnalyticFamily::Triangular { a, b, c } => (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, AnalyticFamily::Gaussian { .. })
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, AnalyticFamily::Uniform { .. } | AnalyticFamily::Triangular { .. })
    }
}

/// Families checked against the Gaussian bound.
pub fn catalogue() -> Vec<AnalyticFamily> {
    vec![
        AnalyticFamily::Uniform { a: 0.0, b: 1.0 },
        AnalyticFamily::Uniform { a: -3.0, b: 5.0 },
        AnalyticFamily::Laplace { scale: 0.5 },
        AnalyticFamily::Laplace { scale: 2.0 },
        AnalyticFamily::Gaussian { variance: 1.0 },
        AnalyticFamily::Gaussian { variance: 0.1 },
        AnalyticFamily::Triangular { a: 0.0, b: 2.0, c: 1.0 },
        AnalyticFamily::Triangular { a: -1.0, b: 3.0, c: 0.0 },
    ]
}

/// Random pmf on `k` distinct integers drawn from `[-span, span]`; every atom
/// has positive mass. Integer supports make sums collide.
pub fn random_lattice_pmf(rng: &mut RngStream, k: usize, span: i64) -> Pmf {
    let width = (2 * span + 1) as usize;
    let k = k.min(width);
    let mut pool: Vec<i64> = (-span..=span).collect();
    for i in 0..k {
        let j = i + rng.below(width - i);
        pool.swap(i, j);
    }
    let mut support: Vec<f64> = pool[..k].iter().map(|&v| v as f64).collect();
    support.sort_by(f64::total_cmp);
    // Exponential weights normalized: a uniform draw on the simplex.
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.next_f64()).ln() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    Pmf::new(support, raw.iter().map(|w| w / total).collect()).expect("valid by construction")
}

/// One line of the entropy suite summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub trials: usize,
    /// Smallest observed value of the quantity that must stay above `threshold`.
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Run the randomized and catalogue checks.
pub fn run_entropy_suite(trials: usize, rng: &RngStream) -> Vec<LemmaCheck> {
    let mut out = Vec::new();

    // Weak sum inequality, point masses included.
    let mut r = rng.fork("weak");
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let kp = 1 + r.below(8);
        let kq = 1 + r.below(8);
        let p = random_lattice_pmf(&mut r, kp, 6);
        let q = random_lattice_pmf(&mut r, kq, 6);
        worst = worst.min(sum_entropy_gap(&p, &q));
    }
    out.push(LemmaCheck {
        name: "sum entropy >= max (weak)".into(),
        trials,
        worst,
        threshold: -1e-12,
        pass: worst >= -1e-12,
    });

    // Strict version: both supports have at least two atoms.
    let mut r = rng.fork("strict");
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let kp = 2 + r.below(7);
        let kq = 2 + r.below(7);
        let p = random_lattice_pmf(&mut r, kp, 6);
        let q = random_lattice_pmf(&mut r, kq, 6);
        worst = worst.min(sum_entropy_gap(&p, &q));
    }
    out.push(LemmaCheck {
        name: "sum entropy > max (strict)".into(),
        trials,
        worst,
        threshold: 1e-9,
        pass: worst > 1e-9,
    });

    // Conditioning reduces entropy.
    let mut r = rng.fork("conditioning");
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let n_comp = 1 + r.below(5);
        let raw: Vec<f64> = (0..n_comp).map(|_| r.next_f64() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let comps = raw
            .iter()
            .map(|w| {
                let k = 1 + r.below(8);
                (w / total, random_lattice_pmf(&mut r, k, 6))
            })
            .collect::<Vec<_>>();
        let mut mix = LabeledMixture { components: comps };
        // Renormalize exactly; the constructor check is for external callers.
        let s: f64 = mix.components.iter().map(|c| c.0).sum();
        mix.components.iter_mut().for_each(|c| c.0 /= s);
        worst = worst.min(conditional_entropy_gap(&mix));
    }
    out.push(LemmaCheck {
        name: "conditioning reduces entropy".into(),
        trials,
        worst,
        threshold: -1e-12,
        pass: worst >= -1e-12,
    });

    // Gaussian bound over the analytic catalogue: slack >= 0, zero only for Gaussians.
    let fams = catalogue();
    let mut worst_nongauss = f64::INFINITY;
    let mut gauss_exact = true;
    for f in &fams {
        let slack = gaussian_entropy_bound(f.variance()).expect("positive variance") - f.differential_entropy();
        if f.is_gaussian() {
            gauss_exact &= slack.abs() <= 1e-12;
        } else {
            worst_nongauss = worst_nongauss.min(slack);
        }
    }
    out.push(LemmaCheck {
        name: "variance bound (equality iff gaussian)".into(),
        trials: fams.len(),
        worst: worst_nongauss,
        threshold: 0.0,
        pass: worst_nongauss > 0.0 && gauss_exact,
    });

    // Continuous sum: uniform + uniform = triangular, entropy strictly grows.
    let sums = [(1.0, 0.0), (0.5, 2.0), (3.0, -1.0)];
    let mut worst = f64::INFINITY;
    for (w, a) in sums {
        let u = AnalyticFamily::Uniform { a, b: a + w };
        let tri = AnalyticFamily::Triangular {
            a: 2.0 * a,
            b: 2.0 * (a + w),
            c: 2.0 * a + w,
        };
        worst = worst.min(tri.differential_entropy() - u.differential_entropy());
    }
    out.push(LemmaCheck {
        name: "uniform + uniform entropy grows".into(),
        trials: sums.len(),
        worst,
        threshold: 0.0,
        pass: worst > 0.0,
    });
    out
}
