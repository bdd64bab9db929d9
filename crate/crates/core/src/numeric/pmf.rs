use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite discrete distribution on strictly increasing real support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    support: Vec<f64>,
    probs: Vec<f64>,
}

pub const PMF_SUM_TOL: f64 = 1e-12;

impl Pmf {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::param("pmf needs at least one atom"));
        }
        if support.windows(2).any(|w| !(w[1] > w[0])) || support.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("pmf support must be finite and strictly increasing"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::param("pmf probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::param(format!("pmf probabilities sum to {total}")));
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            support: vec![at],
            probs: vec![1.0],
        }
    }

    pub fn uniform(support: Vec<f64>) -> Result<Self> {
        let k = support.len();
        Self::new(support, vec![1.0 / k as f64; k])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Build from unsorted atoms, merging values closer than `tol` and
    /// renormalizing away summation drift.
    pub(crate) fn from_atoms(mut atoms: Vec<(f64, f64)>, tol: f64) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match support.last() {
                Some(&last) if (v - last).abs() <= tol => *probs.last_mut().unwrap() += p,
                _ => {
                    support.push(v);
                    probs.push(p);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Self { support, probs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Pmf::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Pmf::new(vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Pmf::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![0.0, 1.0], vec![-0.5, 1.5]).is_err());
        assert!(Pmf::new(vec![], vec![]).is_err());
    }

    #[test]
    fn merges_close_atoms() {
        let p = Pmf::from_atoms(vec![(1.0, 0.25), (0.0, 0.5), (1.0 + 1e-14, 0.25)], 1e-12);
        assert_eq!(p.support(), &[0.0, 1.0]);
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }
}
