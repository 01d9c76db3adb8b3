//! Axis-aligned chart domains and seeded sampling inside them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Closed box `[lo_1, hi_1] × … × [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Shape(format!(
                "domain bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::Invalid("domain requires lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    /// Like [`Domain::contains`] with each side widened by `rel` times its length.
    pub fn contains_with_slack(&self, x: &[f64], rel: f64) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| {
                let pad = rel * (h - l);
                *v >= *l - pad && *v <= *h + pad
            })
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Box shrunk by `fraction` of its width on every side.
    pub fn shrink(&self, fraction: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let m = fraction * (h - l);
                (l + m, h - m)
            })
            .unzip();
        Self { lo, hi }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: x.to_vec() })
        }
    }
}

/// Fraction of the box kept clear of samples so nested stencils stay inside.
pub const SAMPLE_MARGIN: f64 = 0.05;

/// Deterministic uniform samples from the interior of `domain`.
pub fn sample_points(domain: &Domain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let inner = domain.shrink(SAMPLE_MARGIN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            inner
                .lo
                .iter()
                .zip(&inner.hi)
                .map(|(l, h)| rng.random_range(*l..=*h))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_inside() {
        let d = Domain::cube(3, 1.0);
        let a = sample_points(&d, 10, 42);
        let b = sample_points(&d, 10, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| d.shrink(SAMPLE_MARGIN).contains(x)));
        assert_ne!(a, sample_points(&d, 10, 43));
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(Domain::new(vec![1.0], vec![0.0]).is_err());
        assert!(Domain::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
