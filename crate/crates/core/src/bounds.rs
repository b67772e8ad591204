use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[a_i, b_i]` per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("bounds must have at least one dimension"));
        }
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(Error::invalid(format!(
                    "bounds[{i}] = ({a}, {b}) is not a finite interval"
                )));
            }
        }
        Ok(Self(pairs))
    }

    /// The same interval repeated `d` times.
    pub fn uniform(lo: f64, hi: f64, d: usize) -> Result<Self> {
        Self::new(vec![(lo, hi); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.0[i].0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.0[i].1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.0[i].1 - self.0[i].0
    }

    /// Single-dimension box for coordinate `i`.
    pub fn coordinate(&self, i: usize) -> Bounds {
        Bounds(vec![self.0[i]])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.0).all(|(&v, &(a, b))| v >= a && v <= b)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, &(a, b)) in x.iter_mut().zip(&self.0) {
            *v = v.clamp(a, b);
        }
    }

    /// Map a point to `[0, 1]^d`; degenerate dimensions map to 0.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &v), &(a, b)) in out.iter_mut().zip(x).zip(&self.0) {
            *o = if b > a { (v - a) / (b - a) } else { 0.0 };
        }
    }

    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.0)
            .map(|(&v, &(a, b))| a + v * (b - a))
            .collect()
    }
}
