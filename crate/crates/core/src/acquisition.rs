//! Expected improvement and its restriction to a single coordinate.

use crate::error::{Error, Result};
use crate::gp::{Dataset, GpModel};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF via `erfc`, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Best evaluated sample so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub f: f64,
}

impl Incumbent {
    /// Argmin of the dataset, earliest sample on ties.
    pub fn from_dataset(data: &Dataset) -> Option<Self> {
        data.argmin().map(|i| Self {
            x: data.point(i).to_vec(),
            f: data.values()[i],
        })
    }
}

/// Closed-form `E[max(f_best - Y, 0)]` for `Y ~ N(mu, sigma²)`.
pub fn expected_improvement(mu: f64, sigma: f64, f_best: f64) -> f64 {
    let gap = f_best - mu;
    if !(sigma > 0.0) {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    let ei = gap * normal_cdf(z) + sigma * normal_pdf(z);
    if ei.is_finite() {
        ei.max(0.0)
    } else {
        gap.max(0.0)
    }
}

/// EI at `x` under `model`.
pub fn ei_at(model: &GpModel, x: &[f64], f_best: f64) -> Result<f64> {
    let p = model.predict(x)?;
    Ok(expected_improvement(p.mean, p.std, f_best))
}

/// The incumbent with coordinate `coord` (0-based) replaced by `t`.
pub fn coordinate_slice_point(inc: &Incumbent, coord: usize, t: f64) -> Vec<f64> {
    let mut z = inc.x.clone();
    z[coord] = t;
    z
}

/// Expected coordinate improvement: EI along the axis-aligned line through
/// the incumbent, parameterized by the value `t` of coordinate `coord`
/// (0-based).
pub fn eci(model: &GpModel, inc: &Incumbent, coord: usize, t: f64) -> Result<f64> {
    if coord >= inc.x.len() {
        return Err(Error::invalid(format!(
            "coordinate {coord} out of range for dimension {}",
            inc.x.len()
        )));
    }
    ei_at(model, &coordinate_slice_point(inc, coord, t), inc.f)
}
