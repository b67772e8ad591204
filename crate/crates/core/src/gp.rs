//! Gaussian process regression with an isotropic squared-exponential kernel
//! and a constant mean.
//!
//! Inputs are mapped to `[0, 1]^d` by the problem bounds and outputs are
//! standardized before fitting. The constant mean and the process variance
//! are profiled out of the likelihood in closed form, which leaves a
//! one-dimensional search over the length-scale.

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::linalg::Cholesky;

pub const LENGTH_SCALE_MIN: f64 = 0.01;
pub const LENGTH_SCALE_MAX: f64 = 100.0;
pub const DEFAULT_NUGGET: f64 = 1e-10;
pub const MAX_NUGGET: f64 = 1e-4;
/// Two samples closer than this (Euclidean, normalized space) are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-10;

const GRID_POINTS: usize = 21;
const GOLDEN_TOL: f64 = 1e-4;

/// Archive of evaluated samples in original design-space units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    bounds: Bounds,
    points: Vec<f64>,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(bounds: Bounds) -> Self {
        Self {
            bounds,
            points: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_samples(bounds: Bounds, points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let mut data = Self::new(bounds);
        for (x, &y) in points.iter().zip(values) {
            data.push(x, y)?;
        }
        Ok(data)
    }

    /// Append a sample. Rejects points outside the bounds, non-finite values
    /// and duplicates of archived points.
    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::invalid(format!(
                "point has {} coordinates, expected {d}",
                x.len()
            )));
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        if !self.bounds.contains(x) {
            return Err(Error::invalid("sample lies outside the bounds"));
        }
        if let Some(index) = self.find_duplicate(x) {
            return Err(Error::DuplicatePoint { index });
        }
        self.points.extend_from_slice(x);
        self.values.push(y);
        Ok(())
    }

    /// Index of an archived point within [`DUPLICATE_TOL`] of `x` in
    /// normalized space.
    pub fn find_duplicate(&self, x: &[f64]) -> Option<usize> {
        let u = self.bounds.normalize(x);
        let mut scratch = vec![0.0; self.dim()];
        (0..self.len()).find(|&i| {
            self.bounds.normalize_into(self.point(i), &mut scratch);
            let d2: f64 = u.iter().zip(&scratch).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() <= DUPLICATE_TOL
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the smallest value, earliest on ties.
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v < self.values[b]) {
                best = Some(i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Length-scale in normalized input units.
    pub length_scale: f64,
    /// Process variance in (standardized) output units squared.
    pub variance: f64,
}

/// `s² exp(-‖u - v‖² / 2l²)`.
pub fn se_kernel(u: &[f64], v: &[f64], params: &KernelParams) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid("kernel arguments differ in dimension"));
    }
    let KernelParams {
        length_scale,
        variance,
    } = *params;
    if !(length_scale > 0.0) || !length_scale.is_finite() || !variance.is_finite() {
        return Err(Error::invalid(
            "kernel parameters must be finite with l > 0",
        ));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::invalid("kernel arguments must be finite"));
    }
    Ok(variance * correlation(sq_dist(u, v), length_scale))
}

#[inline]
fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
fn correlation(sq_dist: f64, length_scale: f64) -> f64 {
    (-sq_dist / (2.0 * length_scale * length_scale)).exp()
}

/// Training data in the model's working coordinates: inputs in `[0, 1]^d`,
/// outputs as given (the caller standardizes).
#[derive(Debug, Clone)]
pub struct NormalizedData {
    n: usize,
    d: usize,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
    sq_dists: Vec<f64>,
}

impl NormalizedData {
    /// `inputs` is row-major `n × d`.
    pub fn new(inputs: Vec<f64>, outputs: Vec<f64>, d: usize) -> Result<Self> {
        let n = outputs.len();
        if d == 0 || inputs.len() != n * d {
            return Err(Error::invalid("inputs do not match outputs and dimension"));
        }
        let mut sq_dists = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let v = sq_dist(&inputs[i * d..(i + 1) * d], &inputs[j * d..(j + 1) * d]);
                sq_dists[i * n + j] = v;
                sq_dists[j * n + i] = v;
            }
        }
        Ok(Self {
            n,
            d,
            inputs,
            outputs,
            sq_dists,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d..(i + 1) * self.d]
    }
}

/// Profiled likelihood at one length-scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihood {
    /// Concentrated log marginal likelihood, up to an additive constant.
    /// `+∞` when the outputs are exactly explained by the mean (`variance = 0`).
    pub log_likelihood: f64,
    /// GLS estimate of the constant mean.
    pub mean: f64,
    /// Profiled process variance.
    pub variance: f64,
    /// Diagonal jitter actually used after escalation.
    pub nugget: f64,
}

struct Profile {
    likelihood: Likelihood,
    chol: Cholesky,
    weights: Vec<f64>,
}

fn factor_correlation(data: &NormalizedData, l: f64, nugget: f64) -> Result<(Cholesky, f64)> {
    let n = data.n;
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            r[i * n + j] = correlation(data.sq_dists[i * n + j], l);
        }
        r[i * n + i] = 1.0;
    }
    let mut jitter = nugget;
    loop {
        for i in 0..n {
            r[i * n + i] = 1.0 + jitter;
        }
        if let Some(chol) = Cholesky::factor(&r, n) {
            return Ok((chol, jitter));
        }
        if jitter >= MAX_NUGGET {
            return Err(Error::ModelSingular { nugget: jitter });
        }
        jitter = (jitter * 10.0).min(MAX_NUGGET);
    }
}

fn profile(data: &NormalizedData, l: f64, nugget: f64) -> Result<Profile> {
    let n = data.n;
    let (chol, nugget) = factor_correlation(data, l, nugget)?;
    let ones = chol.solve(&vec![1.0; n]);
    let ry = chol.solve(&data.outputs);
    let mean = ry.iter().sum::<f64>() / ones.iter().sum::<f64>();
    let weights: Vec<f64> = ry.iter().zip(&ones).map(|(b, a)| b - mean * a).collect();
    let quad: f64 = data
        .outputs
        .iter()
        .zip(&weights)
        .map(|(y, w)| (y - mean) * w)
        .sum();
    let variance = (quad / n as f64).max(0.0);
    let log_likelihood = if variance > 0.0 {
        -0.5 * n as f64 * variance.ln() - 0.5 * chol.log_det()
    } else {
        f64::INFINITY
    };
    Ok(Profile {
        likelihood: Likelihood {
            log_likelihood,
            mean,
            variance,
            nugget,
        },
        chol,
        weights,
    })
}

/// Concentrated log-likelihood of length-scale `l`, with the constant mean
/// and process variance replaced by their closed-form optima.
pub fn concentrated_log_likelihood(
    data: &NormalizedData,
    length_scale: f64,
    nugget: f64,
) -> Result<Likelihood> {
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    if !(LENGTH_SCALE_MIN..=LENGTH_SCALE_MAX).contains(&length_scale) {
        return Err(Error::invalid(format!(
            "length-scale {length_scale} outside [{LENGTH_SCALE_MIN}, {LENGTH_SCALE_MAX}]"
        )));
    }
    Ok(profile(data, length_scale, nugget)?.likelihood)
}

/// Posterior prediction in original output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

/// A fitted, immutable GP posterior.
#[derive(Debug, Clone)]
pub struct GpModel {
    bounds: Bounds,
    data: NormalizedData,
    shift: f64,
    scale: f64,
    params: KernelParams,
    mean: f64,
    nugget: f64,
    log_likelihood: f64,
    chol: Cholesky,
    weights: Vec<f64>,
}

impl GpModel {
    /// Fit the length-scale by maximizing the concentrated likelihood.
    ///
    /// The search evaluates a log-spaced grid over `[0.01, 100]` and refines
    /// the best `restarts` grid cells with golden-section search in
    /// `log10(l)`.
    pub fn fit(dataset: &Dataset, nugget: f64, restarts: usize) -> Result<Self> {
        let n = dataset.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        if !(nugget > 0.0) {
            return Err(Error::invalid("nugget must be positive"));
        }
        let d = dataset.dim();
        let bounds = dataset.bounds().clone();
        // Canonical row order, so the fit does not depend on insertion order.
        let mut rows: Vec<usize> = (0..n).collect();
        rows.sort_by(|&a, &b| {
            let (xa, xb) = (dataset.point(a), dataset.point(b));
            xa.iter()
                .zip(xb)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(dataset.values()[a].total_cmp(&dataset.values()[b]))
        });
        let mut inputs = vec![0.0; n * d];
        for (slot, &i) in rows.iter().enumerate() {
            bounds.normalize_into(dataset.point(i), &mut inputs[slot * d..(slot + 1) * d]);
        }
        let raw: Vec<f64> = rows.iter().map(|&i| dataset.values()[i]).collect();
        let shift = raw.iter().sum::<f64>() / n as f64;
        let var = raw.iter().map(|y| (y - shift) * (y - shift)).sum::<f64>() / n as f64;
        let constant = var <= f64::EPSILON * f64::EPSILON * shift.abs().max(1.0).powi(2);
        let scale = if constant { 1.0 } else { var.sqrt() };
        let outputs = raw
            .iter()
            .map(|y| if constant { 0.0 } else { (y - shift) / scale })
            .collect();
        let data = NormalizedData::new(inputs, outputs, d)?;

        let length_scale = if constant {
            1.0
        } else {
            search_length_scale(&data, nugget, restarts.max(1))?
        };
        let Profile {
            likelihood,
            chol,
            weights,
        } = profile(&data, length_scale, nugget)?;
        Ok(Self {
            bounds,
            data,
            shift,
            scale,
            params: KernelParams {
                length_scale,
                variance: likelihood.variance,
            },
            mean: likelihood.mean,
            nugget: likelihood.nugget,
            log_likelihood: likelihood.log_likelihood,
            chol,
            weights,
        })
    }

    /// Posterior mean and standard deviation at `x` (original units).
    /// Points outside the bounds are accepted.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let (mean, var) = self.posterior_standardized(x)?;
        Ok(Prediction {
            mean: self.shift + self.scale * mean,
            std: self.scale * var.max(0.0).sqrt(),
        })
    }

    /// Standardized posterior mean and the variance before clamping at zero.
    pub fn posterior_standardized(&self, x: &[f64]) -> Result<(f64, f64)> {
        let d = self.data.d;
        if x.len() != d {
            return Err(Error::invalid(format!(
                "query has {} coordinates, expected {d}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("query point must be finite"));
        }
        let u = self.bounds.normalize(x);
        let l = self.params.length_scale;
        let mut r: Vec<f64> = (0..self.data.n)
            .map(|i| correlation(sq_dist(&u, self.data.input(i)), l))
            .collect();
        let mean = self.mean + r.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>();
        self.chol.solve_lower_in_place(&mut r);
        let explained: f64 = r.iter().map(|v| v * v).sum();
        Ok((mean, self.params.variance * (1.0 - explained)))
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn length_scale(&self) -> f64 {
        self.params.length_scale
    }

    /// GLS constant mean, standardized units.
    pub fn mean_standardized(&self) -> f64 {
        self.mean
    }

    /// Prior mean in original output units.
    pub fn prior_mean(&self) -> f64 {
        self.shift + self.scale * self.mean
    }

    /// Prior standard deviation in original output units.
    pub fn prior_std(&self) -> f64 {
        self.scale * self.params.variance.sqrt()
    }

    pub fn output_shift(&self) -> f64 {
        self.shift
    }

    pub fn output_scale(&self) -> f64 {
        self.scale
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// `(R + nugget·I)⁻¹ (y - m·1)` in standardized units.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized training set, rows sorted lexicographically by input.
    pub fn training_data(&self) -> &NormalizedData {
        &self.data
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.data.d
    }

    pub fn len(&self) -> usize {
        self.data.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.n == 0
    }
}

fn search_length_scale(data: &NormalizedData, nugget: f64, restarts: usize) -> Result<f64> {
    let (lo, hi) = (LENGTH_SCALE_MIN.log10(), LENGTH_SCALE_MAX.log10());
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let objective = |log_l: f64| -> f64 {
        match profile(data, 10f64.powf(log_l), nugget) {
            Ok(p) => p.likelihood.log_likelihood,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let grid: Vec<(f64, f64)> = (0..GRID_POINTS)
        .map(|k| {
            let log_l = lo + step * k as f64;
            (log_l, objective(log_l))
        })
        .collect();
    let mut ranked: Vec<usize> = (0..GRID_POINTS)
        .filter(|&k| grid[k].1 > f64::NEG_INFINITY)
        .collect();
    if ranked.is_empty() {
        return Err(Error::ModelSingular { nugget: MAX_NUGGET });
    }
    ranked.sort_by(|&a, &b| grid[b].1.total_cmp(&grid[a].1).then(a.cmp(&b)));

    let mut best = grid[ranked[0]];
    for &k in ranked.iter().take(restarts) {
        let centre = grid[k].0;
        let candidate = golden_section_max(
            &objective,
            (centre - step).max(lo),
            (centre + step).min(hi),
            GOLDEN_TOL,
        );
        if candidate.1 > best.1 {
            best = candidate;
        }
    }
    Ok(10f64.powf(best.0).clamp(LENGTH_SCALE_MIN, LENGTH_SCALE_MAX))
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
