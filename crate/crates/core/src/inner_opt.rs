//! Real-coded genetic algorithm used to maximize acquisition functions.
//!
//! Binary tournament selection, simulated binary crossover (SBX) and bounded
//! polynomial mutation, with generational replacement and an elite of one.

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub pop_size: usize,
    pub max_gen: usize,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    pub p_crossover: f64,
    /// Per-variable mutation probability; `None` means `1/k`.
    pub p_mutation: Option<f64>,
    pub tournament_size: usize,
}

impl GaConfig {
    pub fn new(pop_size: usize, max_gen: usize) -> Self {
        Self {
            pop_size,
            max_gen,
            eta_crossover: 20.0,
            eta_mutation: 20.0,
            p_crossover: 0.9,
            p_mutation: None,
            tournament_size: 2,
        }
    }

    /// Full-dimensional EI search: population `2d`, 100 generations.
    pub fn full_dimensional(d: usize) -> Self {
        Self::new((2 * d).max(2), 100)
    }

    /// One-dimensional ECI search: population 10, 20 generations.
    pub fn one_dimensional() -> Self {
        Self::new(10, 20)
    }

    /// Objective evaluations consumed by one [`ga_maximize`] call.
    pub fn evaluation_budget(&self) -> usize {
        self.pop_size * (self.max_gen + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::invalid("GA population must be at least 2"));
        }
        if self.max_gen < 1 {
            return Err(Error::invalid("GA needs at least one generation"));
        }
        if self.tournament_size < 1 {
            return Err(Error::invalid("tournament size must be at least 1"));
        }
        let probs = [Some(self.p_crossover), self.p_mutation];
        if probs.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("GA probabilities must lie in [0, 1]"));
        }
        if !(self.eta_crossover >= 0.0) || !(self.eta_mutation >= 0.0) {
            return Err(Error::invalid("distribution indices must be nonnegative"));
        }
        Ok(())
    }
}

/// SBX spread factor for a uniform draw `u ∈ [0, 1)`.
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// SBX children before clipping; `c1 + c2 = p1 + p2` componentwise.
pub fn sbx_unclipped(
    p1: &[f64],
    p2: &[f64],
    eta: f64,
    rng: &mut RngStream,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (&a, &b) in p1.iter().zip(p2) {
        let beta = sbx_beta(rng.uniform(), eta);
        c1.push(0.5 * ((1.0 + beta) * a + (1.0 - beta) * b));
        c2.push(0.5 * ((1.0 - beta) * a + (1.0 + beta) * b));
    }
    (c1, c2)
}

/// Simulated binary crossover, children clipped into `bounds`.
pub fn sbx_crossover(
    p1: &[f64],
    p2: &[f64],
    eta: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> (Vec<f64>, Vec<f64>) {
    let (mut c1, mut c2) = sbx_unclipped(p1, p2, eta, rng);
    bounds.clip(&mut c1);
    bounds.clip(&mut c2);
    (c1, c2)
}

/// Bounded polynomial perturbation of `x ∈ [lo, hi]` for the draw `u`.
/// `u = 0.5` leaves `x` unchanged.
pub fn polynomial_perturbation(x: f64, u: f64, eta: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if !(width > 0.0) {
        return x;
    }
    let e = eta + 1.0;
    let delta = if u < 0.5 {
        let d1 = (x - lo) / width;
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(e);
        v.powf(1.0 / e) - 1.0
    } else {
        let d2 = (hi - x) / width;
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(e);
        1.0 - v.powf(1.0 / e)
    };
    (x + delta * width).clamp(lo, hi)
}

/// Mutate each variable independently with probability `p_mut`.
pub fn polynomial_mutation(
    x: &[f64],
    eta: f64,
    p_mut: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if p_mut > 0.0 && rng.uniform() < p_mut {
                let u = rng.uniform();
                polynomial_perturbation(v, u, eta, bounds.lower(i), bounds.upper(i))
            } else {
                v
            }
        })
        .collect()
}

/// Best of `k` candidates drawn uniformly with replacement; lowest index on ties.
pub fn tournament_select(fitness: &[f64], k: usize, rng: &mut RngStream) -> Result<usize> {
    if fitness.is_empty() {
        return Err(Error::invalid("tournament over an empty population"));
    }
    if k == 0 {
        return Err(Error::invalid("tournament size must be at least 1"));
    }
    let mut best = rng.index(fitness.len());
    for _ in 1..k {
        let c = rng.index(fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best-so-far fitness after the initial population and each generation.
    pub history: Vec<f64>,
}

fn fitness_of(v: f64) -> f64 {
    if v.is_nan() || v == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximize `objective` over `bounds`.
///
/// Uses exactly `pop_size · (max_gen + 1)` evaluations and returns the best
/// individual ever evaluated (earliest on ties). Non-finite objective
/// values count as `-∞`.
pub fn ga_maximize<F>(
    mut objective: F,
    bounds: &Bounds,
    cfg: &GaConfig,
    rng: &mut RngStream,
) -> Result<GaResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let k = bounds.dim();
    let p_mut = cfg.p_mutation.unwrap_or(1.0 / k as f64);
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        fitness_of(objective(x))
    };

    let mut pop: Vec<Vec<f64>> = (0..cfg.pop_size)
        .map(|_| {
            (0..k)
                .map(|i| rng.uniform_in(bounds.lower(i), bounds.upper(i)))
                .collect()
        })
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|x| eval(x)).collect();

    let mut best_idx = argmax(&fit);
    let mut best_x = pop[best_idx].clone();
    let mut best_f = fit[best_idx];
    let mut history = Vec::with_capacity(cfg.max_gen + 1);
    history.push(best_f);

    for _ in 0..cfg.max_gen {
        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(cfg.pop_size + 1);
        while offspring.len() < cfg.pop_size {
            let a = tournament_select(&fit, cfg.tournament_size, rng)?;
            let b = tournament_select(&fit, cfg.tournament_size, rng)?;
            let (c1, c2) = if rng.uniform() < cfg.p_crossover {
                sbx_crossover(&pop[a], &pop[b], cfg.eta_crossover, bounds, rng)
            } else {
                (pop[a].clone(), pop[b].clone())
            };
            offspring.push(polynomial_mutation(
                &c1,
                cfg.eta_mutation,
                p_mut,
                bounds,
                rng,
            ));
            offspring.push(polynomial_mutation(
                &c2,
                cfg.eta_mutation,
                p_mut,
                bounds,
                rng,
            ));
        }
        offspring.truncate(cfg.pop_size);
        let mut off_fit: Vec<f64> = offspring.iter().map(|x| eval(x)).collect();

        let elite = best_idx;
        let off_best = argmax(&off_fit);
        if fit[elite] > off_fit[off_best] {
            let worst = argmin(&off_fit);
            offspring[worst] = pop[elite].clone();
            off_fit[worst] = fit[elite];
        }
        pop = offspring;
        fit = off_fit;
        best_idx = argmax(&fit);
        if fit[best_idx] > best_f {
            best_f = fit[best_idx];
            best_x = pop[best_idx].clone();
        }
        history.push(best_f);
    }

    Ok(GaResult {
        x: best_x,
        value: best_f,
        evaluations,
        history,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}
