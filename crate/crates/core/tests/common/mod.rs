//! Independent oracles shared by the integration and acceptance tests.
//!
//! None of these reuse the library's numerical routes: the GP oracle inverts
//! the covariance by Gauss-Jordan elimination in double-double arithmetic
//! (the correlation entries themselves are rounded to f64, as in the model),
//! EI is integrated numerically,
//! and the Wilcoxon oracle enumerates every sign pattern.

#![allow(dead_code)]

use ecibo::engine::InfillInfo;
use ecibo::{
    latin_hypercube, Algorithm, BoConfig, Dataset, GpModel, Problem, RngStream, RunRecord,
};

type Dd = twofloat::TwoFloat;

fn dd(v: f64) -> Dd {
    Dd::from(v)
}

/// Gauss-Jordan inverse with partial pivoting in double-double arithmetic;
/// also returns `ln |det A|`.
#[allow(clippy::needless_range_loop)]
pub fn invert(a: &[Vec<f64>]) -> (Vec<Vec<Dd>>, f64) {
    let n = a.len();
    let mut m: Vec<Vec<Dd>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Dd> = row.iter().map(|&v| dd(v)).collect();
            r.extend((0..n).map(|j| dd(if i == j { 1.0 } else { 0.0 })));
            r
        })
        .collect();
    let mut log_det = 0.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| f64::from(m[x][col].abs()).total_cmp(&f64::from(m[y][col].abs())))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        log_det += f64::from(p.abs()).ln();
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = m[r][col];
                if f64::from(factor) != 0.0 {
                    for c in 0..2 * n {
                        let t = factor * m[col][c];
                        m[r][c] -= t;
                    }
                }
            }
        }
    }
    (m.into_iter().map(|r| r[n..].to_vec()).collect(), log_det)
}

fn matvec(a: &[Vec<Dd>], x: &[Dd]) -> Vec<Dd> {
    a.iter().map(|row| dot(row, x)).collect()
}

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(dd(0.0), |acc, (p, q)| acc + *p * *q)
}

/// Dense GP posterior built from the raw dataset with a given length-scale
/// and nugget.
pub struct DenseGp {
    bounds: Vec<(f64, f64)>,
    inputs: Vec<Vec<f64>>,
    l: f64,
    shift: f64,
    scale: f64,
    pub mean: f64,
    pub variance: f64,
    pub log_likelihood: f64,
    inv: Vec<Vec<Dd>>,
    weights: Vec<Dd>,
}

impl DenseGp {
    pub fn new(data: &Dataset, l: f64, nugget: f64) -> Self {
        let bounds = data.bounds().pairs().to_vec();
        let norm = |x: &[f64]| -> Vec<f64> {
            x.iter()
                .zip(&bounds)
                .map(|(v, (a, b))| if b > a { (v - a) / (b - a) } else { 0.0 })
                .collect()
        };
        let inputs: Vec<Vec<f64>> = data.points().map(norm).collect();
        let n = inputs.len();
        let raw = data.values();
        let shift = raw.iter().sum::<f64>() / n as f64;
        let sd = (raw.iter().map(|y| (y - shift).powi(2)).sum::<f64>() / n as f64).sqrt();
        let scale = if sd > 0.0 { sd } else { 1.0 };
        let y: Vec<f64> = raw.iter().map(|v| (v - shift) / scale).collect();
        let r: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d2: f64 = inputs[i]
                            .iter()
                            .zip(&inputs[j])
                            .map(|(p, q)| (p - q).powi(2))
                            .sum();
                        (-d2 / (2.0 * l * l)).exp() + if i == j { nugget } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let (inv, log_det) = invert(&r);
        let ones = vec![dd(1.0); n];
        let y: Vec<Dd> = y.into_iter().map(dd).collect();
        let inv_one = matvec(&inv, &ones);
        let inv_y = matvec(&inv, &y);
        let mean = dot(&ones, &inv_y) / dot(&ones, &inv_one);
        let resid: Vec<Dd> = y.iter().map(|v| *v - mean).collect();
        let weights = matvec(&inv, &resid);
        let variance = f64::from(dot(&resid, &weights) / dd(n as f64));
        let mean = f64::from(mean);
        let log_likelihood = -0.5 * n as f64 * variance.ln() - 0.5 * log_det;
        Self {
            bounds,
            inputs,
            l,
            shift,
            scale,
            mean,
            variance,
            log_likelihood,
            inv,
            weights,
        }
    }

    pub fn from_model(data: &Dataset, model: &GpModel) -> Self {
        Self::new(data, model.length_scale(), model.nugget())
    }

    /// `(mean, variance)` in original output units, variance unclamped.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let u: Vec<f64> = x
            .iter()
            .zip(&self.bounds)
            .map(|(v, (a, b))| if b > a { (v - a) / (b - a) } else { 0.0 })
            .collect();
        let r: Vec<Dd> = self
            .inputs
            .iter()
            .map(|xi| {
                let d2: f64 = xi.iter().zip(&u).map(|(p, q)| (p - q).powi(2)).sum();
                dd((-d2 / (2.0 * self.l * self.l)).exp())
            })
            .collect();
        let mu = self.mean + f64::from(dot(&r, &self.weights));
        let var = self.variance * f64::from(dd(1.0) - dot(&r, &matvec(&self.inv, &r)));
        (self.shift + self.scale * mu, self.scale * self.scale * var)
    }

    pub fn output_scale(&self) -> f64 {
        self.scale
    }
}

fn random_box(rng: &mut RngStream, d: usize) -> Vec<(f64, f64)> {
    (0..d)
        .map(|_| {
            let a = rng.uniform_in(-5.0, 5.0);
            (a, a + rng.uniform_in(0.5, 10.0))
        })
        .collect()
}

/// Random smooth function: an offset plus one random sinusoid per dimension.
fn random_function(rng: &mut RngStream, bounds: &[(f64, f64)]) -> impl Fn(&[f64]) -> f64 {
    let coef: Vec<(f64, f64, f64)> = bounds
        .iter()
        .map(|_| {
            (
                rng.uniform_in(-3.0, 3.0),
                rng.uniform_in(0.5, 6.0),
                rng.uniform_in(0.0, 6.3),
            )
        })
        .collect();
    let offset = rng.uniform_in(-50.0, 50.0);
    let bounds = bounds.to_vec();
    move |x: &[f64]| {
        offset
            + x.iter()
                .zip(&bounds)
                .zip(&coef)
                .map(|((v, (a, b)), (c, w, p))| c * (w * (v - a) / (b - a) + p).sin())
                .sum::<f64>()
    }
}

/// `n` Latin hypercube samples of a random smooth function on a random box.
pub fn lhs_dataset(rng: &mut RngStream, n: usize, d: usize) -> Dataset {
    let bounds = random_box(rng, d);
    let b = ecibo::Bounds::new(bounds.clone()).unwrap();
    let points = latin_hypercube(n, &b, rng).unwrap().points;
    let f = random_function(rng, &bounds);
    let ys: Vec<f64> = points.iter().map(|x| f(x)).collect();
    Dataset::from_samples(b, &points, &ys).unwrap()
}

/// Like [`lhs_dataset`] but with independent uniform points, which may
/// cluster.
pub fn random_dataset(rng: &mut RngStream, n: usize, d: usize) -> Dataset {
    let bounds = random_box(rng, d);
    let f = random_function(rng, &bounds);
    let mut data = Dataset::new(ecibo::Bounds::new(bounds.clone()).unwrap());
    while data.len() < n {
        let x: Vec<f64> = bounds.iter().map(|&(a, b)| rng.uniform_in(a, b)).collect();
        let _ = data.push(&x, f(&x));
    }
    data
}

/// `E[max(f_best - Y, 0)]`, `Y ~ N(mu, sigma²)`, by composite Simpson
/// integration in standardized units, using only the normal density.
pub fn ei_quadrature(mu: f64, sigma: f64, f_best: f64) -> f64 {
    if sigma == 0.0 {
        return (f_best - mu).max(0.0);
    }
    let z = (f_best - mu) / sigma;
    let lo = -14.0;
    let hi = z.min(14.0);
    if hi <= lo {
        return 0.0;
    }
    let pdf = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let g = |s: f64| (z - s) * pdf(s);
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let mut acc = g(lo) + g(hi);
    for k in 1..n {
        let s = lo + h * k as f64;
        acc += if k % 2 == 1 { 4.0 * g(s) } else { 2.0 * g(s) };
    }
    sigma * acc * h / 3.0
}

/// Two-sided p of the signed-rank test by enumerating all `2^m` sign
/// patterns of the nonzero differences. Returns `(W, p)`.
pub fn wilcoxon_bruteforce(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    let m = d.len();
    if m == 0 {
        return (0.0, 1.0);
    }
    // mid-ranks by counting: rank = #{smaller} + (#{equal} + 1) / 2
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|v| {
            let less = abs.iter().filter(|u| *u < v).count() as f64;
            let equal = abs.iter().filter(|u| *u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u64..(1 << m) {
        let wp: f64 = (0..m)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| ranks[k])
            .sum();
        if wp.min(total - wp) <= w + 1e-9 {
            hits += 1;
        }
    }
    (w, hits as f64 / (1u64 << m) as f64)
}

/// Best-so-far index before `eval` (1-based), earliest on ties.
fn incumbent_before(record: &RunRecord, eval: usize) -> &[f64] {
    let mut best = &record.entries[0];
    for e in &record.entries[..eval - 1] {
        if e.f < best.f {
            best = e;
        }
    }
    &best.x
}

/// Check every driver invariant a finished run must satisfy. Returns a
/// description of the first violation.
pub fn check_run(record: &RunRecord, problem: &Problem, cfg: &BoConfig) -> Result<(), String> {
    if !record.is_completed() {
        return Err(format!("run failed: {:?}", record.status));
    }
    if record.entries.len() != cfg.n_max {
        return Err(format!(
            "{} entries, expected {}",
            record.entries.len(),
            cfg.n_max
        ));
    }
    if problem.evaluations() != cfg.n_max as u64 {
        return Err(format!("{} objective calls", problem.evaluations()));
    }
    // design
    let mut rng = RngStream::new(cfg.effective_doe_seed());
    let design = latin_hypercube(cfg.n_init, problem.bounds(), &mut rng).unwrap();
    for (e, x) in record.entries.iter().zip(&design.points) {
        if &e.x != x {
            return Err(format!("entry {} is not the design point", e.eval));
        }
    }
    // incumbents
    let mut running = f64::INFINITY;
    for (k, e) in record.entries.iter().enumerate() {
        if e.eval != k + 1 {
            return Err("eval indices not consecutive".into());
        }
        running = running.min(e.f);
        if e.best_f != running {
            return Err(format!("best_f wrong at eval {}", e.eval));
        }
        if k > 0 && e.best_f > record.entries[k - 1].best_f {
            return Err("best-so-far increased".into());
        }
        if !problem.bounds().contains(&e.x) {
            return Err(format!("eval {} out of bounds", e.eval));
        }
    }
    if record.infills.len() != cfg.n_max - cfg.n_init {
        return Err("infill log incomplete".into());
    }
    let d = problem.dim();
    match record.algorithm {
        Algorithm::StandardBo => {}
        Algorithm::EciBo | Algorithm::CoordinateLineBo => {
            for info in &record.infills {
                check_single_coordinate(record, info)?;
            }
        }
    }
    if record.algorithm == Algorithm::EciBo {
        let sweeps = record.orders.len();
        for s in 0..sweeps {
            let coords: Vec<usize> = record
                .infills
                .iter()
                .filter(|i| i.sweep == Some(s))
                .map(|i| i.coordinate.unwrap())
                .collect();
            let order = &record.orders[s];
            let mut sorted = order.order.clone();
            sorted.sort();
            if sorted != (0..d).collect::<Vec<_>>() {
                return Err("order is not a permutation".into());
            }
            if order.maxima.windows(2).any(|w| w[0] < w[1]) {
                return Err("maximal ECI values not descending".into());
            }
            let last = s + 1 == sweeps;
            if (!last && coords != order.order) || (last && !order.order.starts_with(&coords)) {
                return Err(format!("sweep {s} does not follow its order"));
            }
        }
    }
    Ok(())
}

fn check_single_coordinate(record: &RunRecord, info: &InfillInfo) -> Result<(), String> {
    let x = &record.entries[info.eval - 1].x;
    let inc = incumbent_before(record, info.eval);
    let changed: Vec<usize> = (0..x.len()).filter(|&k| x[k] != inc[k]).collect();
    if info.fallback {
        return Ok(());
    }
    let coord = info.coordinate.ok_or("coordinate missing")?;
    match changed.as_slice() {
        [] => Err(format!("eval {} repeats the incumbent", info.eval)),
        [k] if *k == coord => Ok(()),
        _ => Err(format!(
            "eval {} changes {:?}, expected only {}",
            info.eval, changed, coord
        )),
    }
}

/// Compare everything except wall time.
pub fn same_trajectory(a: &RunRecord, b: &RunRecord) -> bool {
    let bits = |r: &RunRecord| -> Vec<u64> {
        r.entries
            .iter()
            .flat_map(|e| {
                e.x.iter()
                    .map(|v| v.to_bits())
                    .chain([e.f.to_bits(), e.best_f.to_bits()])
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    bits(a) == bits(b) && a.infills == b.infills && a.orders == b.orders && a.status == b.status
}
