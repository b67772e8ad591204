//! Optimization drivers: standard EI-based BO, ECI-BO and the random
//! coordinate baseline (CoordinateLineBO).
//!
//! All three share the same evaluate/fit/select loop and differ only in how
//! the next infill point is chosen:
//!
//! * standard BO maximizes EI over the whole box;
//! * ECI-BO sweeps the coordinates in descending order of their maximal ECI,
//!   moving the incumbent along one coordinate per evaluation;
//! * CoordinateLineBO picks the coordinate uniformly at random each step.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{coordinate_slice_point, eci, ei_at, Incumbent};
use crate::benchmarks::Problem;
use crate::doe::latin_hypercube;
use crate::error::{Error, Result};
use crate::gp::{Dataset, GpModel, DEFAULT_NUGGET};
use crate::inner_opt::{ga_maximize, GaConfig};
use crate::rng::{mix_seed, tags, RngStream};

/// Number of coordinate-only redraws tried before a duplicate infill is
/// replaced by a uniform point in the whole box.
const FALLBACK_COORDINATE_TRIES: usize = 16;
const FALLBACK_POINT_TRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "bo")]
    StandardBo,
    #[serde(rename = "eci-bo")]
    EciBo,
    #[serde(rename = "coordinate-line-bo")]
    CoordinateLineBo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::StandardBo,
        Algorithm::EciBo,
        Algorithm::CoordinateLineBo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::StandardBo => "bo",
            Algorithm::EciBo => "eci-bo",
            Algorithm::CoordinateLineBo => "coordinate-line-bo",
        }
    }

    /// Stable word mixed into per-algorithm seeds.
    pub fn seed_tag(self) -> u64 {
        match self {
            Algorithm::StandardBo => 1,
            Algorithm::EciBo => 2,
            Algorithm::CoordinateLineBo => 3,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub n_init: usize,
    pub n_max: usize,
    /// GA settings for full-dimensional EI maximization.
    pub ga_full: GaConfig,
    /// GA settings for one-dimensional ECI maximization.
    pub ga_1d: GaConfig,
    pub nugget: f64,
    pub fit_restarts: usize,
    /// Root seed for the algorithm's own streams.
    pub seed: u64,
    /// Seed of the initial design; derived from `seed` when absent. Set it
    /// explicitly to share one design between algorithms.
    pub doe_seed: Option<u64>,
}

impl BoConfig {
    /// Default settings for a `d`-dimensional problem.
    pub fn new(d: usize, n_init: usize, n_max: usize, seed: u64) -> Self {
        Self {
            n_init,
            n_max,
            ga_full: GaConfig::full_dimensional(d),
            ga_1d: GaConfig::one_dimensional(),
            nugget: DEFAULT_NUGGET,
            fit_restarts: 1,
            seed,
            doe_seed: None,
        }
    }

    pub fn with_doe_seed(mut self, seed: u64) -> Self {
        self.doe_seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 2 {
            return Err(Error::invalid("n_init must be at least 2"));
        }
        if self.n_max < self.n_init {
            return Err(Error::invalid("n_max must be at least n_init"));
        }
        if !(self.nugget > 0.0) {
            return Err(Error::invalid("nugget must be positive"));
        }
        self.ga_full.validate()?;
        self.ga_1d.validate()
    }

    /// Seed actually used for the initial design.
    pub fn effective_doe_seed(&self) -> u64 {
        self.doe_seed
            .unwrap_or_else(|| mix_seed(&[self.seed, tags::DOE]))
    }

    fn doe_stream(&self) -> RngStream {
        RngStream::new(self.effective_doe_seed())
    }
}

/// Coordinate visiting order for one ECI-BO sweep (0-based coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateOrder {
    pub order: Vec<usize>,
    /// Maximal ECI of `order[k]`, nonincreasing.
    pub maxima: Vec<f64>,
}

/// Sort coordinates by descending maximal ECI, lower index first on ties.
/// NaN counts as the smallest value.
pub fn order_from_maxima(maxima: &[f64]) -> CoordinateOrder {
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut order: Vec<usize> = (0..maxima.len()).collect();
    order.sort_by(|&a, &b| key(maxima[b]).total_cmp(&key(maxima[a])).then(a.cmp(&b)));
    let maxima = order.iter().map(|&i| key(maxima[i])).collect();
    CoordinateOrder { order, maxima }
}

/// Maximize ECI along every coordinate (in parallel, one stream per
/// coordinate derived from `stream`) and sort the coordinates by the result.
pub fn compute_coordinate_order(
    model: &GpModel,
    inc: &Incumbent,
    ga: &GaConfig,
    stream: &RngStream,
) -> Result<CoordinateOrder> {
    let (maxima, _) = coordinate_search(model, inc, ga, stream)?;
    Ok(order_from_maxima(&maxima))
}

/// `max_t ECI_i(t)` for every coordinate `i`.
pub fn coordinate_maxima(
    model: &GpModel,
    inc: &Incumbent,
    ga: &GaConfig,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    coordinate_search(model, inc, ga, stream).map(|(m, _)| m)
}

/// Per-coordinate maxima plus the total number of ECI evaluations.
fn coordinate_search(
    model: &GpModel,
    inc: &Incumbent,
    ga: &GaConfig,
    stream: &RngStream,
) -> Result<(Vec<f64>, u64)> {
    let found: Vec<(f64, f64, u64)> = (0..model.dim())
        .into_par_iter()
        .map(|i| maximize_eci(model, inc, i, ga, &mut stream.child(i as u64)))
        .collect::<Result<_>>()?;
    let evals = found.iter().map(|r| r.2).sum();
    Ok((found.into_iter().map(|r| r.1).collect(), evals))
}

/// Returns `(t*, ECI_i(t*), evaluations)`.
fn maximize_eci(
    model: &GpModel,
    inc: &Incumbent,
    coord: usize,
    ga: &GaConfig,
    rng: &mut RngStream,
) -> Result<(f64, f64, u64)> {
    let line = model.bounds().coordinate(coord);
    let res = ga_maximize(
        |t| eci(model, inc, coord, t[0]).unwrap_or(f64::NEG_INFINITY),
        &line,
        ga,
        rng,
    )?;
    Ok((res.x[0], res.value, res.evaluations as u64))
}

/// Uniform coordinate draw used by CoordinateLineBO.
pub fn select_random_coordinate(d: usize, rng: &mut RngStream) -> usize {
    rng.index(d)
}

/// One evaluated sample; `eval` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub eval: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub best_f: f64,
}

/// How a post-DoE sample was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfillInfo {
    pub eval: usize,
    /// Coordinate moved (coordinate drivers only).
    pub coordinate: Option<usize>,
    /// Sweep index (ECI-BO only).
    pub sweep: Option<usize>,
    /// The proposed point duplicated an archived sample and was replaced.
    pub fallback: bool,
    /// Acquisition evaluations spent choosing this point, excluding the
    /// per-sweep ordering searches.
    pub acquisition_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub problem: String,
    pub dim: usize,
    pub config: BoConfig,
    pub entries: Vec<Entry>,
    pub infills: Vec<InfillInfo>,
    /// ECI-BO sweep orders, in sweep order.
    pub orders: Vec<CoordinateOrder>,
    /// All acquisition evaluations of the run, ordering searches included.
    pub acquisition_evaluations: u64,
    pub status: RunStatus,
    pub wall_time_secs: f64,
}

impl RunRecord {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn final_best(&self) -> Option<f64> {
        self.entries.last().map(|e| e.best_f)
    }

    pub fn best_curve(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.best_f).collect()
    }

    /// Best sample `(x, f)`, earliest on ties.
    pub fn incumbent(&self) -> Option<(&[f64], f64)> {
        let mut best: Option<&Entry> = None;
        for e in &self.entries {
            if best.is_none_or(|b| e.f < b.f) {
                best = Some(e);
            }
        }
        best.map(|e| (e.x.as_slice(), e.f))
    }
}

struct Session<'a> {
    problem: &'a Problem,
    cfg: &'a BoConfig,
    data: Dataset,
    entries: Vec<Entry>,
    infills: Vec<InfillInfo>,
    orders: Vec<CoordinateOrder>,
    acquisition_evaluations: u64,
    fallback_rng: RngStream,
    root: RngStream,
}

impl<'a> Session<'a> {
    fn new(problem: &'a Problem, cfg: &'a BoConfig) -> Self {
        let root = RngStream::new(cfg.seed);
        Self {
            problem,
            cfg,
            data: Dataset::new(problem.bounds().clone()),
            entries: Vec::with_capacity(cfg.n_max),
            infills: Vec::new(),
            orders: Vec::new(),
            acquisition_evaluations: 0,
            fallback_rng: root.child(tags::FALLBACK),
            root,
        }
    }

    fn n(&self) -> usize {
        self.data.len()
    }

    fn done(&self) -> bool {
        self.n() >= self.cfg.n_max
    }

    fn run_doe(&mut self) -> Result<()> {
        let mut rng = self.cfg.doe_stream();
        let design = latin_hypercube(self.cfg.n_init, self.problem.bounds(), &mut rng)?;
        for x in design.points {
            let x = if self.data.find_duplicate(&x).is_some() {
                self.random_point()?
            } else {
                x
            };
            self.evaluate(x)?;
        }
        Ok(())
    }

    fn fit(&self) -> Result<GpModel> {
        GpModel::fit(&self.data, self.cfg.nugget, self.cfg.fit_restarts)
    }

    fn incumbent(&self) -> Incumbent {
        Incumbent::from_dataset(&self.data).expect("initial design is never empty")
    }

    fn evaluate(&mut self, x: Vec<f64>) -> Result<()> {
        let f = self.problem.evaluate(&x)?;
        self.data.push(&x, f)?;
        let best_f = self.entries.last().map_or(f, |e| e.best_f.min(f));
        self.entries.push(Entry {
            eval: self.entries.len() + 1,
            x,
            f,
            best_f,
        });
        Ok(())
    }

    fn random_point(&mut self) -> Result<Vec<f64>> {
        let bounds = self.problem.bounds();
        for _ in 0..FALLBACK_POINT_TRIES {
            let x: Vec<f64> = bounds
                .pairs()
                .iter()
                .map(|&(a, b)| self.fallback_rng.uniform_in(a, b))
                .collect();
            if self.data.find_duplicate(&x).is_none() {
                return Ok(x);
            }
        }
        Err(Error::invalid(
            "could not draw a non-duplicate fallback point",
        ))
    }

    /// Evaluate a proposed infill, replacing it when it duplicates an
    /// archived sample. Coordinate moves are first redrawn along the same
    /// coordinate so the single-coordinate structure is kept.
    fn evaluate_infill(
        &mut self,
        mut x: Vec<f64>,
        coordinate: Option<usize>,
        sweep: Option<usize>,
        acquisition_evals: u64,
    ) -> Result<()> {
        let mut fallback = false;
        if self.data.find_duplicate(&x).is_some() {
            fallback = true;
            let mut resolved = false;
            if let Some(i) = coordinate {
                let (a, b) = self.problem.bounds().pairs()[i];
                for _ in 0..FALLBACK_COORDINATE_TRIES {
                    x[i] = self.fallback_rng.uniform_in(a, b);
                    if self.data.find_duplicate(&x).is_none() {
                        resolved = true;
                        break;
                    }
                }
            }
            if !resolved {
                x = self.random_point()?;
            }
        }
        let eval = self.n() + 1;
        self.evaluate(x)?;
        self.infills.push(InfillInfo {
            eval,
            coordinate,
            sweep,
            fallback,
            acquisition_evals,
        });
        self.acquisition_evaluations += acquisition_evals;
        Ok(())
    }

    fn finish(self, algorithm: Algorithm, status: RunStatus, started: Instant) -> RunRecord {
        RunRecord {
            algorithm,
            problem: self.problem.name().to_string(),
            dim: self.problem.dim(),
            config: self.cfg.clone(),
            entries: self.entries,
            infills: self.infills,
            orders: self.orders,
            acquisition_evaluations: self.acquisition_evaluations,
            status,
            wall_time_secs: started.elapsed().as_secs_f64(),
        }
    }
}

fn drive(
    problem: &Problem,
    cfg: &BoConfig,
    algorithm: Algorithm,
    body: impl FnOnce(&mut Session) -> Result<()>,
) -> Result<RunRecord> {
    cfg.validate()?;
    if cfg.ga_full.pop_size < 2 {
        return Err(Error::invalid("ga_full population must be at least 2"));
    }
    let started = Instant::now();
    let mut session = Session::new(problem, cfg);
    let outcome = session.run_doe().and_then(|_| body(&mut session));
    let status = match outcome {
        Ok(()) => RunStatus::Completed,
        Err(e) => RunStatus::Failed {
            message: e.to_string(),
        },
    };
    Ok(session.finish(algorithm, status, started))
}

/// Standard BO: maximize EI over the full box each iteration.
pub fn run_standard_bo(problem: &Problem, cfg: &BoConfig) -> Result<RunRecord> {
    drive(problem, cfg, Algorithm::StandardBo, |s| {
        let ga_root = s.root.child(tags::GA);
        let mut step = 0u64;
        while !s.done() {
            let model = s.fit()?;
            let inc = s.incumbent();
            let mut rng = ga_root.child(step);
            let res = ga_maximize(
                |x| ei_at(&model, x, inc.f).unwrap_or(f64::NEG_INFINITY),
                s.problem.bounds(),
                &s.cfg.ga_full,
                &mut rng,
            )?;
            s.evaluate_infill(res.x, None, None, res.evaluations as u64)?;
            step += 1;
        }
        Ok(())
    })
}

/// ECI-BO: coordinate sweeps in descending maximal-ECI order.
///
/// The order for each sweep comes from the model fitted at sweep start; the
/// GP is refitted before every coordinate step after the first.
pub fn run_eci_bo(problem: &Problem, cfg: &BoConfig) -> Result<RunRecord> {
    drive(problem, cfg, Algorithm::EciBo, |s| {
        let ga_root = s.root.child(tags::GA);
        let order_root = s.root.child(tags::ORDER);
        let mut step = 0u64;
        let mut sweep = 0usize;
        while !s.done() {
            let model = s.fit()?;
            let inc = s.incumbent();
            let (maxima, evals) =
                coordinate_search(&model, &inc, &s.cfg.ga_1d, &order_root.child(sweep as u64))?;
            let order = order_from_maxima(&maxima);
            s.orders.push(order.clone());
            s.acquisition_evaluations += evals;
            let mut sweep_model = Some(model);
            for &coord in &order.order {
                if s.done() {
                    break;
                }
                let model = match sweep_model.take() {
                    Some(m) => m,
                    None => s.fit()?,
                };
                let inc = s.incumbent();
                let (t, _, evals) =
                    maximize_eci(&model, &inc, coord, &s.cfg.ga_1d, &mut ga_root.child(step))?;
                s.evaluate_infill(
                    coordinate_slice_point(&inc, coord, t),
                    Some(coord),
                    Some(sweep),
                    evals,
                )?;
                step += 1;
            }
            sweep += 1;
        }
        Ok(())
    })
}

/// CoordinateLineBO: like ECI-BO but the coordinate is drawn uniformly at
/// random (with replacement) each iteration.
pub fn run_coordinate_line_bo(problem: &Problem, cfg: &BoConfig) -> Result<RunRecord> {
    drive(problem, cfg, Algorithm::CoordinateLineBo, |s| {
        let ga_root = s.root.child(tags::GA);
        let mut coord_rng = s.root.child(tags::COORDINATE);
        let mut step = 0u64;
        while !s.done() {
            let model = s.fit()?;
            let inc = s.incumbent();
            let coord = select_random_coordinate(s.problem.dim(), &mut coord_rng);
            let (t, _, evals) =
                maximize_eci(&model, &inc, coord, &s.cfg.ga_1d, &mut ga_root.child(step))?;
            s.evaluate_infill(
                coordinate_slice_point(&inc, coord, t),
                Some(coord),
                None,
                evals,
            )?;
            step += 1;
        }
        Ok(())
    })
}

pub fn run(algorithm: Algorithm, problem: &Problem, cfg: &BoConfig) -> Result<RunRecord> {
    match algorithm {
        Algorithm::StandardBo => run_standard_bo(problem, cfg),
        Algorithm::EciBo => run_eci_bo(problem, cfg),
        Algorithm::CoordinateLineBo => run_coordinate_line_bo(problem, cfg),
    }
}
