//! Analytical test problems.
//!
//! | id               | domain               | minimum      |
//! |------------------|----------------------|--------------|
//! | ellipsoid        | `[-5.12, 5.12]^d`    | 0 at 0       |
//! | rosenbrock       | `[-2.048, 2.048]^d`  | 0 at 1       |
//! | ackley           | `[-32.768, 32.768]^d`| 0 at 0       |
//! | griewank         | `[-600, 600]^d`      | 0 at 0       |
//! | rastrigin        | `[-5.12, 5.12]^d`    | 0 at 0       |
//! | three_hump_camel | `[-2, 2]^2`          | 0 at 0       |
//! | sine_demo        | `[0, 2π]`            | -1 at 3π/2   |

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemId {
    Ellipsoid,
    Rosenbrock,
    Ackley,
    Griewank,
    Rastrigin,
    ThreeHumpCamel,
    SineDemo,
}

impl ProblemId {
    pub const ALL: [ProblemId; 7] = [
        ProblemId::Ellipsoid,
        ProblemId::Rosenbrock,
        ProblemId::Ackley,
        ProblemId::Griewank,
        ProblemId::Rastrigin,
        ProblemId::ThreeHumpCamel,
        ProblemId::SineDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Ellipsoid => "ellipsoid",
            ProblemId::Rosenbrock => "rosenbrock",
            ProblemId::Ackley => "ackley",
            ProblemId::Griewank => "griewank",
            ProblemId::Rastrigin => "rastrigin",
            ProblemId::ThreeHumpCamel => "three_hump_camel",
            ProblemId::SineDemo => "sine_demo",
        }
    }

    /// Required dimension for fixed-dimension problems.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            ProblemId::ThreeHumpCamel => Some(2),
            ProblemId::SineDemo => Some(1),
            _ => None,
        }
    }

    fn domain(self) -> (f64, f64) {
        match self {
            ProblemId::Ellipsoid | ProblemId::Rastrigin => (-5.12, 5.12),
            ProblemId::Rosenbrock => (-2.048, 2.048),
            ProblemId::Ackley => (-32.768, 32.768),
            ProblemId::Griewank => (-600.0, 600.0),
            ProblemId::ThreeHumpCamel => (-2.0, 2.0),
            ProblemId::SineDemo => (0.0, 2.0 * std::f64::consts::PI),
        }
    }

    fn eval(self, x: &[f64]) -> f64 {
        match self {
            ProblemId::Ellipsoid => ellipsoid(x),
            ProblemId::Rosenbrock => rosenbrock(x),
            ProblemId::Ackley => ackley(x),
            ProblemId::Griewank => griewank(x),
            ProblemId::Rastrigin => rastrigin(x),
            ProblemId::ThreeHumpCamel => three_hump_camel(x),
            ProblemId::SineDemo => x[0].sin(),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_").to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown problem '{s}'")))
    }
}

pub fn ellipsoid(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v * v)
        .sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cos = x
        .iter()
        .map(|v| (2.0 * std::f64::consts::PI * v).cos())
        .sum::<f64>()
        / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + std::f64::consts::E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}

pub fn three_hump_camel(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    2.0 * a * a - 1.05 * a.powi(4) + a.powi(6) / 6.0 + a * b + b * b
}

type ObjectiveFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Body {
    Builtin(ProblemId),
    Custom { name: String, f: Arc<ObjectiveFn> },
}

/// A black-box objective with box bounds and an evaluation counter.
pub struct Problem {
    body: Body,
    bounds: Bounds,
    evaluations: AtomicU64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

impl Problem {
    pub fn new(id: ProblemId, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if let Some(fixed) = id.fixed_dim() {
            if d != fixed {
                return Err(Error::invalid(format!(
                    "{id} is defined only for d = {fixed}"
                )));
            }
        }
        let (lo, hi) = id.domain();
        Ok(Self {
            body: Body::Builtin(id),
            bounds: Bounds::uniform(lo, hi, d)?,
            evaluations: AtomicU64::new(0),
        })
    }

    /// Wrap an arbitrary objective.
    pub fn custom<F>(name: impl Into<String>, bounds: Bounds, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            body: Body::Custom {
                name: name.into(),
                f: Arc::new(f),
            },
            bounds,
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn id(&self) -> Option<ProblemId> {
        match &self.body {
            Body::Builtin(id) => Some(*id),
            Body::Custom { .. } => None,
        }
    }

    pub fn name(&self) -> &str {
        match &self.body {
            Body::Builtin(id) => id.as_str(),
            Body::Custom { name, .. } => name,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "{} expects {} coordinates, got {}",
                self.name(),
                self.dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("evaluation point must be finite"));
        }
        debug_assert!(self.bounds.contains(x), "evaluation outside bounds");
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.body {
            Body::Builtin(id) => id.eval(x),
            Body::Custom { f, .. } => f(x),
        })
    }
}
