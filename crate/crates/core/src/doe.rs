//! Latin hypercube designs.

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// An initial design in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Random-permutation Latin hypercube: each dimension is cut into `n` equal
/// strata, every stratum holds exactly one point, and the position inside a
/// stratum is uniform.
pub fn latin_hypercube(n: usize, bounds: &Bounds, rng: &mut RngStream) -> Result<Design> {
    if n == 0 {
        return Err(Error::invalid("latin hypercube needs n >= 1"));
    }
    let d = bounds.dim();
    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        rng.shuffle(&mut strata);
        let (a, b) = (bounds.lower(j), bounds.upper(j));
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u = (s as f64 + rng.uniform()) / n as f64;
            point[j] = if b > a {
                (a + u * (b - a)).clamp(a, b)
            } else {
                a
            };
        }
    }
    Ok(Design {
        points,
        seed: rng.seed(),
    })
}
