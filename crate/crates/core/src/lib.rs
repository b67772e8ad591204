//! Bayesian optimization for expensive black-box minimization with
//! expected coordinate improvement (ECI).
//!
//! ECI-BO refines the current best point one coordinate at a time: each
//! infill point is found by a one-dimensional search of the EI surface
//! along a coordinate axis through the incumbent, and coordinates are
//! visited in descending order of their maximal ECI. The crate also
//! provides standard EI-driven BO, a random-coordinate baseline, the
//! analytical benchmark problems and a campaign harness with paired
//! Wilcoxon signed-rank comparisons.
//!
//! ```
//! use ecibo::{run_eci_bo, BoConfig, Problem, ProblemId};
//!
//! let problem = Problem::new(ProblemId::ThreeHumpCamel, 2).unwrap();
//! let cfg = BoConfig::new(2, 10, 14, 7);
//! let record = run_eci_bo(&problem, &cfg).unwrap();
//! assert_eq!(record.entries.len(), 14);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod benchmarks;
pub mod bounds;
pub mod doe;
pub mod engine;
pub mod error;
pub mod gp;
pub mod harness;
pub mod inner_opt;
pub mod linalg;
pub mod rng;

pub use acquisition::{eci, expected_improvement, Incumbent};
pub use benchmarks::{Problem, ProblemId};
pub use bounds::Bounds;
pub use doe::{latin_hypercube, Design};
pub use engine::{
    compute_coordinate_order, order_from_maxima, run_coordinate_line_bo, run_eci_bo,
    run_standard_bo, Algorithm, BoConfig, CoordinateOrder, Entry, RunRecord, RunStatus,
};
pub use error::{Error, Result};
pub use gp::{Dataset, GpModel, KernelParams, Prediction};
pub use harness::{run_experiment, ExperimentConfig, ExperimentSummary};
pub use inner_opt::{ga_maximize, GaConfig};
pub use rng::RngStream;
