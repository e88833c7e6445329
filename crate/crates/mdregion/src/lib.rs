//! Rate-region tools for vector Gaussian multiple descriptions with
//! individual and central receivers: test-channel evaluation, a
//! determinant-ratio converse bound with a cone maximizer, an exact scalar
//! solver, and an entropy-power verification harness.
//!
//! ```
//! use mdregion::{group_weights, maximize_bound, Instance, OptimizerOptions, Spd};
//!
//! let instance = Instance::new(
//!     Spd::identity(2),
//!     Spd::scaled_identity(2, 0.2),
//!     vec![Spd::scaled_identity(2, 0.5), Spd::scaled_identity(2, 0.6)],
//! )?;
//! let profile = group_weights(&[1.5, 0.5])?;
//! let result = maximize_bound(&instance, &profile, &OptimizerOptions::default())?;
//! assert!(result.value > 0.0);
//! # Ok::<(), mdregion::Error>(())
//! ```

// Index loops mirror the matrix algebra they implement; negated float
// comparisons (`!(x > 0)`) deliberately treat NaN as out of domain, which
// the suggested `x <= 0` would not.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod channel;
pub mod cli;
pub mod epi;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod problem;
pub mod scalar;
pub mod verify;

pub use bound::{maximize_bound, OptimizerOptions};
pub use error::{Error, Result};
pub use problem::group_weights;
pub use scalar::solve as solve_scalar;

/// Double-precision matrix.
pub type Mat = linalg::Matrix<f64>;
/// Double-precision symmetric positive-definite matrix.
pub type Spd = linalg::SpdMatrix<f64>;
/// Double-precision weight profile.
pub type Profile = problem::WeightProfile<f64>;
/// Double-precision problem instance.
pub type Instance = problem::ProblemInstance<f64>;
/// Double-precision rate point.
pub type Rates = problem::RatePoint<f64>;
/// Double-precision test channel.
pub type Channel = channel::TestChannel<f64>;
/// Double-precision auxiliary ladder.
pub type Ladder = bound::AuxiliaryLadder<f64>;
/// Double-precision scalar solution.
pub type ScalarSolution = scalar::ScalarSolution<f64>;
/// Double-precision entropy-inequality instance.
pub type EpiInstance = epi::EpiInstance<f64>;
