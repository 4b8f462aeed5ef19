//! Detection of stochastic inputs from noisy measurements on linear
//! network dynamics.
//!
//! The network evolves as `x[k+1] = G x[k] + Pi w[k]` and is observed
//! through `y[k] = C x[k] + v[k]`. The crate computes the MAP and LD-MAP
//! detectors for mean-shift and covariance-shift hypotheses on `w`, their
//! finite-horizon and asymptotic error probabilities, and uses them to
//! compare sensor placements around node cutsets.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, with `*32` variants for single precision.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod scalar;
pub mod lti;
pub mod error_prob;
pub mod detectors;
pub mod cutset;
pub mod monte_carlo;
pub mod placement;
pub mod fixtures;
pub mod cli;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Network = graph::NetworkModel<f64>;
pub type Partition = graph::CutsetPartition<f64>;
pub type Sensors = lti::SensorSet<f64>;
pub type Scenario = lti::ScenarioSpec<f64>;
pub type Moments = lti::StackedMoments<f64>;
pub type Plan = monte_carlo::TrialPlan<f64>;
pub type Report = monte_carlo::EmpiricalReport<f64>;

pub type Network32 = graph::NetworkModel<f32>;
pub type Partition32 = graph::CutsetPartition<f32>;
pub type Sensors32 = lti::SensorSet<f32>;
pub type Scenario32 = lti::ScenarioSpec<f32>;
pub type Moments32 = lti::StackedMoments<f32>;
