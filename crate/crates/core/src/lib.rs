//! Streaming joint estimation of the quantile (value at risk) and the
//! superquantile (expected shortfall) of an unknown distribution.
//!
//! The crate is organised bottom-up:
//!
//! * [`schedules`]: power-law gain sequences and their admissibility checks;
//! * [`distributions`]: samplable models with closed-form and brute-force
//!   risk oracles;
//! * [`estimators`]: the Robbins–Monro quantile, its Cesàro average and the
//!   embedded, classical and convexified superquantile recursions;
//! * [`asymptotics`]: limiting variances and first-order error terms;
//! * [`experiments`]: the Monte-Carlo harness that checks them empirically.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod random;
pub mod schedules;

pub use distributions::{DistributionModel, RiskOracle};
pub use error::{Error, Result};
pub use estimators::{JointEstimatorState, TraceRow};
pub use random::RandomStream;
pub use schedules::{StepSchedule, ValidationReport};
