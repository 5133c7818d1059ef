//! Acoustic localization and tracking toolkit for underwater vehicles.
//!
//! The crate is organized as a pipeline:
//!
//! - [`linalg`] — small dense vectors/matrices, pseudoinverse, least squares,
//!   symmetric eigendecomposition.
//! - [`acoustic`] — forward model: buoy geometry, travel times, and TDOA
//!   observations with configurable Gaussian timing noise.
//! - [`tdoa`] — position solvers: Chan closed-form multilateration, a
//!   linearized Gauss–Newton step, and an overdetermined least-squares path.
//! - [`kalman`] — discrete-time linear Kalman filter over the 6-D
//!   position/velocity state with acceleration input.
//! - [`search`] — post-disconnection prediction and search-region
//!   construction for recovery planning.
//! - [`sim`] — experiment harness: grid localization, tracked trajectories,
//!   disconnection scenarios, and summary metrics.

pub mod acoustic;
pub mod kalman;
pub mod linalg;
pub mod search;
pub mod sim;
pub mod stats;
pub mod tdoa;
