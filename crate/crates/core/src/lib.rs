//! Glauber dynamics for the one-dimensional Ising model on the cycle.
//!
//! * [`model`]: parameters, initial conditions, exact Gibbs measure and sampler
//! * [`dynamics`]: event-driven simulation under the voter and heat-bath encodings
//! * [`histories`]: backward update supports (coalescing killed random walks)
//! * [`semigroup`]: the cycle random-walk semigroup and closed-form predictions
//! * [`oracle`]: exact distribution evolution and TV distance for small `n`
//! * [`stats`]: test statistics, Monte Carlo samplers and TV lower bounds
//! * [`cli`]: the command-line driver and the invariant suite

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod histories;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod semigroup;
pub mod stats;

pub use error::{Error, Result};
