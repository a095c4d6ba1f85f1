//! Deterministic simulation toolkit for path-dependent attractor dynamics.
//!
//! The crate is organised by model family:
//!
//! * [`dynamics`] - replicator and cusp right-hand sides, a fixed-step RK4
//!   integrator, fixed-point scans, bifurcation sweeps and quasi-static
//!   hysteresis loops.
//! * [`netgrowth`] - a two-camp growing network whose arrivals choose a camp
//!   by preferential attachment, with Monte Carlo lock-in and intervention
//!   cost estimates.
//! * [`abm`] - a two-strategy evolutionary game on an interaction topology
//!   with imitation updates and attractor classification.
//! * [`cogmodel`] - layered conceptual hypergraphs with storage, recall,
//!   associative and deliberate reasoning, lifting/projection and a fitness
//!   triple.
//! * [`harness`] - JSON scenario configs, seeded replication, aggregation and
//!   CSV/manifest output.
//!
//! Every stochastic routine draws from [`rng::SimRng`] streams derived from a
//! master seed, so identical inputs give identical outputs regardless of the
//! number of worker threads.

pub mod abm;
pub mod cogmodel;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod netgrowth;
pub mod rng;

pub use error::{Error, Result};
