//! Trajectory planning for a UAV that relays downlink traffic for a
//! Poisson-deployed cellular network while flying between two points in a
//! fixed time.
//!
//! The pipeline is: [`scenario`] draws a network, [`radio`] turns every
//! candidate UAV position into a per-criterion reward, [`planner`] runs
//! backward induction over the waypoint lattice, [`smoothing`] fits a Bezier
//! curve through the result, and [`metrics`] measures what the UEs actually
//! get along either path. [`config`] and [`pipeline`] drive whole
//! experiments from a TOML file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod pathloss;
pub mod pipeline;
pub mod planner;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod smoothing;

pub use error::{Error, Result};
