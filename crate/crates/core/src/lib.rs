//! System-level simulator for downlink coordinated multi-point (CoMP) joint
//! transmission in dense cellular layouts.
//!
//! The pipeline for one drop is: [`topology`] (hexagonal cells, random users)
//! → [`channel`] (path-loss gains, RSRP) → [`scheduling`] (edge users,
//! affinity-propagation BS clusters or fixed-size baselines, PRB placement)
//! → [`power`] (Nash-bargaining power control) → [`metrics`] (SINR, rate,
//! delay, Jain index). [`sim`] runs seeded Monte-Carlo drops and sweeps.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affinity;
pub mod channel;
pub mod config;
pub mod error;
pub mod export;
pub mod metrics;
pub mod power;
pub mod scheduling;
pub mod sim;
pub mod topology;
pub mod units;

pub use config::{Algorithm, Deployment, Load, ScenarioConfig};
pub use error::{Error, Result};
