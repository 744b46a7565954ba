//! Nash-bargaining power control.
//!
//! Users are typed by RSRP into high (bargaining weight 2) and low (weight 1).
//! Two interacting clusters get the closed-form bargaining powers of
//! [`two_user_nbs_power`]; in the general multi-user case every active BS
//! transmits at its full per-PRB budget ([`multi_user_power`]).

mod multi;
mod two_user;

pub use multi::{
    check_constraints, multi_user_power, nbs_log_utility, nbs_log_utility_per_cluster,
    ConstraintReport, PowerAllocation,
};
pub use two_user::{
    grid_oracle, hessian_conditions, mixed_type_condition, two_user_nbs_power, GridOptimum,
    HessianReport, Objective, PowerCase, TwoUserInstance, TwoUserSolution,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEIGHT_HIGH: f64 = 2.0;
pub const WEIGHT_LOW: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserKind {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserType {
    pub kind: UserKind,
    pub weight: f64,
}

impl UserType {
    pub const HIGH: UserType = UserType {
        kind: UserKind::High,
        weight: WEIGHT_HIGH,
    };
    pub const LOW: UserType = UserType {
        kind: UserKind::Low,
        weight: WEIGHT_LOW,
    };
}

/// High type iff `rsrp > rho0` (strictly).
pub fn classify_user(rsrp_w: f64, rho0_w: f64) -> Result<UserType> {
    if !(rho0_w > 0.0) {
        return Err(Error::domain(
            "classify_user",
            format!("rho0 must be positive, got {rho0_w}"),
        ));
    }
    Ok(if rsrp_w > rho0_w {
        UserType::HIGH
    } else {
        UserType::LOW
    })
}

/// Delay-aware utility `SINR * exp(1 / delay)` with `delay = file_size / rate`.
pub fn utility(sinr: f64, rate_bps: f64, file_size_bits: f64) -> Result<f64> {
    if !(sinr >= 0.0) {
        return Err(Error::domain(
            "utility",
            format!("sinr must be >= 0, got {sinr}"),
        ));
    }
    if !(rate_bps > 0.0) {
        return Err(Error::domain(
            "utility",
            format!("rate must be positive, got {rate_bps}"),
        ));
    }
    if !(file_size_bits > 0.0) {
        return Err(Error::domain("utility", "file size must be positive"));
    }
    Ok(sinr * (rate_bps / file_size_bits).exp())
}

/// The same utility written through the Shannon rate of one PRB:
/// `SINR * (1 + SINR)^(prb_bw / (file_size * ln 2))`.
pub fn utility_shannon(sinr: f64, prb_bandwidth_hz: f64, file_size_bits: f64) -> f64 {
    sinr * (1.0 + sinr).powf(prb_bandwidth_hz / (file_size_bits * std::f64::consts::LN_2))
}
