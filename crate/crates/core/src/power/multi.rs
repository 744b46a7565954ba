use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use super::UserType;
use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::metrics::signal_and_interference;
use crate::scheduling::ClusterAssignment;

/// Transmit power of every BS on every PRB, `[n_prb, n_bs]`, in watts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    pub per_prb_per_bs: Array2<f64>,
}

impl PowerAllocation {
    pub fn zeros(n_prb: usize, n_bs: usize) -> Self {
        Self {
            per_prb_per_bs: Array2::zeros((n_prb, n_bs)),
        }
    }

    pub fn get(&self, prb: usize, bs: usize) -> f64 {
        self.per_prb_per_bs[[prb, bs]]
    }

    pub fn set(&mut self, prb: usize, bs: usize, watts: f64) {
        self.per_prb_per_bs[[prb, bs]] = watts;
    }

    /// Power summed over PRBs for one BS.
    pub fn bs_total(&self, bs: usize) -> f64 {
        self.per_prb_per_bs.column(bs).sum()
    }

    pub fn n_prb(&self) -> usize {
        self.per_prb_per_bs.nrows()
    }

    pub fn n_bs(&self) -> usize {
        self.per_prb_per_bs.ncols()
    }
}

/// Maximum-power rule: each BS splits `p_max` equally over the PRBs on which it
/// serves someone and stays silent elsewhere.
pub fn multi_user_power(assignment: &ClusterAssignment, channel: &ChannelState) -> PowerAllocation {
    let n_bs = channel.n_bs();
    let mut active = vec![0usize; n_bs];
    for (_, s) in assignment.entries() {
        for &j in &s.cbs {
            active[j] += 1;
        }
    }
    let mut alloc = PowerAllocation::zeros(assignment.n_prb(), n_bs);
    for (b, s) in assignment.entries() {
        for &j in &s.cbs {
            alloc.set(b, j, channel.p_max[j] / active[j] as f64);
        }
    }
    alloc
}

/// Weighted sum of log-SINRs over the scheduled edge users that have a type.
pub fn nbs_log_utility(
    assignment: &ClusterAssignment,
    power: &PowerAllocation,
    channel: &ChannelState,
    types: &BTreeMap<usize, UserType>,
) -> f64 {
    assignment
        .edge_entries()
        .filter_map(|(b, s)| {
            let t = types.get(&s.user_id)?;
            let (sig, intf) = signal_and_interference(s, b, power, channel);
            Some(t.weight * (sig / (intf + channel.noise_power)).ln())
        })
        .sum()
}

/// [`nbs_log_utility`] in the per-cluster view: each user's signal comes from
/// `power` while its interference is frozen at `reference`, so a BS's power
/// only enters the utility of the user it serves.
pub fn nbs_log_utility_per_cluster(
    assignment: &ClusterAssignment,
    power: &PowerAllocation,
    reference: &PowerAllocation,
    channel: &ChannelState,
    types: &BTreeMap<usize, UserType>,
) -> f64 {
    assignment
        .edge_entries()
        .filter_map(|(b, s)| {
            let t = types.get(&s.user_id)?;
            let (sig, _) = signal_and_interference(s, b, power, channel);
            let (_, intf) = signal_and_interference(s, b, reference, channel);
            Some(t.weight * (sig / (intf + channel.noise_power)).ln())
        })
        .sum()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// Every entry non-negative.
    pub c1_ok: bool,
    /// `(prb, bs, user)` serving links whose received power is below `p0`.
    pub c2_violations: Vec<(usize, usize, usize)>,
    /// Every BS within its total power budget.
    pub c3_ok: bool,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.c1_ok && self.c3_ok && self.c2_violations.is_empty()
    }
}

/// Checks non-negativity, the per-BS budget and the received-power floor `p0`
/// on every serving link.
pub fn check_constraints(
    power: &PowerAllocation,
    assignment: &ClusterAssignment,
    channel: &ChannelState,
    p0_w: f64,
) -> Result<ConstraintReport> {
    if power.n_bs() != channel.n_bs() || power.n_prb() != assignment.n_prb() {
        return Err(Error::domain(
            "check_constraints",
            "power allocation shape mismatch",
        ));
    }
    let c1_ok = power
        .per_prb_per_bs
        .iter()
        .all(|&p| p >= 0.0 && p.is_finite());
    let c3_ok = (0..power.n_bs()).all(|j| power.bs_total(j) <= channel.p_max[j] * (1.0 + 1e-12));
    let mut c2_violations = Vec::new();
    for (b, s) in assignment.entries() {
        for &j in &s.cbs {
            if power.get(b, j) * channel.gain[[j, s.user_id]] < p0_w {
                c2_violations.push((b, j, s.user_id));
            }
        }
    }
    Ok(ConstraintReport {
        c1_ok,
        c2_violations,
        c3_ok,
    })
}
