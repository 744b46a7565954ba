//! Per-user SINR, Shannon rate and transmission delay, plus aggregate
//! throughput and Jain's fairness index over scheduled edge users.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::power::PowerAllocation;
use crate::scheduling::{ClusterAssignment, ScheduledUser};

/// Received power at `user` on PRB `prb` split into the part from its own
/// cooperating set and the part from every other BS transmitting on that PRB.
pub fn signal_and_interference(
    user: &ScheduledUser,
    prb: usize,
    power: &PowerAllocation,
    channel: &ChannelState,
) -> (f64, f64) {
    let m = user.user_id;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for j in 0..channel.n_bs() {
        let p = power.get(prb, j);
        if p == 0.0 {
            continue;
        }
        let rx = p * channel.gain[[j, m]];
        if user.cbs.contains(&j) {
            signal += rx;
        } else {
            interference += rx;
        }
    }
    (signal, interference)
}

/// Cooperative SINR of `user` on PRB `prb`.
pub fn sinr(
    assignment: &ClusterAssignment,
    power: &PowerAllocation,
    channel: &ChannelState,
    prb: usize,
    user: usize,
) -> Result<f64> {
    let s = assignment
        .find(prb, user)
        .ok_or(Error::NotScheduled { user, prb })?;
    let (sig, intf) = signal_and_interference(s, prb, power, channel);
    Ok(sig / (intf + channel.noise_power))
}

/// Shannon rate over one PRB: `(B / R) log2(1 + sinr)`.
pub fn rate(sinr: f64, bandwidth_hz: f64, n_prb: usize) -> f64 {
    bandwidth_hz / n_prb as f64 * (1.0 + sinr).log2()
}

/// Time to deliver `file_size_bits` at `rate_bps`; infinite when the rate is zero.
pub fn delay(rate_bps: f64, file_size_bits: f64) -> f64 {
    if rate_bps <= 0.0 {
        f64::INFINITY
    } else {
        file_size_bits / rate_bps
    }
}

/// Jain's fairness index `(sum r)^2 / (K sum r^2)`.
pub fn jain(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::domain("jain", "empty rate list"));
    }
    if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(Error::domain(
            "jain",
            "rates must be finite and non-negative",
        ));
    }
    let sum: f64 = rates.iter().sum();
    let sq: f64 = rates.iter().map(|r| r * r).sum();
    if sq == 0.0 {
        return Err(Error::domain("jain", "all rates are zero"));
    }
    Ok((sum * sum / (rates.len() as f64 * sq)).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    pub user_id: usize,
    pub prb: usize,
    pub cbs_size: usize,
    pub sinr: f64,
    pub rate_bps: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_user: Vec<UserMetrics>,
    pub sum_edge_throughput_bps: f64,
    pub mean_edge_throughput_bps: f64,
    pub mean_delay_s: f64,
    pub jain_index: f64,
}

/// Static inputs of [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub bandwidth_hz: f64,
    pub n_prb: usize,
    pub file_size_bits: f64,
}

/// Evaluates every scheduled edge user, in PRB then placement order.
pub fn evaluate(
    assignment: &ClusterAssignment,
    power: &PowerAllocation,
    channel: &ChannelState,
    params: &RateParams,
) -> Result<MetricsReport> {
    let per_user: Vec<UserMetrics> = assignment
        .edge_entries()
        .map(|(b, s)| {
            let (sig, intf) = signal_and_interference(s, b, power, channel);
            let g = sig / (intf + channel.noise_power);
            let r = rate(g, params.bandwidth_hz, params.n_prb);
            UserMetrics {
                user_id: s.user_id,
                prb: b,
                cbs_size: s.cbs.len(),
                sinr: g,
                rate_bps: r,
                delay_s: delay(r, params.file_size_bits),
            }
        })
        .collect();
    if per_user.is_empty() {
        return Err(Error::NoEdgeUsers);
    }
    let rates: Vec<f64> = per_user.iter().map(|u| u.rate_bps).collect();
    let sum: f64 = rates.iter().sum();
    let k = per_user.len() as f64;
    Ok(MetricsReport {
        sum_edge_throughput_bps: sum,
        mean_edge_throughput_bps: sum / k,
        mean_delay_s: per_user.iter().map(|u| u.delay_s).sum::<f64>() / k,
        jain_index: jain(&rates)?,
        per_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::Role;
    use ndarray::array;

    #[test]
    fn rate_values() {
        assert_eq!(rate(0.0, 3e6, 15), 0.0);
        assert!((rate(1.0, 3e6, 15) - 200_000.0).abs() < 1e-9);
        assert!((rate(3.0, 3e6, 15) - 400_000.0).abs() < 1e-9);
    }

    #[test]
    fn delay_values() {
        assert!((delay(8e5, 8e8) - 1000.0).abs() < 1e-9);
        assert!((delay(1.6e6, 8e8) - 500.0).abs() < 1e-9);
        let mb100 = crate::units::megabytes_to_bits(100.0, true);
        assert!((delay(5.5e5, mb100) - 1525.2).abs() < 0.05);
        assert_eq!(delay(0.0, 8e8), f64::INFINITY);
    }

    #[test]
    fn jain_values() {
        assert!((jain(&[5.0, 5.0, 5.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((jain(&[7.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((jain(&[1.0, 2.0, 3.0]).unwrap() - 36.0 / 42.0).abs() < 1e-15);
        assert!(jain(&[0.0, 0.0]).is_err());
        assert!(jain(&[]).is_err());
    }

    #[test]
    fn lone_user_sinr_is_snr() {
        let ch = ChannelState::from_gains(array![[1e-8], [1e-9]], vec![20.0, 20.0], 1e-13);
        let mut a = ClusterAssignment::empty(1);
        a.per_prb[0].push(ScheduledUser {
            user_id: 0,
            serving_bs: 0,
            cbs: vec![0],
            role: Role::Edge,
        });
        let mut p = PowerAllocation::zeros(1, 2);
        p.set(0, 0, 2.0);
        let g = sinr(&a, &p, &ch, 0, 0).unwrap();
        assert!((g - 2.0 * 1e-8 / 1e-13).abs() / g < 1e-12);
        assert!(matches!(
            sinr(&a, &p, &ch, 0, 5),
            Err(Error::NotScheduled { user: 5, prb: 0 })
        ));
    }
}
