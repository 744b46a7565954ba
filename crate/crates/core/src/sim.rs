//! Seeded Monte-Carlo drops, algorithm arms and parameter sweeps.
//!
//! Every drop derives its user layout from `(seed, drop_index)` only, so all
//! algorithm arms of a sweep point see the same topologies.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::{ApOptions, Preference};
use crate::channel::{compute_channel, ChannelState, LinkBudget};
use crate::config::{Algorithm, Load, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricsReport, RateParams};
use crate::power::{
    classify_user, multi_user_power, two_user_nbs_power, PowerAllocation, TwoUserInstance, UserType,
};
use crate::scheduling::{
    fixed_size_clusters, form_clusters, select_edge_users, ApSettings, ClusterAssignment,
    EdgeUserSet, Role,
};
use crate::topology::{LayoutParams, Topology};

/// Seed of the user drop `drop_index` of a scenario seeded with `seed`.
pub fn drop_seed(seed: u64, drop_index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop_index);
    rng.next_u64()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropDiagnostics {
    pub n_edge_users: usize,
    pub n_scheduled_edge: usize,
    pub mean_cbs_size: f64,
    /// False if any affinity-propagation round hit `max_iterations`.
    pub ap_converged: bool,
    pub ap_iterations: usize,
    /// PRBs on which the two-cluster closed form set the powers.
    pub two_user_prbs: usize,
    pub clamped_two_user: usize,
    pub serving_exceptions: usize,
    pub warnings: Vec<String>,
}

/// Everything produced by one drop.
#[derive(Debug, Clone)]
pub struct DropOutcome {
    pub drop_index: u64,
    pub topology: Topology,
    pub channel: ChannelState,
    pub edge: EdgeUserSet,
    pub assignment: ClusterAssignment,
    pub power: PowerAllocation,
    pub types: BTreeMap<usize, UserType>,
    pub report: MetricsReport,
    pub diagnostics: DropDiagnostics,
}

fn ap_settings(config: &ScenarioConfig) -> ApSettings {
    ApSettings {
        preference: match config.ap_preference_dbm {
            Some(v) => Preference::Value(v),
            None => Preference::Median,
        },
        options: ApOptions {
            damping: config.damping,
            max_iterations: config.max_iterations,
            stability_window: config.stability_window,
        },
    }
}

/// Runs one drop end to end and keeps every intermediate product.
pub fn simulate_drop(config: &ScenarioConfig, drop_index: u64) -> Result<DropOutcome> {
    config.validate()?;
    let topology = Topology::build(
        &LayoutParams::from(config),
        drop_seed(config.seed, drop_index),
    )?;
    let channel = compute_channel(&topology, &LinkBudget::from(config));
    let edge = select_edge_users(
        &channel,
        &topology,
        config.edge_margin_db,
        config.edge_users_per_cell,
    )?;
    if edge.is_empty() {
        return Err(Error::NoEdgeUsers);
    }

    let mut diag = DropDiagnostics {
        n_edge_users: edge.len(),
        ap_converged: true,
        ..Default::default()
    };
    let mut assignment = match config.algorithm {
        Algorithm::ApComp => {
            // prune against the received power at the smallest per-PRB share
            let prune_w = config.p0_w() * config.n_prb as f64;
            let out = form_clusters(&channel, &edge, prune_w, &ap_settings(config), config.n_prb)?;
            diag.ap_converged = out.rounds.iter().all(|r| r.converged);
            diag.ap_iterations = out
                .rounds
                .iter()
                .map(|r| r.iterations_run)
                .max()
                .unwrap_or(0);
            out.assignment
        }
        Algorithm::CommonComp => {
            fixed_size_clusters(&channel, &edge, config.cluster_size, config.n_prb)?
        }
        Algorithm::NoComp => fixed_size_clusters(&channel, &edge, 1, config.n_prb)?,
    };
    if config.load == Load::FullBuffer {
        assignment.fill_idle_with_center_users(&channel, &edge);
    }
    debug_assert!(assignment.check_disjoint().is_ok());

    let mut power = multi_user_power(&assignment, &channel);
    let mut types = BTreeMap::new();
    for u in &edge.users {
        types.insert(u.user_id, classify_user(u.rsrp_best, config.rho0_w())?);
    }
    if config.algorithm == Algorithm::ApComp {
        apply_two_user_rule(config, &assignment, &channel, &types, &mut power, &mut diag);
    }

    let report = evaluate(
        &assignment,
        &power,
        &channel,
        &RateParams {
            bandwidth_hz: config.bandwidth_hz,
            n_prb: config.n_prb,
            file_size_bits: config.file_size_bits(),
        },
    )?;

    let sizes: Vec<usize> = assignment
        .edge_entries()
        .map(|(_, s)| s.cbs.len())
        .collect();
    diag.n_scheduled_edge = sizes.len();
    diag.mean_cbs_size = sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64;
    diag.serving_exceptions = assignment.serving_exceptions;
    diag.warnings.extend(assignment.warnings.iter().cloned());

    Ok(DropOutcome {
        drop_index,
        topology,
        channel,
        edge,
        assignment,
        power,
        types,
        report,
        diagnostics: diag,
    })
}

/// On PRBs carried by exactly two edge clusters and nothing else, replaces the
/// maximum-power rule by the two-cluster bargaining solution.
fn apply_two_user_rule(
    config: &ScenarioConfig,
    assignment: &ClusterAssignment,
    channel: &ChannelState,
    types: &BTreeMap<usize, UserType>,
    power: &mut PowerAllocation,
    diag: &mut DropDiagnostics,
) {
    for (b, users) in assignment.per_prb.iter().enumerate() {
        if users.len() != 2 || users.iter().any(|s| s.role != Role::Edge) {
            continue;
        }
        let (c1, c2) = (&users[0], &users[1]);
        let n = c1.cbs.len().min(c2.cbs.len());
        let sum_gain = |cbs: &[usize], user: usize| -> f64 {
            cbs.iter().map(|&j| channel.gain[[j, user]]).sum::<f64>() / n as f64
        };
        let budget = c1
            .cbs
            .iter()
            .chain(&c2.cbs)
            .map(|&j| power.get(b, j))
            .fold(f64::INFINITY, f64::min);
        let inst = TwoUserInstance {
            n,
            g1: sum_gain(&c1.cbs, c1.user_id),
            g2: sum_gain(&c2.cbs, c2.user_id),
            g3: sum_gain(&c2.cbs, c1.user_id),
            g4: sum_gain(&c1.cbs, c2.user_id),
            sigma2: channel.noise_power,
            p_max: budget,
            p0: config.p0_w(),
            types: [types[&c1.user_id], types[&c2.user_id]],
            bandwidth_hz: config.bandwidth_hz,
            n_prb: config.n_prb,
            file_size_bits: config.file_size_bits(),
        };
        match two_user_nbs_power(&inst) {
            Ok(sol) => {
                for &j in &c1.cbs {
                    power.set(b, j, sol.p1);
                }
                for &j in &c2.cbs {
                    power.set(b, j, sol.p2);
                }
                diag.two_user_prbs += 1;
                if sol.clamped {
                    diag.clamped_two_user += 1;
                }
            }
            Err(e) => diag.warnings.push(format!(
                "PRB {b}: two-cluster rule skipped ({e}); kept maximum power"
            )),
        }
    }
}

/// Metrics of one drop.
pub fn run_drop(config: &ScenarioConfig, drop_index: u64) -> Result<MetricsReport> {
    simulate_drop(config, drop_index).map(|o| o.report)
}

/// All `n_drops` drops of a scenario, evaluated in parallel and returned in drop order.
pub fn run_drops(config: &ScenarioConfig) -> Result<Vec<DropOutcome>> {
    config.validate()?;
    (0..config.n_drops as u64)
        .into_par_iter()
        .map(|d| {
            simulate_drop(config, d).map_err(|e| Error::Drop {
                drop: d,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Aggregate over drops. Means are taken over per-drop means; `stderr` is the
/// standard error of the per-drop mean throughput.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_edge_throughput_bps: f64,
    pub mean_delay_s: f64,
    pub jain: f64,
    pub stderr: f64,
    pub n_drops: usize,
}

impl Summary {
    pub fn from_reports<'a, I: IntoIterator<Item = &'a MetricsReport>>(reports: I) -> Self {
        let reports: Vec<&MetricsReport> = reports.into_iter().collect();
        let k = reports.len();
        let kf = k as f64;
        let tp: Vec<f64> = reports.iter().map(|r| r.mean_edge_throughput_bps).collect();
        let mean = tp.iter().sum::<f64>() / kf;
        let stderr = if k > 1 {
            let var = tp.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (kf - 1.0);
            (var / kf).sqrt()
        } else {
            0.0
        };
        Summary {
            mean_edge_throughput_bps: mean,
            mean_delay_s: reports.iter().map(|r| r.mean_delay_s).sum::<f64>() / kf,
            jain: reports.iter().map(|r| r.jain_index).sum::<f64>() / kf,
            stderr,
            n_drops: k,
        }
    }
}

/// Runs a scenario and summarises it.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(Vec<DropOutcome>, Summary)> {
    let drops = run_drops(config)?;
    let summary = Summary::from_reports(drops.iter().map(|d| &d.report));
    Ok((drops, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ClusterSize,
    CellRadius,
    Damping,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::ClusterSize => "cluster_size",
            SweepAxis::CellRadius => "cell_radius",
            SweepAxis::Damping => "damping",
        }
    }

    /// Copy of `config` with this axis set to `x`.
    pub fn apply(&self, config: &ScenarioConfig, x: f64) -> Result<ScenarioConfig> {
        let mut c = config.clone();
        match self {
            SweepAxis::ClusterSize => {
                if !(x >= 1.0 && x.fract() == 0.0) {
                    return Err(Error::config(
                        "cluster_size",
                        format!("{x} is not a positive integer"),
                    ));
                }
                c.cluster_size = x as usize;
            }
            SweepAxis::CellRadius => c.cell_radius_m = x,
            SweepAxis::Damping => c.damping = x,
        }
        c.validate()?;
        Ok(c)
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster_size" => Ok(SweepAxis::ClusterSize),
            "cell_radius" | "cell_radius_m" => Ok(SweepAxis::CellRadius),
            "damping" => Ok(SweepAxis::Damping),
            other => Err(Error::config(
                "axis",
                format!(
                    "unknown sweep axis `{other}` (expected cluster_size, cell_radius or damping)"
                ),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x_value: f64,
    pub mean_edge_throughput_bps: f64,
    pub mean_delay_s: f64,
    pub jain: f64,
    pub stderr: f64,
    pub n_drops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub algorithm: Algorithm,
    /// Ascending in `x_value`.
    pub points: Vec<SweepPoint>,
}

/// Runs `config.n_drops` drops at every value of `axis` for `config.algorithm`.
pub fn run_sweep(config: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::config("values", "a sweep needs at least one value"));
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(xs.len());
    for x in xs {
        let cfg = axis.apply(config, x)?;
        let (_, s) = run_scenario(&cfg)?;
        points.push(SweepPoint {
            x_value: x,
            mean_edge_throughput_bps: s.mean_edge_throughput_bps,
            mean_delay_s: s.mean_delay_s,
            jain: s.jain,
            stderr: s.stderr,
            n_drops: s.n_drops,
        });
    }
    Ok(SweepResult {
        axis,
        algorithm: config.algorithm,
        points,
    })
}
