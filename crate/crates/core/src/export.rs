//! File outputs consumed by the plotting scripts.
//!
//! Schemas (all CSV files have a header row):
//!
//! * `metrics.csv` — one row per scheduled edge user and drop:
//!   `algorithm, drop, user_id, prb, cbs_size, sinr, sinr_db, rate_bps, delay_s`
//!   (`delay_s` is `inf` for a zero rate).
//! * `sweep.csv` — one row per algorithm and sweep value:
//!   `axis, x, algorithm, mean_throughput_bps, mean_delay_s, jain, stderr, n_drops`.
//! * `power.csv` — one row per PRB and base station: `prb, bs_id, watts, dbm`
//!   (`dbm` is `-inf` for a silent BS).
//! * `clusters.json` — a [`ClusterSnapshot`]: BS and user positions plus every
//!   scheduled user with its PRB, role and cooperating BS ids.
//! * `summary.json` — per-algorithm [`Summary`] records.
//! * `resolved_config.json` — the fully defaulted [`ScenarioConfig`].

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ScenarioConfig};
use crate::error::Result;
use crate::power::PowerAllocation;
use crate::scheduling::Role;
use crate::sim::{DropOutcome, Summary, SweepAxis, SweepResult};
use crate::topology::{BsKind, Point};
use crate::units::{linear_to_db, watts_to_dbm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub algorithm: Algorithm,
    pub drop: u64,
    pub user_id: usize,
    pub prb: usize,
    pub cbs_size: usize,
    pub sinr: f64,
    pub sinr_db: f64,
    pub rate_bps: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub x: f64,
    pub algorithm: Algorithm,
    pub mean_throughput_bps: f64,
    pub mean_delay_s: f64,
    pub jain: f64,
    pub stderr: f64,
    pub n_drops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub prb: usize,
    pub bs_id: usize,
    pub watts: f64,
    pub dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsRecord {
    pub bs_id: usize,
    pub cell: usize,
    pub kind: BsKind,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: usize,
    pub home_cell: usize,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub user_id: usize,
    pub prb: usize,
    pub role: Role,
    pub serving_bs: usize,
    pub bs_ids: Vec<usize>,
}

/// One drop's layout and cooperating sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSnapshot {
    pub algorithm: Algorithm,
    pub drop: u64,
    pub cell_radius_m: f64,
    pub base_stations: Vec<BsRecord>,
    pub users: Vec<UserRecord>,
    pub edge_user_ids: Vec<usize>,
    pub clusters: Vec<ClusterRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub summary: Summary,
}

pub fn metrics_rows(algorithm: Algorithm, drops: &[DropOutcome]) -> Vec<MetricsRow> {
    drops
        .iter()
        .flat_map(|d| {
            d.report.per_user.iter().map(move |u| MetricsRow {
                algorithm,
                drop: d.drop_index,
                user_id: u.user_id,
                prb: u.prb,
                cbs_size: u.cbs_size,
                sinr: u.sinr,
                sinr_db: linear_to_db(u.sinr),
                rate_bps: u.rate_bps,
                delay_s: u.delay_s,
            })
        })
        .collect()
}

pub fn sweep_rows(results: &[SweepResult]) -> Vec<SweepRow> {
    results
        .iter()
        .flat_map(|r| {
            r.points.iter().map(move |p| SweepRow {
                axis: r.axis,
                x: p.x_value,
                algorithm: r.algorithm,
                mean_throughput_bps: p.mean_edge_throughput_bps,
                mean_delay_s: p.mean_delay_s,
                jain: p.jain,
                stderr: p.stderr,
                n_drops: p.n_drops,
            })
        })
        .collect()
}

pub fn power_rows(power: &PowerAllocation) -> Vec<PowerRow> {
    let mut rows = Vec::with_capacity(power.n_prb() * power.n_bs());
    for prb in 0..power.n_prb() {
        for bs_id in 0..power.n_bs() {
            let watts = power.get(prb, bs_id);
            rows.push(PowerRow {
                prb,
                bs_id,
                watts,
                dbm: watts_to_dbm(watts),
            });
        }
    }
    rows
}

pub fn cluster_snapshot(algorithm: Algorithm, drop: &DropOutcome) -> ClusterSnapshot {
    let topo = &drop.topology;
    ClusterSnapshot {
        algorithm,
        drop: drop.drop_index,
        cell_radius_m: topo.cell_radius,
        base_stations: topo
            .base_stations()
            .iter()
            .map(|b| BsRecord {
                bs_id: b.bs_id,
                cell: topo.cell_of_bs(b.bs_id),
                kind: b.kind,
                position: b.position,
            })
            .collect(),
        users: topo
            .users
            .iter()
            .map(|u| UserRecord {
                user_id: u.id,
                home_cell: u.home_cell,
                position: u.position,
            })
            .collect(),
        edge_user_ids: drop.edge.users.iter().map(|e| e.user_id).collect(),
        clusters: drop
            .assignment
            .entries()
            .map(|(prb, s)| ClusterRecord {
                user_id: s.user_id,
                prb,
                role: s.role,
                serving_bs: s.serving_bs,
                bs_ids: s.cbs.clone(),
            })
            .collect(),
    }
}

/// Writes `rows` as CSV with a header derived from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Writes `value` as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

pub fn write_resolved_config(path: &Path, config: &ScenarioConfig) -> Result<()> {
    write_json(path, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SweepPoint;

    #[test]
    fn sweep_csv_round_trips_with_documented_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let result = SweepResult {
            axis: SweepAxis::ClusterSize,
            algorithm: Algorithm::CommonComp,
            points: vec![SweepPoint {
                x_value: 2.0,
                mean_edge_throughput_bps: 1.5e5,
                mean_delay_s: 5000.0,
                jain: 0.8,
                stderr: 1e3,
                n_drops: 20,
            }],
        };
        let rows = sweep_rows(&[result]);
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "axis,x,algorithm,mean_throughput_bps,mean_delay_s,jain,stderr,n_drops"
        );
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("cluster_size,2.0,common_comp,"));
        let back: Vec<SweepRow> = read_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn power_rows_cover_every_prb_and_bs() {
        let mut p = PowerAllocation::zeros(2, 3);
        p.set(1, 2, 1.0);
        let rows = power_rows(&p);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[5].dbm, 30.0);
        assert_eq!(rows[0].dbm, f64::NEG_INFINITY);
    }
}
