//! End-to-end properties of topology → channel → scheduling → power → metrics.

use comp_sim::channel::{compute_channel, path_loss_db, LinkBudget};
use comp_sim::config::rings_for_cells;
use comp_sim::export::{read_csv, sweep_rows, write_csv, SweepRow};
use comp_sim::metrics::{delay, jain, rate};
use comp_sim::power::{check_constraints, multi_user_power};
use comp_sim::scheduling::{fixed_size_clusters, select_edge_users, Role};
use comp_sim::sim::{run_drop, run_drops, run_sweep, simulate_drop, SweepAxis};
use comp_sim::topology::{build_topology, in_flat_top_hexagon, Point};
use comp_sim::{Algorithm, Deployment, Load, ScenarioConfig};
use proptest::prelude::*;

fn small(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n_cells: 7,
        users_per_cell: 20,
        edge_users_per_cell: 3,
        n_drops: 3,
        seed,
        ..ScenarioConfig::default()
    }
}

#[test]
fn same_seed_gives_bit_identical_reports() {
    for algorithm in Algorithm::ALL {
        let cfg = ScenarioConfig {
            algorithm,
            ..small(7)
        };
        assert_eq!(run_drop(&cfg, 2).unwrap(), run_drop(&cfg, 2).unwrap());
    }
}

#[test]
fn parallel_drops_equal_sequential_drops_in_order() {
    let cfg = small(9);
    let par = run_drops(&cfg).unwrap();
    for (i, d) in par.iter().enumerate() {
        assert_eq!(d.drop_index, i as u64);
        assert_eq!(d.report, run_drop(&cfg, i as u64).unwrap());
    }
}

#[test]
fn no_comp_with_one_user_per_cell_serves_each_user_from_its_strongest_bs_at_full_power() {
    let cfg = ScenarioConfig {
        algorithm: Algorithm::NoComp,
        users_per_cell: 1,
        edge_margin_db: 1000.0,
        load: Load::EdgeOnly,
        ..ScenarioConfig::default()
    };
    let d = simulate_drop(&cfg, 0).unwrap();
    for (prb, s) in d.assignment.edge_entries() {
        assert_eq!(s.cbs, vec![d.channel.serving_bs(s.user_id)]);
        let per_prb = d.power.get(prb, s.cbs[0]);
        // the BS splits p_max over the PRBs it is active on
        let active = (0..d.power.n_prb())
            .filter(|&b| d.power.get(b, s.cbs[0]) > 0.0)
            .count();
        assert!((per_prb * active as f64 - d.channel.p_max[s.cbs[0]]).abs() < 1e-9);
    }
}

#[test]
fn common_comp_of_size_one_equals_no_comp() {
    let base = ScenarioConfig {
        n_drops: 4,
        ..ScenarioConfig::default()
    };
    let common = run_sweep(
        &ScenarioConfig {
            algorithm: Algorithm::CommonComp,
            ..base.clone()
        },
        SweepAxis::ClusterSize,
        &[1.0],
    )
    .unwrap();
    let none = run_sweep(
        &ScenarioConfig {
            algorithm: Algorithm::NoComp,
            ..base
        },
        SweepAxis::ClusterSize,
        &[1.0],
    )
    .unwrap();
    assert_eq!(common.points, none.points);
}

#[test]
fn ap_comp_beats_no_comp_at_50_m() {
    let base = ScenarioConfig {
        cell_radius_m: 50.0,
        n_drops: 20,
        ..ScenarioConfig::default()
    };
    let ap = run_drops(&ScenarioConfig {
        algorithm: Algorithm::ApComp,
        ..base.clone()
    })
    .unwrap();
    let none = run_drops(&ScenarioConfig {
        algorithm: Algorithm::NoComp,
        ..base
    })
    .unwrap();
    let mean = |d: &[comp_sim::sim::DropOutcome]| {
        d.iter()
            .map(|o| o.report.mean_edge_throughput_bps)
            .sum::<f64>()
            / d.len() as f64
    };
    assert!(mean(&ap) > mean(&none), "{} vs {}", mean(&ap), mean(&none));
}

#[test]
fn sweep_points_are_sorted_and_export_round_trips() {
    let cfg = ScenarioConfig {
        algorithm: Algorithm::CommonComp,
        ..small(3)
    };
    let r = run_sweep(&cfg, SweepAxis::ClusterSize, &[3.0, 1.0, 2.0]).unwrap();
    let xs: Vec<f64> = r.points.iter().map(|p| p.x_value).collect();
    assert_eq!(xs, vec![1.0, 2.0, 3.0]);
    assert!(r.points.iter().all(|p| p.n_drops == 3));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let rows = sweep_rows(&[r]);
    write_csv(&path, &rows).unwrap();
    let back: Vec<SweepRow> = read_csv(&path).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn invalid_sweep_values_are_rejected() {
    let cfg = small(1);
    assert!(run_sweep(&cfg, SweepAxis::ClusterSize, &[]).is_err());
    assert!(run_sweep(&cfg, SweepAxis::ClusterSize, &[1.5]).is_err());
    assert!(run_sweep(&cfg, SweepAxis::Damping, &[1.0]).is_err());
    assert!(run_sweep(&cfg, SweepAxis::CellRadius, &[10.0]).is_err());
}

#[test]
fn metric_examples() {
    assert!((delay(8e5, 8e8) - 1000.0).abs() < 1e-9);
    assert_eq!(delay(2.0 * 8e5, 8e8), delay(8e5, 8e8) / 2.0);
    assert!((rate(1.0, 3e6, 15) - 2e5).abs() < 1e-9);
    assert_eq!(jain(&[5.0, 0.0]).unwrap(), 0.5);
    assert!(jain(&[0.0, 0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn users_stay_inside_their_home_hexagon(seed in any::<u64>(), radius in 50.0f64..500.0, nsa in any::<bool>()) {
        let cfg = ScenarioConfig {
            deployment: if nsa { Deployment::Nsa } else { Deployment::Sa },
            cell_radius_m: radius,
            users_per_cell: 15,
            seed,
            ..ScenarioConfig::default()
        };
        let topo = build_topology(&cfg).unwrap();
        prop_assert_eq!(topo.cells.len(), 19);
        prop_assert_eq!(rings_for_cells(topo.cells.len()), Some(2));
        for u in &topo.users {
            let c = topo.cells[u.home_cell].position;
            let rel = Point::new(u.position.x - c.x, u.position.y - c.y);
            prop_assert!(in_flat_top_hexagon(&rel, radius * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn path_loss_is_increasing(d1 in 1.0f64..5000.0, d2 in 1.0f64..5000.0) {
        prop_assume!(d1 < d2);
        prop_assert!(path_loss_db(d1).unwrap() < path_loss_db(d2).unwrap());
    }

    #[test]
    fn drops_satisfy_scheduling_and_power_invariants(
        seed in any::<u64>(),
        algorithm in prop::sample::select(Algorithm::ALL.to_vec()),
        size in 1usize..7,
        nsa in any::<bool>(),
        full in any::<bool>(),
    ) {
        let cfg = ScenarioConfig {
            algorithm,
            cluster_size: size,
            deployment: if nsa { Deployment::Nsa } else { Deployment::Sa },
            cell_radius_m: if nsa { 200.0 } else { 50.0 },
            load: if full { Load::FullBuffer } else { Load::EdgeOnly },
            ..small(seed)
        };
        let d = simulate_drop(&cfg, 0).unwrap();
        d.assignment.check_disjoint().unwrap();
        for (_, s) in d.assignment.entries() {
            prop_assert!(s.cbs.contains(&s.serving_bs));
            prop_assert!(s.cbs.windows(2).all(|w| w[0] < w[1]));
            if s.role == Role::Edge {
                prop_assert!(d.edge.contains(s.user_id));
            }
        }
        let report = check_constraints(&d.power, &d.assignment, &d.channel, 0.0).unwrap();
        prop_assert!(report.c1_ok && report.c3_ok);
        for u in &d.report.per_user {
            prop_assert!(u.sinr > 0.0 && u.rate_bps > 0.0);
            prop_assert_eq!(u.delay_s, cfg.file_size_bits() / u.rate_bps);
        }
        let sum: f64 = d.report.per_user.iter().map(|u| u.rate_bps).sum();
        prop_assert!((sum - d.report.sum_edge_throughput_bps).abs() <= 1e-9 * sum);
        prop_assert!(d.report.jain_index > 0.0 && d.report.jain_index <= 1.0);
    }

    #[test]
    fn max_power_rule_exhausts_each_active_budget(seed in any::<u64>(), size in 1usize..5) {
        let cfg = small(seed);
        let topo = build_topology(&cfg).unwrap();
        let channel = compute_channel(&topo, &LinkBudget::from(&cfg));
        let edge = select_edge_users(&channel, &topo, cfg.edge_margin_db, cfg.edge_users_per_cell).unwrap();
        prop_assume!(!edge.is_empty());
        let assignment = fixed_size_clusters(&channel, &edge, size, cfg.n_prb).unwrap();
        let power = multi_user_power(&assignment, &channel);
        for j in 0..power.n_bs() {
            let total = power.bs_total(j);
            prop_assert!(total == 0.0 || (total - channel.p_max[j]).abs() <= 1e-9 * channel.p_max[j]);
        }
    }

    #[test]
    fn jain_is_scale_invariant_and_bounded(rates in prop::collection::vec(0.0f64..1e7, 1..40), scale in 1e-3f64..1e3) {
        prop_assume!(rates.iter().any(|&r| r > 0.0));
        let j = jain(&rates).unwrap();
        let scaled: Vec<f64> = rates.iter().map(|r| r * scale).collect();
        prop_assert!(j > 0.0 && j <= 1.0);
        prop_assert!(j >= 1.0 / rates.len() as f64 - 1e-12);
        prop_assert!((j - jain(&scaled).unwrap()).abs() < 1e-12);
    }
}
