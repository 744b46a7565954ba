//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use comp_sim::affinity::{net_similarity, ApOptions, ApProblem, Preference};
use comp_sim::channel::{compute_channel, ChannelState, LinkBudget};
use comp_sim::power::{TwoUserInstance, UserType};
use comp_sim::topology::{
    in_flat_top_hexagon, BaseStation, BsKind, CellSite, Point, Topology, UserSite,
};
use comp_sim::units::dbm_to_watts;
use ndarray::Array2;
use rand::Rng;

/// 43 dBm.
pub fn p_max_w() -> f64 {
    dbm_to_watts(43.0)
}

/// Uniform point of the flat-top hexagon of circumradius `r` centred at the origin.
pub fn point_in_hexagon<R: Rng>(rng: &mut R, r: f64) -> Point {
    loop {
        let p = Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if in_flat_top_hexagon(&p, r) {
            return p;
        }
    }
}

/// Two adjacent cells: BS 0 at the origin and BS 1 at `sqrt(3) r`. User 0 is
/// dropped in cell 0; user 1 sits next to BS 1 (its cell-centre user).
pub fn two_cell_geometry<R: Rng>(rng: &mut R, r: f64) -> (Topology, ChannelState) {
    let d = 3f64.sqrt() * r;
    let bs = |id: usize, x: f64| BaseStation {
        bs_id: id,
        kind: BsKind::Macro,
        position: Point::new(x, 0.0),
        max_power_w: p_max_w(),
    };
    let cells = vec![
        CellSite {
            id: 0,
            position: Point::new(0.0, 0.0),
            bs_list: vec![bs(0, 0.0)],
        },
        CellSite {
            id: 1,
            position: Point::new(d, 0.0),
            bs_list: vec![bs(1, d)],
        },
    ];
    let mut user0 = point_in_hexagon(rng, r);
    if user0.distance(&Point::new(0.0, 0.0)) < 1.0 {
        user0 = Point::new(1.0, 0.0);
    }
    let users = vec![
        UserSite {
            id: 0,
            position: user0,
            home_cell: 0,
        },
        UserSite {
            id: 1,
            position: Point::new(d + 5.0, 0.0),
            home_cell: 1,
        },
    ];
    let topo = Topology::from_parts(cells, users, r);
    let channel = compute_channel(&topo, &LinkBudget::default());
    (topo, channel)
}

/// A random two-cluster instance with path-loss gains, drawn so that both
/// feasibility intervals are non-empty.
pub fn random_two_user<R: Rng>(rng: &mut R, types: [UserType; 2]) -> TwoUserInstance {
    let budget = LinkBudget::default();
    loop {
        let g = |d: f64| budget.link_gain(d);
        let inst = TwoUserInstance {
            n: rng.gen_range(1..=4),
            g1: g(rng.gen_range(10.0..400.0)),
            g2: g(rng.gen_range(10.0..400.0)),
            g3: g(rng.gen_range(50.0..800.0)),
            g4: g(rng.gen_range(50.0..800.0)),
            sigma2: budget.noise_power_w(),
            p_max: p_max_w() / 15.0,
            p0: dbm_to_watts(-110.0),
            types,
            bandwidth_hz: 3e6,
            n_prb: 15,
            file_size_bits: 100.0 * 8.0 * 1_048_576.0,
        };
        if inst.bounds(1).0 < inst.p_max && inst.bounds(2).0 < inst.p_max {
            return inst;
        }
    }
}

/// Similarities `-|x_i - x_k|^2` of `n` points drawn from two well separated
/// Gaussian-like blobs.
pub fn two_blob_similarity<R: Rng>(rng: &mut R, n: usize) -> Array2<f64> {
    let centres = [
        (0.0, 0.0),
        (rng.gen_range(6.0..10.0), rng.gen_range(-2.0..2.0)),
    ];
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (cx, cy) = centres[i % 2];
            (cx + rng.gen_range(-1.5..1.5), cy + rng.gen_range(-1.5..1.5))
        })
        .collect();
    Array2::from_shape_fn((n, n), |(i, k)| {
        let (dx, dy) = (pts[i].0 - pts[k].0, pts[i].1 - pts[k].1);
        -(dx * dx + dy * dy)
    })
}

pub fn problem(similarity: Array2<f64>, preference: Preference, damping: f64) -> ApProblem {
    let options = ApOptions {
        damping,
        ..ApOptions::default()
    };
    ApProblem::new(similarity, preference, options).expect("valid problem")
}

/// Best assignment over every non-empty exemplar set: each non-exemplar joins
/// its most similar exemplar (lowest index on ties). Returns the assignment
/// and its net similarity.
pub fn exhaustive_optimum(problem: &ApProblem) -> (Vec<usize>, f64) {
    let n = problem.len();
    assert!(n <= 16, "exhaustive search is exponential");
    let s = &problem.similarity;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in 1u32..(1 << n) {
        let exemplars: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let assignment: Vec<usize> = (0..n)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    return i;
                }
                let mut e_best = exemplars[0];
                for &e in &exemplars[1..] {
                    if s[[i, e]] > s[[i, e_best]] {
                        e_best = e;
                    }
                }
                e_best
            })
            .collect();
        let value = net_similarity(problem, &assignment);
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((assignment, value));
        }
    }
    best.expect("n >= 1")
}

/// Fourth-order (five-point) central-difference derivative of `f` at `x`
/// with step `h * |x|`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let dx = h * x.abs().max(1e-300);
    (f(x - 2.0 * dx) - 8.0 * f(x - dx) + 8.0 * f(x + dx) - f(x + 2.0 * dx)) / (12.0 * dx)
}
