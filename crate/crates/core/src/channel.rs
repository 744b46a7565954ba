//! Deterministic link budget: distance path loss plus a fixed antenna gain.
//! No shadowing or fading, so gains depend on positions only.

use ndarray::Array2;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::topology::{Point, Topology};
use crate::units::{db_to_linear, dbm_to_watts};

/// Links shorter than this are evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Path loss in dB for a link of `d_m` metres: `148.1 + 37.6 log10(d_km)`.
pub fn path_loss_db(d_m: f64) -> Result<f64> {
    if !(d_m >= MIN_DISTANCE_M) {
        return Err(Error::domain(
            "path_loss_db",
            format!("distance {d_m} m is below the {MIN_DISTANCE_M} m floor"),
        ));
    }
    Ok(148.1 + 37.6 * (d_m / 1000.0).log10())
}

/// Link-budget constants shared by every link of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Applied once per link, on the transmit side.
    pub antenna_gain_db: f64,
    pub bandwidth_hz: f64,
    pub n_prb: usize,
    pub noise_psd_dbm_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            antenna_gain_db: 5.0,
            bandwidth_hz: 3.0e6,
            n_prb: 15,
            noise_psd_dbm_hz: -174.0,
        }
    }
}

impl From<&ScenarioConfig> for LinkBudget {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            antenna_gain_db: c.antenna_gain_db,
            bandwidth_hz: c.bandwidth_hz,
            n_prb: c.n_prb,
            noise_psd_dbm_hz: c.noise_psd_dbm_hz,
        }
    }
}

impl LinkBudget {
    /// Thermal noise over one PRB (bandwidth `B/R`), in watts.
    pub fn noise_power_w(&self) -> f64 {
        let prb_bw = self.bandwidth_hz / self.n_prb as f64;
        dbm_to_watts(self.noise_psd_dbm_hz + 10.0 * prb_bw.log10())
    }

    /// Linear power gain of a link of length `d_m` (floored at 1 m).
    pub fn link_gain(&self, d_m: f64) -> f64 {
        let pl = path_loss_db(d_m.max(MIN_DISTANCE_M)).expect("distance floored");
        db_to_linear(self.antenna_gain_db - pl)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// Linear power gain, `[n_bs, n_users]`.
    pub gain: Array2<f64>,
    /// Received power in watts at each BS's maximum transmit power, `[n_bs, n_users]`.
    pub rsrp: Array2<f64>,
    /// Noise power per PRB in watts.
    pub noise_power: f64,
    /// Maximum transmit power per BS in watts.
    pub p_max: Vec<f64>,
}

pub fn compute_channel(topology: &Topology, budget: &LinkBudget) -> ChannelState {
    let bss = topology.base_stations();
    let positions: Vec<Point> = topology.users.iter().map(|u| u.position).collect();
    let gain = Array2::from_shape_fn((bss.len(), positions.len()), |(j, m)| {
        budget.link_gain(bss[j].position.distance(&positions[m]))
    });
    let p_max: Vec<f64> = bss.iter().map(|b| b.max_power_w).collect();
    ChannelState::from_gains(gain, p_max, budget.noise_power_w())
}

impl ChannelState {
    pub fn from_gains(gain: Array2<f64>, p_max: Vec<f64>, noise_power: f64) -> Self {
        assert_eq!(gain.nrows(), p_max.len(), "one p_max per BS row");
        let mut rsrp = gain.clone();
        for (mut row, p) in rsrp.rows_mut().into_iter().zip(&p_max) {
            row.mapv_inplace(|g| g * p);
        }
        Self {
            gain,
            rsrp,
            noise_power,
            p_max,
        }
    }

    pub fn n_bs(&self) -> usize {
        self.gain.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.gain.ncols()
    }

    /// BS ids sorted by decreasing RSRP at `user` (lowest id first on ties).
    pub fn ranked_bss(&self, user: usize) -> Vec<usize> {
        let col = self.rsrp.column(user);
        let mut ids: Vec<usize> = (0..self.n_bs()).collect();
        ids.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
        ids
    }

    /// Strongest BS at `user`.
    pub fn serving_bs(&self, user: usize) -> usize {
        let col = self.rsrp.column(user);
        let mut best = 0;
        for j in 1..col.len() {
            if col[j] > col[best] {
                best = j;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Deployment;
    use crate::topology::{BaseStation, BsKind, CellSite, LayoutParams, UserSite};
    use crate::units::{linear_to_db, watts_to_dbm};

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1000.0).unwrap() - 148.1).abs() < 1e-12);
        assert!((path_loss_db(100.0).unwrap() - 110.5).abs() < 1e-9);
        assert!((path_loss_db(10_000.0).unwrap() - 185.7).abs() < 1e-9);
    }

    #[test]
    fn path_loss_rejects_short_links() {
        assert!(path_loss_db(0.5).is_err());
        assert!(path_loss_db(0.0).is_err());
        assert!(path_loss_db(f64::NAN).is_err());
        assert!(path_loss_db(1.0).is_ok());
    }

    #[test]
    fn noise_per_prb() {
        let n = LinkBudget::default().noise_power_w();
        // -174 + 10 log10(200 kHz) = -120.99 dBm
        let expected = -174.0 + 10.0 * 200_000f64.log10();
        assert!((watts_to_dbm(n) - expected).abs() < 1e-9);
        assert!((expected + 121.0).abs() < 0.02);
    }

    #[test]
    fn doubling_distance_drops_gain() {
        let b = LinkBudget::default();
        let drop = linear_to_db(b.link_gain(100.0)) - linear_to_db(b.link_gain(200.0));
        assert!((drop - 37.6 * 2f64.log10()).abs() < 1e-9);
        assert!((drop - 11.32).abs() < 0.01);
    }

    fn two_bs_one_user() -> Topology {
        let bs = |id, x| BaseStation {
            bs_id: id,
            kind: BsKind::Macro,
            position: Point::new(x, 0.0),
            max_power_w: 20.0,
        };
        Topology::from_parts(
            vec![
                CellSite {
                    id: 0,
                    position: Point::new(0.0, 0.0),
                    bs_list: vec![bs(0, 0.0)],
                },
                CellSite {
                    id: 1,
                    position: Point::new(100.0, 0.0),
                    bs_list: vec![bs(1, 100.0)],
                },
            ],
            vec![UserSite {
                id: 0,
                position: Point::new(50.0, 30.0),
                home_cell: 0,
            }],
            60.0,
        )
    }

    #[test]
    fn equidistant_bss_give_equal_gain() {
        let ch = compute_channel(&two_bs_one_user(), &LinkBudget::default());
        assert_eq!(ch.gain[[0, 0]], ch.gain[[1, 0]]);
        assert_eq!(ch.ranked_bss(0), vec![0, 1]);
    }

    #[test]
    fn rsrp_is_power_times_gain() {
        let p = LayoutParams {
            deployment: Deployment::Nsa,
            n_cells: 7,
            cell_radius_m: 100.0,
            users_per_cell: 20,
            small_bs_per_cell: 3,
            macro_small_distance_m: 40.0,
            max_power_w: dbm_to_watts(43.0),
        };
        let t = Topology::build(&p, 5).unwrap();
        let ch = compute_channel(&t, &LinkBudget::default());
        for ((j, m), g) in ch.gain.indexed_iter() {
            assert!(g.is_finite() && *g > 0.0);
            assert_eq!(ch.rsrp[[j, m]], ch.p_max[j] * g);
        }
    }

    #[test]
    fn gain_decreases_with_distance() {
        let b = LinkBudget::default();
        let mut prev = f64::INFINITY;
        for d in [1.0, 2.0, 10.0, 55.5, 100.0, 1e3, 1e4] {
            let g = b.link_gain(d);
            assert!(g < prev);
            prev = g;
        }
        // the 1 m floor
        assert_eq!(b.link_gain(0.0), b.link_gain(1.0));
    }
}
