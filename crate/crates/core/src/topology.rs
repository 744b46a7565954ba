//! Hexagonal cell layouts and uniform user drops.
//!
//! Cells are flat-top hexagons of circumradius `cell_radius`, arranged in
//! concentric rings around a centre cell, so adjacent centres sit
//! `sqrt(3) * cell_radius` apart. Users are dropped uniformly inside their
//! home hexagon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{rings_for_cells, Deployment, ScenarioConfig};
use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsKind {
    Macro,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub bs_id: usize,
    pub kind: BsKind,
    pub position: Point,
    pub max_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub id: usize,
    pub position: Point,
    pub bs_list: Vec<BaseStation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSite {
    pub id: usize,
    pub position: Point,
    pub home_cell: usize,
}

/// Geometry inputs of [`Topology::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub deployment: Deployment,
    pub n_cells: usize,
    pub cell_radius_m: f64,
    pub users_per_cell: usize,
    pub small_bs_per_cell: usize,
    pub macro_small_distance_m: f64,
    pub max_power_w: f64,
}

impl From<&ScenarioConfig> for LayoutParams {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            deployment: c.deployment,
            n_cells: c.n_cells,
            cell_radius_m: c.cell_radius_m,
            users_per_cell: c.users_per_cell,
            small_bs_per_cell: c.small_bs_per_cell,
            macro_small_distance_m: c.macro_small_distance_m,
            max_power_w: dbm_to_watts(c.bs_max_power_dbm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Topology {
    pub cells: Vec<CellSite>,
    pub users: Vec<UserSite>,
    pub cell_radius: f64,
    pub seed: u64,
    /// All BSs indexed by `bs_id`.
    #[serde(skip)]
    base_stations: Vec<BaseStation>,
}

/// Builds the layout described by `config`, dropping users with `config.seed`.
pub fn build_topology(config: &ScenarioConfig) -> Result<Topology> {
    config.validate()?;
    Topology::build(&LayoutParams::from(config), config.seed)
}

impl Topology {
    pub fn build(params: &LayoutParams, seed: u64) -> Result<Self> {
        let rings = rings_for_cells(params.n_cells).ok_or_else(|| {
            Error::config(
                "n_cells",
                format!("{} is not a hexagonal ring count", params.n_cells),
            )
        })?;
        if !(params.cell_radius_m > 0.0) {
            return Err(Error::config("cell_radius_m", "must be positive"));
        }
        if params.users_per_cell == 0 {
            return Err(Error::config("users_per_cell", "must be at least 1"));
        }

        let radius = params.cell_radius_m;
        let mut cells = Vec::with_capacity(params.n_cells);
        let mut next_bs = 0;
        for (id, (q, r)) in hex_cells(rings).into_iter().enumerate() {
            let centre = axial_to_xy(q, r, radius);
            let mut bs_list = vec![BaseStation {
                bs_id: next_bs,
                kind: BsKind::Macro,
                position: centre,
                max_power_w: params.max_power_w,
            }];
            next_bs += 1;
            if params.deployment == Deployment::Nsa {
                let k = params.small_bs_per_cell;
                for i in 0..k {
                    let theta = std::f64::consts::TAU * i as f64 / k as f64;
                    bs_list.push(BaseStation {
                        bs_id: next_bs,
                        kind: BsKind::Small,
                        position: Point::new(
                            centre.x + params.macro_small_distance_m * theta.cos(),
                            centre.y + params.macro_small_distance_m * theta.sin(),
                        ),
                        max_power_w: params.max_power_w,
                    });
                    next_bs += 1;
                }
            }
            cells.push(CellSite {
                id,
                position: centre,
                bs_list,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut users = Vec::with_capacity(params.n_cells * params.users_per_cell);
        for cell in &cells {
            for _ in 0..params.users_per_cell {
                let offset = sample_in_hexagon(&mut rng, radius);
                users.push(UserSite {
                    id: users.len(),
                    position: Point::new(cell.position.x + offset.x, cell.position.y + offset.y),
                    home_cell: cell.id,
                });
            }
        }

        let mut topo = Topology {
            cells,
            users,
            cell_radius: radius,
            seed,
            base_stations: Vec::new(),
        };
        topo.reindex();
        Ok(topo)
    }

    /// Assembles a topology from explicit sites (hand-built test geometries).
    /// BS ids must be `0..n` in cell order.
    pub fn from_parts(cells: Vec<CellSite>, users: Vec<UserSite>, cell_radius: f64) -> Self {
        let mut topo = Topology {
            cells,
            users,
            cell_radius,
            seed: 0,
            base_stations: Vec::new(),
        };
        topo.reindex();
        topo
    }

    fn reindex(&mut self) {
        let mut all: Vec<BaseStation> = self
            .cells
            .iter()
            .flat_map(|c| c.bs_list.iter().cloned())
            .collect();
        all.sort_by_key(|b| b.bs_id);
        debug_assert!(all.iter().enumerate().all(|(i, b)| b.bs_id == i));
        self.base_stations = all;
    }

    pub fn base_stations(&self) -> &[BaseStation] {
        &self.base_stations
    }

    pub fn n_bs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn cell_of_bs(&self, bs_id: usize) -> usize {
        self.cells
            .iter()
            .find(|c| c.bs_list.iter().any(|b| b.bs_id == bs_id))
            .map(|c| c.id)
            .expect("bs id belongs to a cell")
    }

    /// Index of the cell whose hexagon contains `p` (nearest centre).
    pub fn cell_containing(&self, p: &Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in &self.cells {
            let d = c.position.distance(p);
            if d < best_d {
                best_d = d;
                best = c.id;
            }
        }
        best
    }
}

/// Axial coordinates of every cell within `rings` of the origin, centre first,
/// then ring by ring.
fn hex_cells(rings: usize) -> Vec<(i64, i64)> {
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let mut out = vec![(0, 0)];
    for k in 1..=rings as i64 {
        // start at direction 4 scaled by k, walk the six sides
        let (mut q, mut r) = (DIRS[4].0 * k, DIRS[4].1 * k);
        for dir in DIRS {
            for _ in 0..k {
                out.push((q, r));
                q += dir.0;
                r += dir.1;
            }
        }
    }
    out
}

fn axial_to_xy(q: i64, r: i64, radius: f64) -> Point {
    Point::new(
        radius * 1.5 * q as f64,
        radius * SQRT3 * (r as f64 + q as f64 / 2.0),
    )
}

/// True when `p` (relative to the centre) lies in the flat-top hexagon of circumradius `radius`.
pub fn in_flat_top_hexagon(p: &Point, radius: f64) -> bool {
    let (x, y) = (p.x.abs(), p.y.abs());
    y <= SQRT3 / 2.0 * radius && SQRT3 * x + y <= SQRT3 * radius
}

fn sample_in_hexagon<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let half_h = SQRT3 / 2.0 * radius;
    loop {
        let p = Point::new(
            rng.gen_range(-radius..=radius),
            rng.gen_range(-half_h..=half_h),
        );
        if in_flat_top_hexagon(&p, radius) {
            return p;
        }
    }
}
