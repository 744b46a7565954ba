//! Edge-user selection, BS similarity, cooperating-set formation and PRB placement.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::affinity::{self, ApOptions, ApProblem, ApResult, Preference};
use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::topology::Topology;
use crate::units::{linear_to_db, watts_to_dbm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeUser {
    pub user_id: usize,
    pub home_cell: usize,
    pub serving_bs: usize,
    pub rsrp_best: f64,
    pub rsrp_second: f64,
}

impl EdgeUser {
    /// Best-minus-second RSRP in dB.
    pub fn margin_db(&self) -> f64 {
        linear_to_db(self.rsrp_best / self.rsrp_second)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeUserSet {
    /// Ordered by home cell, then margin, then user id.
    pub users: Vec<EdgeUser>,
}

impl EdgeUserSet {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, user_id: usize) -> bool {
        self.users.iter().any(|u| u.user_id == user_id)
    }

    /// Splits the set so each BS serves at most one edge user per round: the
    /// k-th smallest-margin user of every BS lands in round k.
    pub fn rounds(&self) -> Vec<EdgeUserSet> {
        let mut by_bs: BTreeMap<usize, Vec<&EdgeUser>> = BTreeMap::new();
        for u in &self.users {
            by_bs.entry(u.serving_bs).or_default().push(u);
        }
        let mut rounds: Vec<EdgeUserSet> = Vec::new();
        for users in by_bs.values_mut() {
            users.sort_by(|a, b| margin_order(a, b));
            for (k, u) in users.iter().enumerate() {
                if rounds.len() <= k {
                    rounds.push(EdgeUserSet::default());
                }
                rounds[k].users.push((*u).clone());
            }
        }
        rounds
    }
}

fn margin_order(a: &EdgeUser, b: &EdgeUser) -> std::cmp::Ordering {
    a.margin_db()
        .total_cmp(&b.margin_db())
        .then(a.user_id.cmp(&b.user_id))
}

/// Selects users whose best and second-best RSRP differ by less than
/// `margin_db`, keeping at most `per_cell` of them per home cell (smallest
/// margin first, lowest id on ties).
pub fn select_edge_users(
    channel: &ChannelState,
    topology: &Topology,
    margin_db: f64,
    per_cell: usize,
) -> Result<EdgeUserSet> {
    if !(margin_db > 0.0) {
        return Err(Error::domain(
            "select_edge_users",
            "margin_db must be positive",
        ));
    }
    let mut per_home: BTreeMap<usize, Vec<EdgeUser>> = BTreeMap::new();
    if channel.n_bs() < 2 {
        return Ok(EdgeUserSet::default());
    }
    for u in &topology.users {
        let col = channel.rsrp.column(u.id);
        let (mut best, mut second) = (0usize, usize::MAX);
        for j in 1..col.len() {
            if col[j] > col[best] {
                second = best;
                best = j;
            } else if second == usize::MAX || col[j] > col[second] {
                second = j;
            }
        }
        let cand = EdgeUser {
            user_id: u.id,
            home_cell: u.home_cell,
            serving_bs: best,
            rsrp_best: col[best],
            rsrp_second: col[second],
        };
        if cand.margin_db() < margin_db {
            per_home.entry(u.home_cell).or_default().push(cand);
        }
    }
    let mut users = Vec::new();
    for mut cands in per_home.into_values() {
        cands.sort_by(margin_order);
        cands.truncate(per_cell);
        users.extend(cands);
    }
    Ok(EdgeUserSet { users })
}

/// Affinity-propagation settings for BS clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct ApSettings {
    pub preference: Preference,
    pub options: ApOptions,
}

impl Default for ApSettings {
    fn default() -> Self {
        Self {
            preference: Preference::Median,
            options: ApOptions::default(),
        }
    }
}

/// A BS-level AP problem: node `i` is BS `bs_ids[i]`, whose associated edge user is `user_ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BsSimilarity {
    pub problem: ApProblem,
    pub bs_ids: Vec<usize>,
    pub user_ids: Vec<usize>,
}

/// Builds `S(m, n)` = RSRP in dBm from BS `m` at the edge user associated with
/// BS `n`. Only BSs serving an edge user take part; a BS with several edge
/// users is represented by its smallest-margin one.
pub fn build_similarity(
    channel: &ChannelState,
    edge: &EdgeUserSet,
    settings: &ApSettings,
) -> Result<BsSimilarity> {
    if edge.is_empty() {
        return Err(Error::NoEdgeUsers);
    }
    let mut assoc: BTreeMap<usize, &EdgeUser> = BTreeMap::new();
    for u in &edge.users {
        assoc
            .entry(u.serving_bs)
            .and_modify(|cur| {
                if margin_order(u, cur).is_lt() {
                    *cur = u;
                }
            })
            .or_insert(u);
    }
    let bs_ids: Vec<usize> = assoc.keys().copied().collect();
    let user_ids: Vec<usize> = assoc.values().map(|u| u.user_id).collect();
    let n = bs_ids.len();
    let s = Array2::from_shape_fn((n, n), |(m, k)| {
        watts_to_dbm(channel.rsrp[[bs_ids[m], user_ids[k]]])
    });
    let problem = ApProblem::new(s, settings.preference.clone(), settings.options)?;
    Ok(BsSimilarity {
        problem,
        bs_ids,
        user_ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// A scheduled edge user served by a cooperating set.
    Edge,
    /// A cell-centre user filling an otherwise idle BS/PRB slot.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledUser {
    pub user_id: usize,
    pub serving_bs: usize,
    /// Cooperating BS set, ascending, always containing `serving_bs`.
    pub cbs: Vec<usize>,
    pub role: Role,
}

/// A cooperating set waiting for a PRB.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub user_id: usize,
    pub serving_bs: usize,
    pub cbs: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub per_prb: Vec<Vec<ScheduledUser>>,
    /// Edge users that could not be placed on any PRB.
    pub unscheduled: Vec<usize>,
    /// Serving BSs kept although their RSRP is below the pruning threshold.
    pub serving_exceptions: usize,
    pub warnings: Vec<String>,
}

impl ClusterAssignment {
    pub fn empty(n_prb: usize) -> Self {
        Self {
            per_prb: vec![Vec::new(); n_prb],
            ..Default::default()
        }
    }

    pub fn n_prb(&self) -> usize {
        self.per_prb.len()
    }

    pub fn find(&self, prb: usize, user_id: usize) -> Option<&ScheduledUser> {
        self.per_prb.get(prb)?.iter().find(|s| s.user_id == user_id)
    }

    /// `(prb, entry)` for every scheduled edge user.
    pub fn edge_entries(&self) -> impl Iterator<Item = (usize, &ScheduledUser)> {
        self.entries().filter(|(_, s)| s.role == Role::Edge)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &ScheduledUser)> {
        self.per_prb
            .iter()
            .enumerate()
            .flat_map(|(b, v)| v.iter().map(move |s| (b, s)))
    }

    pub fn is_busy(&self, prb: usize, bs: usize) -> bool {
        self.per_prb[prb].iter().any(|s| s.cbs.contains(&bs))
    }

    /// Checks per-PRB disjointness and non-empty sets.
    pub fn check_disjoint(&self) -> Result<()> {
        for (b, users) in self.per_prb.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for s in users {
                if s.cbs.is_empty() || !s.cbs.contains(&s.serving_bs) {
                    return Err(Error::domain(
                        "cluster_assignment",
                        format!("user {} on PRB {b} has an invalid CBS", s.user_id),
                    ));
                }
                for &j in &s.cbs {
                    if !seen.insert(j) {
                        return Err(Error::domain(
                            "cluster_assignment",
                            format!("BS {j} serves two users on PRB {b}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Places clusters round-robin: each goes to the first PRB, starting after
    /// the previous placement, on which none of its BSs is busy.
    pub fn place_round_robin(&mut self, clusters: Vec<Cluster>) {
        let r = self.n_prb();
        let mut next = 0;
        for c in clusters {
            let slot = (0..r)
                .map(|k| (next + k) % r)
                .find(|&b| c.cbs.iter().all(|&j| !self.is_busy(b, j)));
            match slot {
                Some(b) => {
                    self.per_prb[b].push(ScheduledUser {
                        user_id: c.user_id,
                        serving_bs: c.serving_bs,
                        cbs: c.cbs,
                        role: Role::Edge,
                    });
                    next = (b + 1) % r;
                }
                None => {
                    self.warnings.push(format!(
                        "edge user {} left unscheduled: no PRB with a free CBS",
                        c.user_id
                    ));
                    self.unscheduled.push(c.user_id);
                }
            }
        }
    }

    /// Gives every BS that is idle on a PRB one of its own non-edge users,
    /// cycling through them in id order (full-buffer traffic, reuse 1).
    pub fn fill_idle_with_center_users(&mut self, channel: &ChannelState, edge: &EdgeUserSet) {
        let mut own: Vec<Vec<usize>> = vec![Vec::new(); channel.n_bs()];
        for m in 0..channel.n_users() {
            if !edge.contains(m) {
                own[channel.serving_bs(m)].push(m);
            }
        }
        let mut cursor = vec![0usize; channel.n_bs()];
        for b in 0..self.n_prb() {
            for j in 0..channel.n_bs() {
                if own[j].is_empty() || self.is_busy(b, j) {
                    continue;
                }
                let m = own[j][cursor[j] % own[j].len()];
                cursor[j] += 1;
                self.per_prb[b].push(ScheduledUser {
                    user_id: m,
                    serving_bs: j,
                    cbs: vec![j],
                    role: Role::Center,
                });
            }
        }
    }
}

/// Outcome of AP-based cluster formation, with per-round AP diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ApClustering {
    pub assignment: ClusterAssignment,
    pub rounds: Vec<ApResult>,
}

/// Clusters the BSs with affinity propagation and turns every cluster into a
/// cooperating set for the edge user of its exemplar BS.
///
/// Members whose RSRP at that user is below `p0_w` are pruned; the exemplar
/// (the user's serving BS) always stays.
pub fn form_clusters(
    channel: &ChannelState,
    edge: &EdgeUserSet,
    p0_w: f64,
    settings: &ApSettings,
    n_prb: usize,
) -> Result<ApClustering> {
    if edge.is_empty() {
        return Err(Error::NoEdgeUsers);
    }
    let mut out = ClusterAssignment::empty(n_prb);
    let mut clusters = Vec::new();
    let mut results = Vec::new();
    for round in edge.rounds() {
        let sim = build_similarity(channel, &round, settings)?;
        let res = affinity::cluster(&sim.problem);
        if !res.converged {
            out.warnings.push(format!(
                "affinity propagation stopped after {} iterations without converging",
                res.iterations_run
            ));
        }
        for &e in &res.exemplars {
            let user = sim.user_ids[e];
            let serving = sim.bs_ids[e];
            let members: Vec<usize> = res.members(e).into_iter().map(|i| sim.bs_ids[i]).collect();
            let mut cbs: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&j| j == serving || channel.rsrp[[j, user]] >= p0_w)
                .collect();
            cbs.sort_unstable();
            if channel.rsrp[[serving, user]] < p0_w {
                out.serving_exceptions += 1;
                out.warnings.push(format!(
                    "cluster of user {user} pruned to its serving BS {serving}, which is itself below p0"
                ));
            }
            clusters.push(Cluster {
                user_id: user,
                serving_bs: serving,
                cbs,
            });
        }
        results.push(res);
    }
    out.place_round_robin(clusters);
    Ok(ApClustering {
        assignment: out,
        rounds: results,
    })
}

/// Common-CoMP baseline: every edge user is served by its `size` strongest BSs.
pub fn fixed_size_clusters(
    channel: &ChannelState,
    edge: &EdgeUserSet,
    size: usize,
    n_prb: usize,
) -> Result<ClusterAssignment> {
    if size == 0 {
        return Err(Error::domain(
            "fixed_size_clusters",
            "cluster size must be at least 1",
        ));
    }
    let mut out = ClusterAssignment::empty(n_prb);
    let size = if size > channel.n_bs() {
        out.warnings.push(format!(
            "cluster size {size} exceeds the {} available BSs; capped",
            channel.n_bs()
        ));
        channel.n_bs()
    } else {
        size
    };
    let clusters = edge
        .users
        .iter()
        .map(|u| {
            let ranked = channel.ranked_bss(u.user_id);
            let mut cbs = ranked[..size].to_vec();
            cbs.sort_unstable();
            Cluster {
                user_id: u.user_id,
                serving_bs: ranked[0],
                cbs,
            }
        })
        .collect();
    out.place_round_robin(clusters);
    Ok(out)
}
