//! Affinity-propagation clustering over a dense similarity matrix.
//!
//! Responsibilities and availabilities are exchanged with damping until the
//! exemplar assignment stays unchanged for `stability_window` consecutive
//! iterations or `max_iterations` is reached.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the diagonal of the similarity matrix is filled.
#[derive(Debug, Clone, PartialEq)]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    /// The same value for every node.
    Value(f64),
    /// One value per node.
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApOptions {
    pub damping: f64,
    pub max_iterations: usize,
    pub stability_window: usize,
}

impl Default for ApOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 200,
            stability_window: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApProblem {
    /// Similarity with the preference already written onto the diagonal.
    pub similarity: Array2<f64>,
    pub options: ApOptions,
}

impl ApProblem {
    pub fn new(
        mut similarity: Array2<f64>,
        preference: Preference,
        options: ApOptions,
    ) -> Result<Self> {
        let n = similarity.nrows();
        if n == 0 || similarity.ncols() != n {
            return Err(Error::domain(
                "affinity",
                format!(
                    "similarity must be square and non-empty, got {:?}",
                    similarity.dim()
                ),
            ));
        }
        if !(0.0..1.0).contains(&options.damping) {
            return Err(Error::domain(
                "affinity",
                format!("damping {} not in [0, 1)", options.damping),
            ));
        }
        if options.stability_window == 0 || options.max_iterations == 0 {
            return Err(Error::domain(
                "affinity",
                "stability_window and max_iterations must be >= 1",
            ));
        }
        let prefs = match preference {
            Preference::Median => vec![median_off_diagonal(&similarity); n],
            Preference::Value(v) => vec![v; n],
            Preference::PerNode(v) => {
                if v.len() != n {
                    return Err(Error::domain(
                        "affinity",
                        "preference vector length mismatch",
                    ));
                }
                v
            }
        };
        for (i, p) in prefs.into_iter().enumerate() {
            similarity[[i, i]] = p;
        }
        if similarity.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(
                "affinity",
                "similarity entries must be finite",
            ));
        }
        Ok(Self {
            similarity,
            options,
        })
    }

    pub fn len(&self) -> usize {
        self.similarity.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn preference(&self, i: usize) -> f64 {
        self.similarity[[i, i]]
    }

    /// Copy whose similarities carry a fixed pseudo-random perturbation of
    /// relative size `TIE_BREAK` of the similarity spread. Exactly symmetric
    /// pairs otherwise make the messages oscillate between equivalent
    /// exemplars; the perturbation is deterministic and unaffected by adding a
    /// constant to every similarity.
    pub fn tie_broken(&self) -> ApProblem {
        let (lo, hi) = self
            .similarity
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let scale = TIE_BREAK * (hi - lo);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut out = self.clone();
        if scale > 0.0 {
            out.similarity
                .mapv_inplace(|v| v + scale * rng.gen::<f64>());
        }
        out
    }
}

/// Relative size of the tie-breaking perturbation applied by [`cluster`].
pub const TIE_BREAK: f64 = 1e-10;

/// Median of the off-diagonal entries (the diagonal when `n == 1`).
pub fn median_off_diagonal(s: &Array2<f64>) -> f64 {
    let mut vals: Vec<f64> = s
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return s[[0, 0]];
    }
    vals.sort_by(f64::total_cmp);
    let k = vals.len();
    if k % 2 == 1 {
        vals[k / 2]
    } else {
        0.5 * (vals[k / 2 - 1] + vals[k / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApState {
    pub responsibility: Array2<f64>,
    pub availability: Array2<f64>,
    pub iteration: usize,
}

impl ApState {
    pub fn zeros(n: usize) -> Self {
        Self {
            responsibility: Array2::zeros((n, n)),
            availability: Array2::zeros((n, n)),
            iteration: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.responsibility
            .iter()
            .chain(self.availability.iter())
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    /// Exemplar node ids, ascending.
    pub exemplars: Vec<usize>,
    /// Exemplar of every node.
    pub assignment: Vec<usize>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl ApResult {
    /// Members of the cluster whose exemplar is `e`, ascending, `e` included.
    pub fn members(&self, e: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&m| self.assignment[m] == e)
            .collect()
    }
}

/// Damped responsibility update
/// `R(m,n) = S(m,n) - max_{n' != n} (A(m,n') + S(m,n'))`.
/// With a single node the competitor set is empty and contributes nothing.
pub fn update_responsibility(state: &ApState, problem: &ApProblem) -> Array2<f64> {
    let s = &problem.similarity;
    let a = &state.availability;
    let n = problem.len();
    let lambda = problem.options.damping;
    let mut out = Array2::zeros((n, n));
    for m in 0..n {
        // best and second best of A + S over the row
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut first_idx = usize::MAX;
        for k in 0..n {
            let v = a[[m, k]] + s[[m, k]];
            if v > first {
                second = first;
                first = v;
                first_idx = k;
            } else if v > second {
                second = v;
            }
        }
        for k in 0..n {
            let competitor = if k == first_idx { second } else { first };
            let competitor = if competitor == f64::NEG_INFINITY {
                0.0
            } else {
                competitor
            };
            let fresh = s[[m, k]] - competitor;
            out[[m, k]] = lambda * state.responsibility[[m, k]] + (1.0 - lambda) * fresh;
        }
    }
    out
}

/// Damped availability update from the current responsibilities:
/// `A(m,n) = min(0, R(n,n) + sum_{m' not in {m,n}} max(0, R(m',n)))` off the diagonal and
/// `A(n,n) = sum_{m' != n} max(0, R(m',n))` on it.
pub fn update_availability(state: &ApState, problem: &ApProblem) -> Array2<f64> {
    let r = &state.responsibility;
    let n = problem.len();
    let lambda = problem.options.damping;
    let mut out = Array2::zeros((n, n));
    for k in 0..n {
        let col_pos: f64 = (0..n).filter(|&i| i != k).map(|i| r[[i, k]].max(0.0)).sum();
        for i in 0..n {
            let fresh = if i == k {
                col_pos
            } else {
                (r[[k, k]] + col_pos - r[[i, k]].max(0.0)).min(0.0)
            };
            out[[i, k]] = lambda * state.availability[[i, k]] + (1.0 - lambda) * fresh;
        }
    }
    out
}

/// Runs message passing to completion.
pub fn cluster(problem: &ApProblem) -> ApResult {
    cluster_observed(problem, |_| {})
}

/// As [`cluster`], calling `observe` with the state after every iteration.
///
/// Iteration stops once the extracted assignment has been unchanged for
/// `stability_window` consecutive iterations while at least one node has
/// positive self-evidence `A(k,k) + R(k,k)` (a single node is always
/// decided). Before that the messages still
/// carry their all-zero initial state and an unchanged assignment means
/// nothing.
pub fn cluster_observed<F: FnMut(&ApState)>(problem: &ApProblem, mut observe: F) -> ApResult {
    let problem = &problem.tie_broken();
    let opts = problem.options;
    let mut state = ApState::zeros(problem.len());
    let mut last: Option<Vec<usize>> = None;
    let mut stable = 0;
    let mut converged = false;
    let (mut exemplars, mut assignment) = (Vec::new(), Vec::new());

    while state.iteration < opts.max_iterations {
        state.responsibility = update_responsibility(&state, problem);
        state.availability = update_availability(&state, problem);
        state.iteration += 1;
        observe(&state);

        (exemplars, assignment) = extract_assignment(problem, &state);
        let decided = problem.len() == 1 || !exemplar_set(&state).is_empty();
        if decided && last.as_ref() == Some(&assignment) {
            stable += 1;
        } else {
            stable = 1;
        }
        last = decided.then(|| assignment.clone());
        if decided && stable >= opts.stability_window {
            converged = true;
            break;
        }
    }

    ApResult {
        exemplars,
        assignment,
        converged,
        iterations_run: state.iteration,
    }
}

/// Nodes whose self-evidence `A(k,k) + R(k,k)` is positive, ascending.
pub fn exemplar_set(state: &ApState) -> Vec<usize> {
    let n = state.responsibility.nrows();
    (0..n)
        .filter(|&k| state.availability[[k, k]] + state.responsibility[[k, k]] > 0.0)
        .collect()
}

/// Exemplars are the nodes with positive self-evidence (the single node with
/// the largest self-evidence if there is none). Every other node joins the
/// exemplar maximising `A(m,e) + R(m,e)`, lowest index on ties.
pub fn extract_assignment(problem: &ApProblem, state: &ApState) -> (Vec<usize>, Vec<usize>) {
    let n = problem.len();
    let score = &state.availability + &state.responsibility;
    let mut exemplars = exemplar_set(state);
    if exemplars.is_empty() {
        exemplars.push(argmax((0..n).map(|k| score[[k, k]])));
    }
    let assignment = (0..n)
        .map(|m| {
            if exemplars.binary_search(&m).is_ok() {
                m
            } else {
                exemplars[argmax(exemplars.iter().map(|&e| score[[m, e]]))]
            }
        })
        .collect();
    (exemplars, assignment)
}

/// Index of the maximum, lowest index on ties.
fn argmax<I: Iterator<Item = f64>>(it: I) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in it.enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Net similarity of an assignment: preferences of exemplars plus each
/// member's similarity to its exemplar.
pub fn net_similarity(problem: &ApProblem, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(m, &e)| problem.similarity[[m, e]])
        .sum()
}
