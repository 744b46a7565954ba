use serde::{Deserialize, Serialize};

use super::{UserKind, UserType};
use crate::error::{Error, Result};

/// Two clusters of `n` BSs each, every BS of a cluster at the same power.
///
/// Cluster 1 serves user 1 with per-BS gain `g1` and leaks onto user 2 with
/// `g4`; cluster 2 serves user 2 with `g2` and leaks onto user 1 with `g3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoUserInstance {
    pub n: usize,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub sigma2: f64,
    pub p_max: f64,
    pub p0: f64,
    pub types: [UserType; 2],
    pub bandwidth_hz: f64,
    pub n_prb: usize,
    pub file_size_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCase {
    /// Both users of the same type: both clusters at the upper bound.
    SameType,
    /// User 1 high, user 2 low: cluster 2 backs off to `sigma2 / (n g3)`.
    HighLow,
    /// User 1 low, user 2 high: cluster 1 backs off to `sigma2 / (n g4)`.
    LowHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoUserSolution {
    pub p1: f64,
    pub p2: f64,
    pub case: PowerCase,
    /// True when the closed-form powers had to be moved into the C2/C3 box.
    pub clamped: bool,
}

impl TwoUserInstance {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("g3", self.g3),
            ("g4", self.g4),
            ("sigma2", self.sigma2),
            ("p_max", self.p_max),
            ("bandwidth_hz", self.bandwidth_hz),
            ("file_size_bits", self.file_size_bits),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "two_user_instance",
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if self.n == 0 || self.n_prb == 0 {
            return Err(Error::domain(
                "two_user_instance",
                "n and n_prb must be >= 1",
            ));
        }
        if !(self.p0 >= 0.0) {
            return Err(Error::domain("two_user_instance", "p0 must be >= 0"));
        }
        Ok(())
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.types[0].weight, self.types[1].weight)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn sinr1(&self, p1: f64, p2: f64) -> f64 {
        let n = self.nf();
        n * p1 * self.g1 / (n * p2 * self.g3 + self.sigma2)
    }

    pub fn sinr2(&self, p1: f64, p2: f64) -> f64 {
        let n = self.nf();
        n * p2 * self.g2 / (n * p1 * self.g4 + self.sigma2)
    }

    /// Weighted bargaining product of the two SINRs.
    pub fn f1(&self, p1: f64, p2: f64) -> f64 {
        let (w1, w2) = self.weights();
        self.sinr1(p1, p2).powf(w1) * self.sinr2(p1, p2).powf(w2)
    }

    /// `ln F1`.
    pub fn f2(&self, p1: f64, p2: f64) -> f64 {
        let (w1, w2) = self.weights();
        w1 * self.sinr1(p1, p2).ln() + w2 * self.sinr2(p1, p2).ln()
    }

    /// Exponent `B / (R M ln 2)` of the delay factor.
    pub fn delay_exponent(&self) -> f64 {
        self.bandwidth_hz / (self.n_prb as f64 * self.file_size_bits * std::f64::consts::LN_2)
    }

    /// Bargaining product of the delay-aware utilities.
    pub fn u1(&self, p1: f64, p2: f64) -> f64 {
        let (w1, w2) = self.weights();
        let a = self.delay_exponent();
        let t = |s: f64| s * (1.0 + s).powf(a);
        t(self.sinr1(p1, p2)).powf(w1) * t(self.sinr2(p1, p2)).powf(w2)
    }

    /// Analytic gradient of `F2`.
    pub fn grad_f2(&self, p1: f64, p2: f64) -> (f64, f64) {
        let (w1, w2) = self.weights();
        let n = self.nf();
        let s2 = self.sigma2;
        (
            w1 / p1 - n * self.g4 * w2 / (n * p1 * self.g4 + s2),
            w2 / p2 - n * self.g3 * w1 / (n * p2 * self.g3 + s2),
        )
    }

    /// Feasible power interval `[p0 / g_serving, p_max]` of user 1 or 2.
    pub fn bounds(&self, user: usize) -> (f64, f64) {
        let g = if user == 1 { self.g1 } else { self.g2 };
        (self.p0 / g, self.p_max)
    }

    fn checked_bounds(&self, user: usize) -> Result<(f64, f64)> {
        let (lo, hi) = self.bounds(user);
        if lo > hi {
            return Err(Error::Infeasible {
                user,
                lower_w: lo,
                upper_w: hi,
            });
        }
        Ok((lo, hi))
    }

    pub fn case(&self) -> PowerCase {
        match (self.types[0].kind, self.types[1].kind) {
            (UserKind::High, UserKind::Low) => PowerCase::HighLow,
            (UserKind::Low, UserKind::High) => PowerCase::LowHigh,
            _ => PowerCase::SameType,
        }
    }
}

/// Closed-form bargaining powers of the two clusters.
pub fn two_user_nbs_power(inst: &TwoUserInstance) -> Result<TwoUserSolution> {
    inst.validate()?;
    let (lo1, hi1) = inst.checked_bounds(1)?;
    let (lo2, hi2) = inst.checked_bounds(2)?;
    let n = inst.n as f64;
    let case = inst.case();
    let (p1, p2) = match case {
        PowerCase::SameType => (inst.p_max, inst.p_max),
        PowerCase::HighLow => (inst.p_max, inst.sigma2 / (n * inst.g3)),
        PowerCase::LowHigh => (inst.sigma2 / (n * inst.g4), inst.p_max),
    };
    let c1 = p1.clamp(lo1, hi1);
    let c2 = p2.clamp(lo2, hi2);
    Ok(TwoUserSolution {
        p1: c1,
        p2: c2,
        case,
        clamped: c1 != p1 || c2 != p2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Weighted product of SINRs.
    F1,
    /// Weighted product of delay-aware utilities.
    U1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub p1: f64,
    pub p2: f64,
    pub value: f64,
    pub step1: f64,
    pub step2: f64,
}

/// Exhaustive search of `objective` on a `grid x grid` uniform lattice over
/// the feasible box. Ties go to the lowest indices.
pub fn grid_oracle(
    inst: &TwoUserInstance,
    grid: usize,
    objective: Objective,
) -> Result<GridOptimum> {
    inst.validate()?;
    if grid < 10 {
        return Err(Error::domain(
            "grid_oracle",
            format!("grid must be >= 10, got {grid}"),
        ));
    }
    let (lo1, hi1) = inst.checked_bounds(1)?;
    let (lo2, hi2) = inst.checked_bounds(2)?;
    let step1 = (hi1 - lo1) / (grid - 1) as f64;
    let step2 = (hi2 - lo2) / (grid - 1) as f64;
    let eval = |p1: f64, p2: f64| match objective {
        Objective::F1 => inst.f1(p1, p2),
        Objective::U1 => inst.u1(p1, p2),
    };
    let mut best = GridOptimum {
        p1: lo1,
        p2: lo2,
        value: f64::NEG_INFINITY,
        step1,
        step2,
    };
    for i in 0..grid {
        let p1 = lo1 + step1 * i as f64;
        for j in 0..grid {
            let p2 = lo2 + step2 * j as f64;
            let v = eval(p1, p2);
            if v > best.value {
                best.value = v;
                best.p1 = p1;
                best.p2 = p2;
            }
        }
    }
    Ok(best)
}

/// Second-order terms of `F2`; the mixed partial is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    /// `d2 F2 / dp1^2`.
    pub a: f64,
    /// `d2 F2 / dp2^2`.
    pub c: f64,
    /// `A C - B^2 > 0` with `B = 0`.
    pub det_ok: bool,
    pub a_neg: bool,
}

pub fn hessian_conditions(inst: &TwoUserInstance, p1: f64, p2: f64) -> HessianReport {
    let (w1, w2) = inst.weights();
    let n = inst.n as f64;
    let s2 = inst.sigma2;
    let a = -w1 / (p1 * p1) + n * n * inst.g4 * inst.g4 * w2 / (n * p1 * inst.g4 + s2).powi(2);
    let c = w1 * n * n * inst.g3 * inst.g3 / (n * p2 * inst.g3 + s2).powi(2) - w2 / (p2 * p2);
    HessianReport {
        a,
        c,
        det_ok: a * c > 0.0,
        a_neg: a < 0.0,
    }
}

/// Interference condition of the mixed-type cases: `n g3 p2 < (1 + sqrt 2) sigma2`
/// when user 1 is high and user 2 low, `n g4 p1 < (1 + sqrt 2) sigma2` in the
/// opposite case. `None` for same-type pairs.
pub fn mixed_type_condition(inst: &TwoUserInstance, p1: f64, p2: f64) -> Option<bool> {
    let n = inst.n as f64;
    let bound = (1.0 + std::f64::consts::SQRT_2) * inst.sigma2;
    match inst.case() {
        PowerCase::SameType => None,
        PowerCase::HighLow => Some(n * inst.g3 * p2 < bound),
        PowerCase::LowHigh => Some(n * inst.g4 * p1 < bound),
    }
}
