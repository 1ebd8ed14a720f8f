//! Allocation of a quality-improvement budget `b` between `p1` and `p2`.
//!
//! Under `b < 1 - p2` the optimum is one of two strategies: put the whole
//! budget on `p2` (concentrate), or raise both qualities to
//! `(p1 + p2 + b) / 2` (equalize) and collect the jump of the correct-cascade
//! probability at the symmetric point. [`grid_search`] is an exhaustive
//! oracle for that claim; [`monotonicity_check`] probes the one-sided and
//! spread monotonicity it rests on.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{pcc, symmetric_pcc, PccMode, DEFAULT_SERIES_TOL};
use crate::error::{CascadeError, Result};
use crate::model::SignalQualities;

/// Distance from `1` at which capped strategies stop raising a quality.
pub const EPSILON_CAP: f64 = 1e-6;
/// Slack for floating round-off in budget and feasibility comparisons.
const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetProblem {
    pub p1: f64,
    pub p2: f64,
    pub budget: f64,
    /// The caller passed `p1 > p2`; the problem is stored swapped.
    pub swapped: bool,
}

impl BudgetProblem {
    pub fn new(p1: f64, p2: f64, budget: f64) -> Result<Self> {
        let q = SignalQualities::new(p1, p2)?;
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(CascadeError::InvalidArgument(format!("budget must be >= 0, got {budget}")));
        }
        let (canon, swapped) = q.canonical();
        Ok(Self {
            p1: canon.p1(),
            p2: canon.p2(),
            budget,
            swapped,
        })
    }

    /// `b < 1 - p2`: the regime where the two-strategy result applies.
    pub fn in_theorem_regime(&self) -> bool {
        self.budget < 1.0 - self.p2
    }

    /// Equalizing needs `c2 = (p1 + b - p2) / 2 >= 0` and a common quality
    /// strictly below one.
    pub fn equalize_feasible(&self) -> bool {
        self.budget >= self.p2 - self.p1 - SLACK && self.equalized_quality() < 1.0
    }

    pub fn equalized_quality(&self) -> f64 {
        0.5 * (self.p1 + self.p2 + self.budget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Concentrate,
    Equalize,
    /// Raise `p2` to `1 - EPSILON_CAP`, spend the rest on `p1`.
    CapP2ThenP1,
    /// Raise `p1` to `1 - EPSILON_CAP`, spend the rest on `p2`.
    CapP1ThenP2,
    Grid,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Concentrate => "concentrate",
            Strategy::Equalize => "equalize",
            Strategy::CapP2ThenP1 => "cap_p2_then_p1",
            Strategy::CapP1ThenP2 => "cap_p1_then_p2",
            Strategy::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub strategy: Strategy,
    pub c1: f64,
    pub c2: f64,
    pub p1: f64,
    pub p2: f64,
    pub pcc: f64,
    pub mode: PccMode,
}

impl Allocation {
    fn evaluate(strategy: Strategy, prob: &BudgetProblem, c1: f64, c2: f64) -> Result<Self> {
        let q = SignalQualities::new(prob.p1 + c1, prob.p2 + c2)?;
        Ok(Self {
            strategy,
            c1,
            c2,
            p1: q.p1(),
            p2: q.p2(),
            pcc: pcc(&q, PccMode::Auto, DEFAULT_SERIES_TOL)?.pcc,
            mode: PccMode::Auto,
        })
    }

    /// Nonnegative improvements within budget; neither quality reaches one.
    pub fn is_feasible(&self, prob: &BudgetProblem) -> bool {
        self.c1 >= 0.0
            && self.c2 >= 0.0
            && self.c1 + self.c2 <= prob.budget + SLACK
            && self.p1 < 1.0
            && self.p2 < 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationDecision {
    pub problem: BudgetProblem,
    pub candidates: Vec<Allocation>,
    pub chosen: Strategy,
    /// Set when capped strategies were considered.
    pub epsilon_cap: Option<f64>,
    pub verified_by_grid: Option<bool>,
    pub grid_best: Option<Allocation>,
}

impl AllocationDecision {
    pub fn chosen_allocation(&self) -> &Allocation {
        self.candidate(self.chosen).expect("chosen strategy is a candidate")
    }

    pub fn candidate(&self, strategy: Strategy) -> Option<&Allocation> {
        self.candidates.iter().find(|c| c.strategy == strategy)
    }

    /// Runs [`grid_search`] and records whether its maximum stays within
    /// `1e-9` of the chosen value.
    pub fn verify(&mut self, step: f64) -> Result<()> {
        let best = grid_search(&self.problem, step)?;
        self.verified_by_grid = Some(best.pcc <= self.chosen_allocation().pcc + 1e-9);
        self.grid_best = Some(best);
        Ok(())
    }
}

/// Whole budget on `p2`.
pub fn strategy_concentrate(prob: &BudgetProblem) -> Result<Allocation> {
    if !prob.in_theorem_regime() {
        return Err(CascadeError::RegimeViolation {
            budget: prob.budget,
            limit: 1.0 - prob.p2,
        });
    }
    Allocation::evaluate(Strategy::Concentrate, prob, 0.0, prob.budget)
}

/// Both qualities raised to `(p1 + p2 + b) / 2`, evaluated with the
/// symmetric closed form.
pub fn strategy_equalize(prob: &BudgetProblem) -> Result<Allocation> {
    if !prob.equalize_feasible() {
        return Err(CascadeError::InfeasibleEqualize {
            budget: prob.budget,
            spread: prob.p2 - prob.p1,
        });
    }
    let p = prob.equalized_quality();
    let c1 = p - prob.p1;
    let c2 = (p - prob.p2).max(0.0);
    Ok(Allocation {
        strategy: Strategy::Equalize,
        c1,
        c2,
        p1: p,
        p2: p,
        pcc: symmetric_pcc(p),
        mode: PccMode::Rational,
    })
}

fn capped(prob: &BudgetProblem, strategy: Strategy) -> Result<Allocation> {
    let ceiling = 1.0 - EPSILON_CAP;
    let (c1, c2) = match strategy {
        Strategy::CapP2ThenP1 => {
            let c2 = (ceiling - prob.p2).max(0.0).min(prob.budget);
            let c1 = (prob.budget - c2).min((ceiling - prob.p1).max(0.0));
            (c1, c2)
        }
        Strategy::CapP1ThenP2 => {
            let c1 = (ceiling - prob.p1).max(0.0).min(prob.budget);
            let c2 = (prob.budget - c1).min((ceiling - prob.p2).max(0.0));
            (c1, c2)
        }
        other => unreachable!("{other:?} is not capped"),
    };
    Allocation::evaluate(strategy, prob, c1, c2)
}

/// Evaluates the candidate strategies and picks the best.
pub fn optimize(prob: &BudgetProblem) -> Result<AllocationDecision> {
    let mut candidates = Vec::new();
    let mut epsilon_cap = None;
    if prob.in_theorem_regime() {
        candidates.push(strategy_concentrate(prob)?);
    } else {
        epsilon_cap = Some(EPSILON_CAP);
        candidates.push(capped(prob, Strategy::CapP2ThenP1)?);
        if prob.budget >= 1.0 - prob.p1 {
            candidates.push(capped(prob, Strategy::CapP1ThenP2)?);
        }
    }
    if prob.equalize_feasible() {
        candidates.push(strategy_equalize(prob)?);
    }
    let chosen = candidates
        .iter()
        .fold(None::<&Allocation>, |best, c| match best {
            Some(b) if b.pcc >= c.pcc => Some(b),
            _ => Some(c),
        })
        .expect("at least one candidate")
        .strategy;
    Ok(AllocationDecision {
        problem: *prob,
        candidates,
        chosen,
        epsilon_cap,
        verified_by_grid: None,
        grid_best: None,
    })
}

/// Exhaustive maximum of `pcc(p1 + c1, p2 + c2)` over the lattice
/// `c = (i, j) * step` with `c1 + c2 <= b`, plus the concentrate corner and
/// the equalize point when they are feasible.
pub fn grid_search(prob: &BudgetProblem, step: f64) -> Result<Allocation> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CascadeError::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let n = (prob.budget / step + 1e-9).floor() as u64;
    let mut points: Vec<(f64, f64)> = (0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| (i as f64 * step, j as f64 * step)))
        .map(|(c1, c2)| (c1, c2.min(prob.budget - c1).max(0.0)))
        .filter(|&(c1, c2)| prob.p1 + c1 < 1.0 && prob.p2 + c2 < 1.0)
        .collect();
    if prob.p2 + prob.budget < 1.0 {
        points.push((0.0, prob.budget));
    }
    let mut best = points
        .par_iter()
        .map(|&(c1, c2)| Allocation::evaluate(Strategy::Grid, prob, c1, c2))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(None::<Allocation>, |best, a| match best {
            Some(b) if b.pcc >= a.pcc => Some(b),
            _ => Some(a),
        })
        .expect("lattice contains the origin");
    if prob.equalize_feasible() {
        let eq = strategy_equalize(prob)?;
        if eq.pcc > best.pcc {
            best = Allocation {
                strategy: Strategy::Grid,
                ..eq
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `(p1, p2 + c)` on `1/2 < p1 < p2 + c < 1`.
    P2Sweep,
    /// `(p1 + c, p2)` on `1/2 < p1 + c < p2 < 1`.
    P1Sweep,
    /// `(p - c, p + c)` with `p = (p1 + p2) / 2`, on `1/2 < p - c < p + c < 1`.
    SpreadSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub kind: SweepKind,
    pub points: usize,
    /// Largest drop between adjacent points (0 if none).
    pub max_decrease: f64,
    /// Largest `|delta pcc|` between adjacent points.
    pub max_jump: f64,
    pub jump_limit: f64,
    pub passed: bool,
}

/// Sweeps `c` from `c_from` to `c_to` (inclusive, up to rounding) and checks
/// that the irrational-series `pcc` never drops by more than `1e-9` plus
/// the truncation bounds, and never jumps by more than `10 * step`.
pub fn monotonicity_check(
    kind: SweepKind,
    base: &SignalQualities,
    c_from: f64,
    c_to: f64,
    step: f64,
) -> Result<MonotonicityReport> {
    if !(step > 0.0 && c_to >= c_from) {
        return Err(CascadeError::InvalidArgument(format!(
            "need step > 0 and c_to >= c_from, got step {step} over [{c_from}, {c_to}]"
        )));
    }
    let count = ((c_to - c_from) / step + 1e-9).floor() as usize + 1;
    let mid = 0.5 * (base.p1() + base.p2());
    let pairs = (0..count)
        .map(|i| {
            let c = c_from + i as f64 * step;
            let (p1, p2) = match kind {
                SweepKind::P2Sweep => (base.p1(), base.p2() + c),
                SweepKind::P1Sweep => (base.p1() + c, base.p2()),
                SweepKind::SpreadSweep => (mid - c, mid + c),
            };
            if 0.5 < p1 && p1 < p2 && p2 < 1.0 {
                Ok((p1, p2))
            } else {
                Err(CascadeError::DomainViolation {
                    c,
                    detail: format!("qualities ({p1}, {p2}) violate 1/2 < p1 < p2 < 1"),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let values = pairs
        .par_iter()
        .map(|&(p1, p2)| {
            let r = pcc(&SignalQualities::new(p1, p2)?, PccMode::Irrational, DEFAULT_SERIES_TOL)?;
            Ok((r.pcc, r.tail_bound.unwrap_or(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;

    let jump_limit = 10.0 * step;
    let mut max_decrease: f64 = 0.0;
    let mut max_jump: f64 = 0.0;
    let mut passed = true;
    for w in values.windows(2) {
        let ((a, ta), (b, tb)) = (w[0], w[1]);
        let delta = b - a;
        max_decrease = max_decrease.max(-delta);
        max_jump = max_jump.max(delta.abs());
        if -delta > 1e-9 + ta + tb {
            passed = false;
        }
    }
    passed &= max_jump <= jump_limit;
    Ok(MonotonicityReport {
        kind,
        points: values.len(),
        max_decrease,
        max_jump,
        jump_limit,
        passed,
    })
}
