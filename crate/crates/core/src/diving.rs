//! Indicator diving: repeatedly fix one indicator binary (or round one
//! fractional integer) and resolve the LP until an integer feasible point
//! appears.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, Basis, LpData, LpStatus};
use crate::model::{check_feasible, Problem, Solution, Tolerances};
use crate::propagate::propagate_bounds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiveError {
    #[error("activation threshold must be positive, got {0}")]
    NonPositiveActivation(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiveConfig {
    pub max_depth: usize,
    pub lp_iter_limit: usize,
    pub backtrack: bool,
}

impl Default for DiveConfig {
    fn default() -> Self {
        DiveConfig {
            max_depth: 100,
            lp_iter_limit: 50_000,
            backtrack: true,
        }
    }
}

/// Diving score of a semicontinuous variable with value `xhat`, activation
/// threshold `l` and upper bound `u`.
pub fn indicator_score(xhat: f64, l: f64, u: f64) -> Result<f64, DiveError> {
    if !(l > 0.0) {
        return Err(DiveError::NonPositiveActivation(l));
    }
    if xhat <= 0.0 || xhat > u || (xhat >= l && xhat <= u) {
        Ok(-1.0)
    } else {
        Ok(100.0 * (l - xhat) / l)
    }
}

/// A violated indicator whose binary is integral and unfixed at the LP point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorCandidate {
    pub binvar: usize,
    pub xhat: f64,
    pub activation: f64,
    pub upper: f64,
}

/// A tentative bound change made by the dive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fixing {
    /// Fix a binary to `value`.
    Fix { var: usize, value: f64 },
    /// Impose `x <= bound`.
    Down { var: usize, bound: f64 },
    /// Impose `x >= bound`.
    Up { var: usize, bound: f64 },
}

impl Fixing {
    pub fn flipped(self) -> Fixing {
        match self {
            Fixing::Fix { var, value } => Fixing::Fix {
                var,
                value: 1.0 - value,
            },
            Fixing::Down { var, bound } => Fixing::Up {
                var,
                bound: bound + 1.0,
            },
            Fixing::Up { var, bound } => Fixing::Down {
                var,
                bound: bound - 1.0,
            },
        }
    }

    fn apply(self, lower: &mut [f64], upper: &mut [f64]) {
        match self {
            Fixing::Fix { var, value } => {
                lower[var] = value;
                upper[var] = value;
            }
            Fixing::Down { var, bound } => upper[var] = upper[var].min(bound),
            Fixing::Up { var, bound } => lower[var] = lower[var].max(bound),
        }
    }
}

/// Picks the candidate with the largest score (ties to the smallest binary)
/// and fixes it to one iff `xhat >= 0.5 ℓ`.
pub fn choose_and_fix(cands: &[IndicatorCandidate]) -> Result<Option<Fixing>, DiveError> {
    let mut best: Option<(IndicatorCandidate, f64)> = None;
    for c in cands {
        let s = indicator_score(c.xhat, c.activation, c.upper)?;
        let better = match best {
            None => true,
            Some((b, bs)) => s > bs || (s == bs && c.binvar < b.binvar),
        };
        if better {
            best = Some((*c, s));
        }
    }
    Ok(best.map(|(c, _)| Fixing::Fix {
        var: c.binvar,
        value: if c.xhat >= 0.5 * c.activation { 1.0 } else { 0.0 },
    }))
}

/// Rounds the fractional integer with the largest `|c_j|` (ties to the
/// smallest index) in the direction that improves the objective.
fn fallback_rounding(p: &Problem, x: &[f64], tol: &Tolerances) -> Option<Fixing> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..p.num_vars() {
        if !p.integer[j] || (x[j] - x[j].round()).abs() <= tol.int {
            continue;
        }
        let w = p.objective[j].abs();
        if best.is_none_or(|(_, b)| w > b) {
            best = Some((j, w));
        }
    }
    let (j, _) = best?;
    let c = p.objective[j];
    let up = if c != 0.0 {
        c < 0.0
    } else {
        x[j] - x[j].floor() >= 0.5
    };
    Some(if up {
        Fixing::Up {
            var: j,
            bound: x[j].ceil(),
        }
    } else {
        Fixing::Down {
            var: j,
            bound: x[j].floor(),
        }
    })
}

fn indicator_candidates(p: &Problem, x: &[f64], lower: &[f64], upper: &[f64], tol: &Tolerances) -> Vec<IndicatorCandidate> {
    p.indicators
        .iter()
        .filter(|ind| {
            let z = x[ind.binvar];
            lower[ind.binvar] < upper[ind.binvar] && z.abs() <= tol.int && x[ind.var] > tol.feas
        })
        .map(|ind| IndicatorCandidate {
            binvar: ind.binvar,
            xhat: x[ind.var],
            activation: ind.activation,
            upper: upper[ind.var],
        })
        .collect()
}

/// Integer-rounded copy of `x` if it satisfies every constraint.
fn as_solution(p: &Problem, x: &[f64], tol: &Tolerances) -> Option<Solution> {
    let values: Vec<f64> = (0..p.num_vars())
        .map(|j| if p.integer[j] { x[j].round() } else { x[j] })
        .collect();
    let s = Solution {
        objective: p.objective_value(&values),
        values,
    };
    check_feasible(p, &s, tol).is_feasible().then_some(s)
}

struct Probe {
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Basis,
}

fn probe(p: &Problem, lp: &LpData, lower: &[f64], upper: &[f64], fix: Fixing, warm: &Basis, cfg: &DiveConfig) -> Option<Probe> {
    let (mut lo, mut up) = (lower.to_vec(), upper.to_vec());
    fix.apply(&mut lo, &mut up);
    propagate_bounds(p, &mut lo, &mut up).ok()?;
    let mut data = lp.clone();
    data.col_lower.clone_from(&lo);
    data.col_upper.clone_from(&up);
    let res = solve_lp(&data, Some(warm), cfg.lp_iter_limit).ok()?;
    (res.status == LpStatus::Optimal).then_some(Probe {
        lower: lo,
        upper: up,
        x: res.x,
        basis: res.basis,
    })
}

/// Outcome of a dive.
#[derive(Clone, Debug, PartialEq)]
pub struct DiveResult {
    pub solution: Option<Solution>,
    pub depth: usize,
    pub fixings: Vec<Fixing>,
}

/// Dives from an optimal LP point `x` with basis `basis` of `lp` (whose
/// column bounds are the starting bounds). Each step prefers an indicator
/// fixing and otherwise rounds a fractional integer; an infeasible step is
/// retried once with the opposite decision before the dive gives up.
pub fn dive(p: &Problem, lp: &LpData, x: &[f64], basis: &Basis, cfg: &DiveConfig) -> Result<DiveResult, DiveError> {
    let tol = Tolerances::default();
    let mut state = Probe {
        lower: lp.col_lower.clone(),
        upper: lp.col_upper.clone(),
        x: x.to_vec(),
        basis: basis.clone(),
    };
    let mut fixings = Vec::new();
    for depth in 0..=cfg.max_depth {
        let cands = indicator_candidates(p, &state.x, &state.lower, &state.upper, &tol);
        let fix = match choose_and_fix(&cands)? {
            Some(f) => f,
            None => match fallback_rounding(p, &state.x, &tol) {
                Some(f) => f,
                None => {
                    return Ok(DiveResult {
                        solution: as_solution(p, &state.x, &tol),
                        depth,
                        fixings,
                    })
                }
            },
        };
        if depth == cfg.max_depth {
            break;
        }
        let next = probe(p, lp, &state.lower, &state.upper, fix, &state.basis, cfg);
        let next = match next {
            Some(s) => {
                fixings.push(fix);
                s
            }
            None if cfg.backtrack => {
                let flip = fix.flipped();
                match probe(p, lp, &state.lower, &state.upper, flip, &state.basis, cfg) {
                    Some(s) => {
                        fixings.push(flip);
                        s
                    }
                    None => break,
                }
            }
            None => break,
        };
        state = next;
    }
    Ok(DiveResult {
        solution: None,
        depth: fixings.len(),
        fixings,
    })
}
