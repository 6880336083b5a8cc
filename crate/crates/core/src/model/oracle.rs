//! Exhaustive reference optimizer for tiny instances.

use thiserror::Error;

use super::{check_feasible, Problem, Solution, Tolerances};
use crate::lp::{solve_lp, LpData, LpStatus};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("integer lattice of {0} points exceeds the enumeration budget")]
    BudgetExceeded(u128),
    #[error("integer variable {0} has an infinite bound")]
    UnboundedInteger(usize),
    #[error("continuous subproblem is unbounded")]
    Unbounded,
    #[error("continuous subproblem failed: {0}")]
    Lp(String),
}

/// Enumerates every integer assignment and solves the remaining LP over the
/// continuous variables. Returns `Ok(None)` if the instance is infeasible.
///
/// Signomial terms are ignored; indicators are enforced by fixing `x <= 0`
/// whenever `z = 0`.
pub fn brute_force_optimum(p: &Problem, limit: u128) -> Result<Option<Solution>, OracleError> {
    let ints = p.integer_indices();
    let mut lattice: u128 = 1;
    let mut ranges = Vec::with_capacity(ints.len());
    for &j in &ints {
        let (lo, hi) = (p.lower[j].ceil(), p.upper[j].floor());
        if !lo.is_finite() || !hi.is_finite() {
            return Err(OracleError::UnboundedInteger(j));
        }
        if hi < lo {
            return Ok(None);
        }
        let width = (hi - lo) as u128 + 1;
        lattice = lattice.saturating_mul(width);
        if lattice > limit {
            return Err(OracleError::BudgetExceeded(lattice));
        }
        ranges.push((lo as i64, hi as i64));
    }

    let has_continuous = ints.len() < p.num_vars();
    let tol = Tolerances::default();
    let base = LpData::from_problem(p);
    let mut best: Option<Solution> = None;
    let mut point: Vec<i64> = ranges.iter().map(|r| r.0).collect();

    loop {
        let candidate = if has_continuous {
            solve_fixed(p, &base, &ints, &point)?
        } else {
            let mut values = vec![0.0; p.num_vars()];
            for (&j, &v) in ints.iter().zip(&point) {
                values[j] = v as f64;
            }
            let s = Solution {
                objective: p.objective_value(&values),
                values,
            };
            check_feasible(p, &s, &tol).is_feasible().then_some(s)
        };
        if let Some(s) = candidate {
            if best
                .as_ref()
                .is_none_or(|b| s.objective < b.objective - 1e-9)
            {
                best = Some(s);
            }
        }

        // odometer step
        let mut k = 0;
        loop {
            if k == point.len() {
                return Ok(best);
            }
            if point[k] < ranges[k].1 {
                point[k] += 1;
                break;
            }
            point[k] = ranges[k].0;
            k += 1;
        }
    }
}

fn solve_fixed(
    p: &Problem,
    base: &LpData,
    ints: &[usize],
    point: &[i64],
) -> Result<Option<Solution>, OracleError> {
    let mut lp = base.clone();
    for (&j, &v) in ints.iter().zip(point) {
        lp.col_lower[j] = v as f64;
        lp.col_upper[j] = v as f64;
    }
    for ind in &p.indicators {
        if lp.col_upper[ind.binvar] < 0.5 {
            lp.col_upper[ind.var] = lp.col_upper[ind.var].min(0.0);
            if lp.col_lower[ind.var] > lp.col_upper[ind.var] {
                return Ok(None);
            }
        }
    }
    let res = solve_lp(&lp, None, 10_000).map_err(|e| OracleError::Lp(e.to_string()))?;
    match res.status {
        LpStatus::Optimal => {
            let mut values = res.x;
            for (&j, &v) in ints.iter().zip(point) {
                values[j] = v as f64;
            }
            Ok(Some(Solution {
                objective: p.objective_value(&values),
                values,
            }))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(OracleError::Unbounded),
        LpStatus::IterationLimit => Err(OracleError::Lp("iteration limit".into())),
    }
}
