//! Bound propagation for branching bounds and indicator implications.

use thiserror::Error;

use crate::model::Problem;

const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("bounds of variable {0} cross")]
pub struct Infeasible(pub usize);

/// Tightens `lower`/`upper` in place:
/// integer bounds are rounded, `z = 0` forces `x <= 0`, `z = 1` forces
/// `x >= ℓ`, `x > 0` forces `z = 1` and `u_x < ℓ` forces `z = 0`.
pub fn propagate_bounds(p: &Problem, lower: &mut [f64], upper: &mut [f64]) -> Result<(), Infeasible> {
    for j in 0..p.num_vars() {
        if p.integer[j] {
            lower[j] = (lower[j] - TOL).ceil();
            upper[j] = (upper[j] + TOL).floor();
        }
        if lower[j] > upper[j] + TOL {
            return Err(Infeasible(j));
        }
    }
    loop {
        let mut changed = false;
        for ind in &p.indicators {
            let (z, x, l) = (ind.binvar, ind.var, ind.activation);
            if upper[z] < 0.5 && upper[x] > 0.0 {
                upper[x] = 0.0;
                changed = true;
            }
            if lower[z] > 0.5 && lower[x] < l {
                lower[x] = l;
                changed = true;
            }
            if lower[x] > TOL && lower[z] < 1.0 {
                lower[z] = 1.0;
                changed = true;
            }
            if upper[x] < l - TOL && upper[z] > 0.0 {
                upper[z] = 0.0;
                changed = true;
            }
            for j in [z, x] {
                if lower[j] > upper[j] + TOL {
                    return Err(Infeasible(j));
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
}
