//! Gomory mixed-integer cuts and the [`Cut`] representation shared by all
//! separators.

use thiserror::Error;

use crate::lp::{tableau_row, LpData, LpResult, TableauRow, VarStatus};
use crate::model::LinRow;

pub const MAX_DYNAMISM: f64 = 1e7;
pub const MIN_EFFICACY: f64 = 1e-6;
const INT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmiError {
    #[error("variable {0} is not integer")]
    NotInteger(usize),
    #[error("value of variable {0} is integral")]
    Integral(usize),
    #[error("cut has zero norm")]
    ZeroNorm,
    #[error("empty round")]
    EmptyRound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutOrigin {
    Gmi { source: usize },
    Sst,
    Signomial,
    User,
}

/// `Σ coeffs·x <= rhs` over structural variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub origin: CutOrigin,
    pub efficacy: f64,
    pub density: f64,
    pub local: bool,
}

impl Cut {
    pub fn new(coeffs: Vec<(usize, f64)>, rhs: f64, origin: CutOrigin, num_vars: usize) -> Self {
        let row = LinRow::le(coeffs, rhs);
        let density = if num_vars == 0 {
            0.0
        } else {
            row.coeffs.len() as f64 / num_vars as f64
        };
        Cut {
            coeffs: row.coeffs,
            rhs,
            origin,
            efficacy: 0.0,
            density,
            local: false,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|(_, a)| a * a).sum::<f64>().sqrt()
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.activity(x) - self.rhs
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for &(j, a) in &self.coeffs {
            d[j] = a;
        }
        d
    }

    pub fn dot(&self, other: &Cut) -> f64 {
        let (mut i, mut k, mut s) = (0, 0, 0.0);
        while i < self.coeffs.len() && k < other.coeffs.len() {
            let (a, b) = (self.coeffs[i], other.coeffs[k]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => k += 1,
                std::cmp::Ordering::Equal => {
                    s += a.1 * b.1;
                    i += 1;
                    k += 1;
                }
            }
        }
        s
    }

    /// `|cos ∠(a, b)|` between the two normals.
    pub fn parallelism(&self, other: &Cut) -> f64 {
        let d = self.norm() * other.norm();
        if d == 0.0 {
            0.0
        } else {
            (self.dot(other) / d).abs().min(1.0)
        }
    }

    pub fn scaled(&self, lambda: f64) -> Cut {
        Cut {
            coeffs: self.coeffs.iter().map(|&(j, a)| (j, a * lambda)).collect(),
            rhs: self.rhs * lambda,
            ..self.clone()
        }
    }

    pub fn to_row(&self) -> LinRow {
        LinRow::le(self.coeffs.clone(), self.rhs)
    }

    /// Recomputes and stores the efficacy at `x`.
    pub fn with_efficacy(mut self, x: &[f64]) -> Self {
        self.efficacy = efficacy(&self, x).unwrap_or(f64::NEG_INFINITY);
        self
    }
}

/// Euclidean distance by which `x` violates the cut (negative when the cut is
/// satisfied).
pub fn efficacy(cut: &Cut, x: &[f64]) -> Result<f64, GmiError> {
    let norm = cut.norm();
    if norm == 0.0 {
        return Err(GmiError::ZeroNorm);
    }
    Ok(cut.violation(x) / norm)
}

/// Split `π·x <= π₀ ∨ π·x >= π₀ + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitDisjunction {
    pub pi: Vec<i64>,
    pub pi0: i64,
}

impl SplitDisjunction {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.pi.iter().zip(x).map(|(&p, v)| p as f64 * v).sum()
    }

    /// Whether `x` lies strictly between the two sides.
    pub fn strictly_inside(&self, x: &[f64]) -> bool {
        let v = self.dot(x);
        v > self.pi0 as f64 && v < self.pi0 as f64 + 1.0
    }
}

pub fn elementary_split(i: usize, x: &[f64], integer: &[bool]) -> Result<SplitDisjunction, GmiError> {
    if !integer.get(i).copied().unwrap_or(false) {
        return Err(GmiError::NotInteger(i));
    }
    let v = x[i];
    let f = v - v.floor();
    if f <= INT_TOL || f >= 1.0 - INT_TOL {
        return Err(GmiError::Integral(i));
    }
    let mut pi = vec![0; integer.len()];
    pi[i] = 1;
    Ok(SplitDisjunction {
        pi,
        pi0: v.floor() as i64,
    })
}

/// Divides every efficacy by the round maximum. An all-zero round maps to
/// zeros.
pub fn normalize_round(efficacies: &[f64]) -> Result<Vec<f64>, GmiError> {
    if efficacies.is_empty() {
        return Err(GmiError::EmptyRound);
    }
    let max = efficacies.iter().copied().fold(0.0, f64::max);
    Ok(efficacies
        .iter()
        .map(|&e| if max > 0.0 { (e / max).clamp(0.0, 1.0) } else { 0.0 })
        .collect())
}

/// What the GMI formula needs to know about the LP a tableau row came from.
pub struct GmiContext<'a> {
    pub lp: &'a LpData,
    pub integer: &'a [bool],
    /// Global bounds; a derivation using any tighter bound yields a local cut.
    pub global_lower: &'a [f64],
    pub global_upper: &'a [f64],
    /// Rows that are only valid in the current subtree.
    pub local_rows: &'a [bool],
    /// LP point the efficacy is measured at.
    pub x: &'a [f64],
    /// Treat slacks of all-integer rows as integer variables.
    pub integer_slacks: bool,
}

impl GmiContext<'_> {
    fn slack_is_integer(&self, i: usize, bound: f64) -> bool {
        if !self.integer_slacks || !is_integral(bound) {
            return false;
        }
        self.lp.rows[i]
            .coeffs
            .iter()
            .all(|&(j, a)| self.integer[j] && is_integral(a))
    }
}

fn is_integral(v: f64) -> bool {
    v.is_finite() && (v - v.round()).abs() <= 1e-9
}

fn frac(v: f64) -> f64 {
    v - v.floor()
}

/// Derives the GMI cut of a tableau row. Returns `None` when the basic
/// variable is not fractional, when the row involves a free nonbasic
/// variable, when the cut is numerically unsafe, or when it is not violated.
pub fn gmi_from_row(row: &TableauRow, ctx: &GmiContext) -> Option<Cut> {
    let n = ctx.lp.num_cols();
    let b = row.basic_var;
    if b >= n || !ctx.integer[b] {
        return None;
    }
    let f0 = frac(row.value);
    if f0 <= INT_TOL || f0 >= 1.0 - INT_TOL {
        return None;
    }

    // Σ g_j y_j >= 1, expanded into structural coefficients and a constant
    let mut dense = vec![0.0; n];
    let mut constant = 0.0;
    let mut local = false;
    for e in &row.entries {
        let j = e.var;
        let (abar, bound, sign) = match e.status {
            VarStatus::AtLower => (e.coef, ctx.lp.lower(j), 1.0),
            VarStatus::AtUpper => (-e.coef, ctx.lp.upper(j), -1.0),
            VarStatus::Free => return None,
            VarStatus::Basic => continue,
        };
        if !bound.is_finite() {
            return None;
        }
        let is_int = if j < n {
            ctx.integer[j] && is_integral(bound)
        } else {
            ctx.slack_is_integer(j - n, bound)
        };
        let g = if is_int {
            let fj = frac(abar);
            if fj <= f0 {
                fj / f0
            } else {
                (1.0 - fj) / (1.0 - f0)
            }
        } else if abar >= 0.0 {
            abar / f0
        } else {
            -abar / (1.0 - f0)
        };
        if g == 0.0 {
            continue;
        }
        if j < n {
            let global = match e.status {
                VarStatus::AtLower => ctx.global_lower[j],
                _ => ctx.global_upper[j],
            };
            if global != bound {
                local = true;
            }
        } else if ctx.local_rows.get(j - n).copied().unwrap_or(false) {
            local = true;
        }
        // y_j = sign·(x_j - bound)
        constant -= g * sign * bound;
        if j < n {
            dense[j] += g * sign;
        } else {
            for &(k, a) in &ctx.lp.rows[j - n].coeffs {
                dense[k] += g * sign * a;
            }
        }
    }

    // Σ dense·x + constant >= 1  ⇔  -Σ dense·x <= constant - 1
    let amax = dense.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    if amax == 0.0 {
        return None;
    }
    let mut rhs = constant - 1.0;
    let mut coeffs = Vec::new();
    for (j, &a) in dense.iter().enumerate() {
        if a.abs() <= 1e-12 * amax {
            // drop the term, relaxing with the global bound it would need
            let c = -a;
            let bound = if c > 0.0 { ctx.global_lower[j] } else { ctx.global_upper[j] };
            if c != 0.0 {
                if !bound.is_finite() {
                    return None;
                }
                rhs -= c * bound;
            }
            continue;
        }
        coeffs.push((j, -a));
    }
    let amin = coeffs.iter().fold(f64::INFINITY, |m, &(_, a)| m.min(a.abs()));
    if amax / amin > MAX_DYNAMISM {
        return None;
    }
    let mut cut = Cut::new(coeffs, rhs, CutOrigin::Gmi { source: b }, n);
    cut.local = local;
    let cut = cut.with_efficacy(ctx.x);
    (cut.efficacy > MIN_EFFICACY).then_some(cut)
}

/// GMI cuts from every tableau row whose basic variable is a fractional
/// integer structural, in basis order.
pub fn separate_gmi(res: &LpResult, ctx: &GmiContext) -> Vec<Cut> {
    let n = ctx.lp.num_cols();
    res.head
        .iter()
        .filter(|&&j| j < n && ctx.integer[j])
        .filter_map(|&j| tableau_row(ctx.lp, res, j).ok())
        .filter_map(|row| gmi_from_row(&row, ctx))
        .collect()
}
