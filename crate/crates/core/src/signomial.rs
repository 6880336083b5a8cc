//! Outer approximation of lifted signomial sets `{(x, t) : x^α = t}`.
//!
//! Positive exponents go to the `u` side and negative ones, together with
//! `t`, to the `v` side, giving `u^β̄ = v^γ̄` with nonnegative exponents. Both
//! sides are then raised to `η = 1 / max(Σβ̄, Σγ̄)` so that one of the two
//! monomials is linear-homogeneous and the other concave.
//!
//! `S1 = {u^β <= v^γ}` is separated with a vertex-polyhedral underestimator
//! of `u^β` against a gradient overestimator of `v^γ`; `S2` swaps the roles.

use thiserror::Error;

use crate::gmi::{Cut, CutOrigin};
use crate::lp::{solve_lp, LpData, LpError, LpStatus};
use crate::model::{LinRow, Problem};

pub const DEFAULT_MAX_UNDERVARS: usize = 10;
const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignomialError {
    #[error("exponent and variable lists differ in length")]
    LengthMismatch,
    #[error("variable index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("exponent of variable {0} is zero or not finite")]
    BadExponent(usize),
    #[error("variable {0} needs finite bounds with 0 < lb <= ub")]
    NonPositiveBounds(usize),
    #[error("envelope over {got} variables exceeds the limit of {max}")]
    TooManyVars { got: usize, max: usize },
    #[error("box is degenerate in coordinate {0}")]
    DegenerateBox(usize),
    #[error("point is not strictly positive")]
    NonPositivePoint,
    #[error("envelope LP failed: {0}")]
    Lp(#[from] LpError),
}

/// Which relation between `x^α` and `t` the constraint imposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignomialRelation {
    Equal,
    /// `x^α <= t`
    TermAtMost,
    /// `x^α >= t`
    TermAtLeast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `x^α <= t`
    S1,
    /// `x^α >= t`
    S2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignomialTerm {
    pub vars: Vec<usize>,
    pub exponents: Vec<f64>,
    pub aux: usize,
    pub relation: SignomialRelation,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub t_lower: f64,
    pub t_upper: f64,
}

impl SignomialTerm {
    /// Builds a term whose box is read from the problem bounds. The box of
    /// `t` falls back to the range of `x^α` over the `x` box where the problem
    /// gives no positive finite bound.
    pub fn from_problem_bounds(
        p: &Problem,
        vars: Vec<usize>,
        exponents: Vec<f64>,
        aux: usize,
        relation: SignomialRelation,
    ) -> Self {
        let n = p.num_vars();
        let get = |v: &Vec<f64>, j: usize, d: f64| if j < n { v[j] } else { d };
        let lower: Vec<f64> = vars.iter().map(|&j| get(&p.lower, j, 0.0)).collect();
        let upper: Vec<f64> = vars.iter().map(|&j| get(&p.upper, j, 0.0)).collect();
        let mut term = SignomialTerm {
            vars,
            exponents,
            aux,
            relation,
            lower,
            upper,
            t_lower: 0.0,
            t_upper: f64::INFINITY,
        };
        let (lo, hi) = term.monomial_range();
        let (tl, tu) = (get(&p.lower, aux, 0.0), get(&p.upper, aux, f64::INFINITY));
        term.t_lower = if tl > 0.0 { tl } else { lo };
        term.t_upper = if tu.is_finite() { tu } else { hi };
        term
    }

    /// Range of `x^α` over the `x` box (attained at vertices since the
    /// monomial is monotone in each coordinate).
    pub fn monomial_range(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (1.0, 1.0);
        for k in 0..self.vars.len() {
            let a = self.exponents[k];
            let (p, q) = (self.lower[k].powf(a), self.upper[k].powf(a));
            lo *= p.min(q);
            hi *= p.max(q);
        }
        (lo, hi)
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(&self.exponents)
            .map(|(&j, &a)| x[j].powf(a))
            .product()
    }

    /// Amount by which `x` violates the relation.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let (m, t) = (self.monomial(x), x[self.aux]);
        let v = match self.relation {
            SignomialRelation::Equal => (m - t).abs(),
            SignomialRelation::TermAtMost => m - t,
            SignomialRelation::TermAtLeast => t - m,
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v.max(0.0)
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), SignomialError> {
        if self.vars.len() != self.exponents.len()
            || self.vars.len() != self.lower.len()
            || self.vars.len() != self.upper.len()
        {
            return Err(SignomialError::LengthMismatch);
        }
        if self.aux >= n {
            return Err(SignomialError::IndexOutOfRange(self.aux));
        }
        for (k, &j) in self.vars.iter().enumerate() {
            if j >= n {
                return Err(SignomialError::IndexOutOfRange(j));
            }
            let a = self.exponents[k];
            if a == 0.0 || !a.is_finite() {
                return Err(SignomialError::BadExponent(j));
            }
            let (l, u) = (self.lower[k], self.upper[k]);
            if !(l > 0.0 && l <= u && u.is_finite()) {
                return Err(SignomialError::NonPositiveBounds(j));
            }
        }
        if !(self.t_lower > 0.0 && self.t_lower <= self.t_upper && self.t_upper.is_finite()) {
            return Err(SignomialError::NonPositiveBounds(self.aux));
        }
        Ok(())
    }
}

/// One side of the lifted form: a monomial `w^e` over problem variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialSide {
    pub vars: Vec<usize>,
    pub unscaled: Vec<f64>,
    pub exponents: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl MonomialSide {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn degree(&self) -> f64 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.exponents).map(|(v, e)| v.powf(*e)).product()
    }

    fn gather(&self, point: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .enumerate()
            .map(|(k, &j)| point[j].clamp(self.lower[k], self.upper[k]))
            .collect()
    }
}

/// `u^β = v^γ` with `u` the positive-exponent variables and `v = (t, x_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedForm {
    pub u: MonomialSide,
    pub v: MonomialSide,
    pub eta: f64,
}

impl LiftedForm {
    pub fn side(&self, s: Side) -> (&MonomialSide, &MonomialSide) {
        match s {
            Side::S1 => (&self.u, &self.v),
            Side::S2 => (&self.v, &self.u),
        }
    }
}

pub fn reformulate(term: &SignomialTerm) -> Result<LiftedForm, SignomialError> {
    for k in 0..term.vars.len() {
        if !(term.lower[k] > 0.0) {
            return Err(SignomialError::NonPositiveBounds(term.vars[k]));
        }
    }
    if !(term.t_lower > 0.0) {
        return Err(SignomialError::NonPositiveBounds(term.aux));
    }
    let mut u = MonomialSide {
        vars: vec![],
        unscaled: vec![],
        exponents: vec![],
        lower: vec![],
        upper: vec![],
    };
    let mut v = MonomialSide {
        vars: vec![term.aux],
        unscaled: vec![1.0],
        exponents: vec![],
        lower: vec![term.t_lower],
        upper: vec![term.t_upper],
    };
    for (k, &j) in term.vars.iter().enumerate() {
        let a = term.exponents[k];
        let side = if a > 0.0 { &mut u } else { &mut v };
        side.vars.push(j);
        side.unscaled.push(a.abs());
        side.lower.push(term.lower[k]);
        side.upper.push(term.upper[k]);
    }
    let su: f64 = u.unscaled.iter().sum();
    let sv: f64 = v.unscaled.iter().sum();
    let eta = 1.0 / su.max(sv);
    u.exponents = u.unscaled.iter().map(|b| eta * b).collect();
    v.exponents = v.unscaled.iter().map(|g| eta * g).collect();
    Ok(LiftedForm { u, v, eta })
}

/// Best affine underestimator `a·w + b` of `w^e` at `point`, taken over the
/// vertices of the side's box. Returns `(a, b)`.
pub fn underestimate(
    side: &MonomialSide,
    point: &[f64],
    max_vars: usize,
) -> Result<(Vec<f64>, f64), SignomialError> {
    let h = side.len();
    if h > max_vars {
        return Err(SignomialError::TooManyVars { got: h, max: max_vars });
    }
    if h == 0 {
        return Ok((vec![], 1.0));
    }
    for k in 0..h {
        if side.lower[k] >= side.upper[k] {
            return Err(SignomialError::DegenerateBox(side.vars[k]));
        }
    }
    // variables (a_1..a_h, b), all free; maximize a·point + b
    let mut objective: Vec<f64> = point.iter().map(|p| -p).collect();
    objective.push(-1.0);
    let mut rows = Vec::with_capacity(1 << h);
    let mut q = vec![0.0; h];
    for mask in 0..(1usize << h) {
        for k in 0..h {
            q[k] = if mask >> k & 1 == 1 { side.upper[k] } else { side.lower[k] };
        }
        let mut coeffs: Vec<(usize, f64)> = q.iter().copied().enumerate().collect();
        coeffs.push((h, 1.0));
        rows.push(LinRow::le(coeffs, side.eval(&q)));
    }
    let lp = LpData {
        objective,
        obj_offset: 0.0,
        rows,
        col_lower: vec![f64::NEG_INFINITY; h + 1],
        col_upper: vec![f64::INFINITY; h + 1],
    };
    let res = solve_lp(&lp, None, 10_000)?;
    if res.status != LpStatus::Optimal {
        return Err(SignomialError::Lp(LpError::Numerical(format!(
            "envelope LP ended with {:?}",
            res.status
        ))));
    }
    Ok((res.x[..h].to_vec(), res.x[h]))
}

/// `u^β` side of the S1 cut at `ũ`.
pub fn underestimate_u_beta(
    lf: &LiftedForm,
    u_point: &[f64],
    max_vars: usize,
) -> Result<(Vec<f64>, f64), SignomialError> {
    underestimate(&lf.u, u_point, max_vars)
}

/// First-order overestimator of the concave monomial `w^e` at `point`.
/// Returns `(value, gradient)` so that `w^e <= value + gradient·(w - point)`.
pub fn overestimate(side: &MonomialSide, point: &[f64]) -> Result<(f64, Vec<f64>), SignomialError> {
    if point.iter().any(|&p| !(p > 0.0)) {
        return Err(SignomialError::NonPositivePoint);
    }
    let g = side.eval(point);
    let grad = side
        .exponents
        .iter()
        .zip(point)
        .map(|(e, p)| e * g / p)
        .collect();
    Ok((g, grad))
}

pub fn overestimate_v_gamma(lf: &LiftedForm, v_point: &[f64]) -> Result<(f64, Vec<f64>), SignomialError> {
    overestimate(&lf.v, v_point)
}

/// A separating inequality `Σ coeffs·z <= rhs` over problem variables.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorCut {
    pub side: Side,
    /// Underestimator `a·w + b` of the under side.
    pub a: Vec<f64>,
    pub b: f64,
    /// Overestimator of the over side: value and gradient at the point.
    pub g: f64,
    pub grad: Vec<f64>,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub violation: f64,
}

impl EstimatorCut {
    pub fn activity(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * z[j]).sum()
    }

    pub fn into_cut(self, num_vars: usize) -> Cut {
        Cut::new(self.coeffs, self.rhs, CutOrigin::Signomial, num_vars)
    }
}

fn side_cut(
    lf: &LiftedForm,
    side: Side,
    point: &[f64],
    max_vars: usize,
) -> Result<EstimatorCut, SignomialError> {
    let (under, over) = lf.side(side);
    let wu = under.gather(point);
    let wo = over.gather(point);
    let (a, b) = underestimate(under, &wu, max_vars)?;
    let (g, grad) = overestimate(over, &wo)?;
    // a·w_u + b <= g + grad·(w_o - w̃_o)
    let mut coeffs: Vec<(usize, f64)> = under.vars.iter().copied().zip(a.iter().copied()).collect();
    coeffs.extend(over.vars.iter().zip(&grad).map(|(&j, &d)| (j, -d)));
    let rhs = g - grad.iter().zip(&wo).map(|(d, w)| d * w).sum::<f64>() - b;
    let row = LinRow::le(coeffs, rhs);
    let mut cut = EstimatorCut {
        side,
        a,
        b,
        g,
        grad,
        coeffs: row.coeffs,
        rhs: row.rhs,
        violation: 0.0,
    };
    cut.violation = cut.activity(point) - cut.rhs;
    Ok(cut)
}

/// Separates `point` (indexed like the problem) from the side(s) of `term`
/// that the relation requires. Returns the most violated cut, or none if the
/// point lies on the required side or no violated cut exists.
pub fn separate(
    term: &SignomialTerm,
    point: &[f64],
    max_vars: usize,
) -> Result<Option<EstimatorCut>, SignomialError> {
    let lf = reformulate(term)?;
    let m = term.monomial(point);
    let t = point[term.aux];
    let scale = 1.0 + m.abs().max(t.abs());
    let mut sides = Vec::new();
    let wants_s1 = matches!(term.relation, SignomialRelation::Equal | SignomialRelation::TermAtMost);
    let wants_s2 = matches!(term.relation, SignomialRelation::Equal | SignomialRelation::TermAtLeast);
    if wants_s1 && m > t + VIOLATION_TOL * scale {
        sides.push(Side::S1);
    }
    if wants_s2 && m < t - VIOLATION_TOL * scale {
        sides.push(Side::S2);
    }
    let mut best: Option<EstimatorCut> = None;
    for s in sides {
        let cut = side_cut(&lf, s, point, max_vars)?;
        if cut.violation > VIOLATION_TOL && best.as_ref().is_none_or(|b| cut.violation > b.violation) {
            best = Some(cut);
        }
    }
    Ok(best)
}
