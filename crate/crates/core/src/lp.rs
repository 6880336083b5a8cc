//! Dense bounded-variable primal simplex.
//!
//! Every row `i` gets a slack `s_i = a_i·x` with bounds `[lhs_i, rhs_i]`, so
//! the equality system is `A x - s = 0` over `n + m` variables. Slack `i` is
//! variable `n + i`. The basis inverse is kept explicitly and updated with
//! eta transformations, and rebuilt from scratch every [`REFACTOR_PERIOD`]
//! pivots.

use thiserror::Error;

use crate::model::{LinRow, Problem, Tolerances};

pub const REFACTOR_PERIOD: usize = 50;
const DEGENERATE_SWITCH: usize = 50;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("basis matrix is numerically singular")]
    Singular,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("variable {0} is not basic")]
    NotBasic(usize),
    #[error("LP is not solved to optimality")]
    NotOptimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Per-variable status over structural variables followed by slacks.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

/// LP data in row form.
#[derive(Clone, Debug, PartialEq)]
pub struct LpData {
    pub objective: Vec<f64>,
    pub obj_offset: f64,
    pub rows: Vec<LinRow>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
}

impl LpData {
    /// LP relaxation of `p`, including indicator activation rows.
    pub fn from_problem(p: &Problem) -> Self {
        LpData {
            objective: p.objective.clone(),
            obj_offset: p.obj_offset,
            rows: p.lp_rows(),
            col_lower: p.lower.clone(),
            col_upper: p.upper.clone(),
        }
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, row: LinRow) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    /// Lower bound of variable `j` (structural or slack).
    pub fn lower(&self, j: usize) -> f64 {
        let n = self.num_cols();
        if j < n {
            self.col_lower[j]
        } else {
            self.rows[j - n].lhs
        }
    }

    pub fn upper(&self, j: usize) -> f64 {
        let n = self.num_cols();
        if j < n {
            self.col_upper[j]
        } else {
            self.rows[j - n].rhs
        }
    }

    fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.num_cols()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        cols
    }
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural values.
    pub x: Vec<f64>,
    /// Row activities (slack values).
    pub slacks: Vec<f64>,
    /// Row multipliers `y = c_B B⁻¹`.
    pub duals: Vec<f64>,
    /// Reduced costs over structural variables followed by slacks.
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub objective: f64,
    pub iterations: usize,
    /// Basic variable of each basis position.
    pub head: Vec<usize>,
    /// Dense row-major basis inverse.
    pub binv: Vec<f64>,
}

impl LpResult {
    pub fn value(&self, j: usize) -> f64 {
        if j < self.x.len() {
            self.x[j]
        } else {
            self.slacks[j - self.x.len()]
        }
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.basis.status.get(j) == Some(&VarStatus::Basic)
    }
}

/// Row of the simplex tableau: `x_B = value - Σ coef_j (x_j - x̄_j)` over the
/// nonbasic variables `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableauRow {
    pub basic_var: usize,
    pub value: f64,
    pub entries: Vec<TableauEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableauEntry {
    pub var: usize,
    /// Entry of `B⁻¹ [A | -I]`.
    pub coef: f64,
    pub status: VarStatus,
    pub value: f64,
}

struct Simplex {
    cols: Vec<Vec<(usize, f64)>>,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    head: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
}

impl Simplex {
    fn new(lp: &LpData) -> Self {
        let n = lp.num_cols();
        let m = lp.num_rows();
        let mut lower = lp.col_lower.clone();
        let mut upper = lp.col_upper.clone();
        let mut cost = lp.objective.clone();
        for row in &lp.rows {
            lower.push(row.lhs);
            upper.push(row.rhs);
            cost.push(0.0);
        }
        Simplex {
            cols: lp.columns(),
            n,
            m,
            lower,
            upper,
            cost,
            x: vec![0.0; n + m],
            status: vec![VarStatus::AtLower; n + m],
            head: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
        }
    }

    fn nonbasic_status(&self, j: usize, wanted: VarStatus) -> VarStatus {
        let (l, u) = (self.lower[j], self.upper[j]);
        match wanted {
            VarStatus::AtUpper if u.is_finite() => VarStatus::AtUpper,
            VarStatus::AtLower if l.is_finite() => VarStatus::AtLower,
            _ if l.is_finite() => VarStatus::AtLower,
            _ if u.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            _ => 0.0,
        }
    }

    fn slack_basis(&mut self) {
        self.head = (self.n..self.n + self.m).collect();
        for j in 0..self.n {
            self.status[j] = self.nonbasic_status(j, VarStatus::AtLower);
        }
        for j in self.n..self.n + self.m {
            self.status[j] = VarStatus::Basic;
        }
    }

    fn install(&mut self, warm: Option<&Basis>) -> Result<(), LpError> {
        if let Some(b) = warm {
            if self.try_warm(b) && self.refactor().is_ok() {
                return Ok(());
            }
        }
        self.slack_basis();
        self.refactor()
    }

    fn try_warm(&mut self, b: &Basis) -> bool {
        let (n, m) = (self.n, self.m);
        if b.status.len() < n || b.status.len() > n + m {
            return false;
        }
        let mut head = Vec::with_capacity(m);
        for j in 0..n + m {
            let wanted = b.status.get(j).copied().unwrap_or(VarStatus::Basic);
            if wanted == VarStatus::Basic {
                self.status[j] = VarStatus::Basic;
                head.push(j);
            } else {
                self.status[j] = self.nonbasic_status(j, wanted);
            }
        }
        if head.len() != m {
            return false;
        }
        self.head = head;
        true
    }

    /// Column `j` of `[A | -I]` as a sparse list.
    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        let col = self.column(j);
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            out[r] = col.iter().map(|&(i, a)| a * row[i]).sum();
        }
        out
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        for (r, &j) in self.head.iter().enumerate() {
            for (i, a) in self.column(j) {
                bmat[i * m + r] = a;
            }
        }
        self.binv = invert(&bmat, m).ok_or(LpError::Singular)?;
        self.since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        // B x_B = -Σ_{nonbasic} col_j x_j
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                for (i, a) in self.column(j) {
                    rhs[i] -= a * v;
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.head[r]] = row.iter().zip(&rhs).map(|(b, v)| b * v).sum();
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        if v < l - PRIMAL_TOL * (1.0 + l.abs()) {
            -1.0
        } else if v > u + PRIMAL_TOL * (1.0 + u.abs()) {
            1.0
        } else {
            0.0
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let j = self.head[r];
            let c = if phase1 { self.infeasibility(j) } else { self.cost[j] };
            if c != 0.0 {
                for k in 0..m {
                    y[k] += c * self.binv[r * m + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[j] };
        if j < self.n {
            c - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
        } else {
            c + y[j - self.n]
        }
    }

    fn run(&mut self, iter_limit: usize) -> Result<(LpStatus, usize), LpError> {
        let mut iterations = 0;
        let mut degenerate_streak = 0;
        let mut fresh = true;
        loop {
            let phase1 = self.head.iter().any(|&j| self.infeasibility(j) != 0.0);
            let y = self.duals(phase1);
            let bland = degenerate_streak >= DEGENERATE_SWITCH;

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase1);
                let dir = match st {
                    VarStatus::AtLower if d < -DUAL_TOL => 1.0,
                    VarStatus::AtUpper if d > DUAL_TOL => -1.0,
                    VarStatus::Free if d.abs() > DUAL_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if entering.is_none_or(|(k, _)| d.abs() > self.reduced_cost(k, &y, phase1).abs()) {
                    entering = Some((j, dir));
                }
            }

            let Some((q, dir)) = entering else {
                if !fresh {
                    self.refactor()?;
                    fresh = true;
                    continue;
                }
                return Ok((
                    if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal },
                    iterations,
                ));
            };
            if iterations >= iter_limit {
                return Ok((LpStatus::IterationLimit, iterations));
            }
            iterations += 1;

            let alpha = self.ftran(q);
            // x_B changes by -dir·θ·α
            let mut theta = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, VarStatus)> = None;
            let mut best_pivot = 0.0;
            for r in 0..self.m {
                let dx = -dir * alpha[r];
                if dx.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.head[r];
                let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
                let state = if phase1 { self.infeasibility(j) } else { 0.0 };
                let (limit, at) = if dx < 0.0 {
                    match state {
                        s if s < 0.0 => continue,
                        s if s > 0.0 => (u, VarStatus::AtUpper),
                        _ => (l, VarStatus::AtLower),
                    }
                } else {
                    match state {
                        s if s > 0.0 => continue,
                        s if s < 0.0 => (l, VarStatus::AtLower),
                        _ => (u, VarStatus::AtUpper),
                    }
                };
                if !limit.is_finite() {
                    continue;
                }
                let ratio = ((limit - v) / dx).max(0.0);
                let tie_wins = match leave {
                    Some((lr, _)) if ratio <= theta + 1e-12 => {
                        if bland {
                            j < self.head[lr]
                        } else {
                            dx.abs() > best_pivot
                        }
                    }
                    _ => false,
                };
                if ratio < theta - 1e-12 || (leave.is_none() && ratio < theta) || tie_wins {
                    theta = theta.min(ratio);
                    leave = Some((r, at));
                    best_pivot = dx.abs();
                }
            }

            if !theta.is_finite() {
                if phase1 {
                    return Err(LpError::Numerical("unbounded phase-one ray".into()));
                }
                return Ok((LpStatus::Unbounded, iterations));
            }

            if theta <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            for r in 0..self.m {
                let j = self.head[r];
                self.x[j] -= dir * theta * alpha[r];
            }
            self.x[q] += dir * theta;

            match leave {
                None => {
                    // bound flip
                    self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[q] = self.nonbasic_value(q);
                    fresh = false;
                }
                Some((r, at)) => {
                    let out = self.head[r];
                    self.status[out] = at;
                    self.x[out] = self.nonbasic_value(out);
                    self.status[q] = VarStatus::Basic;
                    self.head[r] = q;
                    self.eta_update(r, &alpha)?;
                    self.since_refactor += 1;
                    fresh = false;
                    if self.since_refactor >= REFACTOR_PERIOD {
                        self.refactor()?;
                        fresh = true;
                    }
                }
            }
        }
    }

    fn eta_update(&mut self, r: usize, alpha: &[f64]) -> Result<(), LpError> {
        let m = self.m;
        let piv = alpha[r];
        if piv.abs() <= PIVOT_TOL {
            return Err(LpError::Numerical("tiny pivot".into()));
        }
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
        }
        Ok(())
    }
}

/// Gauss-Jordan inversion with partial pivoting of a row-major `m×m` matrix.
fn invert(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&i, &k| work[i * m + c].abs().total_cmp(&work[k * m + c].abs()))?;
        if work[p * m + c].abs() < 1e-11 {
            return None;
        }
        if p != c {
            for k in 0..m {
                work.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let d = work[c * m + c];
        for k in 0..m {
            work[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for i in 0..m {
            if i == c {
                continue;
            }
            let f = work[i * m + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                work[i * m + k] -= f * work[c * m + k];
                inv[i * m + k] -= f * inv[c * m + k];
            }
        }
    }
    Some(inv)
}

/// Solves `lp`, optionally warm-started from `warm`. A warm basis whose size
/// or structure does not fit falls back to the all-slack basis; rows appended
/// after the basis was taken enter with basic slacks.
pub fn solve_lp(lp: &LpData, warm: Option<&Basis>, iter_limit: usize) -> Result<LpResult, LpError> {
    for j in 0..lp.num_cols() {
        if lp.col_lower[j] > lp.col_upper[j] {
            return Ok(trivially_infeasible(lp));
        }
    }
    if lp.rows.iter().any(|r| r.lhs > r.rhs) {
        return Ok(trivially_infeasible(lp));
    }
    let mut s = Simplex::new(lp);
    s.install(warm)?;
    let (status, iterations) = s.run(iter_limit)?;
    let (n, m) = (s.n, s.m);
    let y = s.duals(false);
    let reduced_costs: Vec<f64> = (0..n + m)
        .map(|j| {
            if s.status[j] == VarStatus::Basic {
                0.0
            } else {
                s.reduced_cost(j, &y, false)
            }
        })
        .collect();
    let x = s.x[..n].to_vec();
    let objective = lp.obj_offset + lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    Ok(LpResult {
        status,
        slacks: s.x[n..].to_vec(),
        x,
        duals: y,
        reduced_costs,
        basis: Basis { status: s.status },
        objective,
        iterations,
        head: s.head,
        binv: s.binv,
    })
}

fn trivially_infeasible(lp: &LpData) -> LpResult {
    let (n, m) = (lp.num_cols(), lp.num_rows());
    LpResult {
        status: LpStatus::Infeasible,
        x: vec![0.0; n],
        slacks: vec![0.0; m],
        duals: vec![0.0; m],
        reduced_costs: vec![0.0; n + m],
        basis: Basis {
            status: (0..n)
                .map(|_| VarStatus::AtLower)
                .chain((0..m).map(|_| VarStatus::Basic))
                .collect(),
        },
        objective: f64::INFINITY,
        iterations: 0,
        head: (n..n + m).collect(),
        binv: Vec::new(),
    }
}

/// Tableau row of basic variable `var`.
pub fn tableau_row(lp: &LpData, res: &LpResult, var: usize) -> Result<TableauRow, LpError> {
    let r = res
        .head
        .iter()
        .position(|&j| j == var)
        .ok_or(LpError::NotBasic(var))?;
    let (n, m) = (lp.num_cols(), lp.num_rows());
    if res.binv.len() != m * m {
        return Err(LpError::NotBasic(var));
    }
    let brow = &res.binv[r * m..(r + 1) * m];
    let mut entries = Vec::new();
    let mut col_acc = vec![0.0; n];
    for (i, row) in lp.rows.iter().enumerate() {
        if brow[i] == 0.0 {
            continue;
        }
        for &(j, a) in &row.coeffs {
            col_acc[j] += brow[i] * a;
        }
    }
    for j in 0..n + m {
        let status = res.basis.status[j];
        if status == VarStatus::Basic {
            continue;
        }
        let coef = if j < n { col_acc[j] } else { -brow[j - n] };
        if coef.abs() > 1e-12 {
            entries.push(TableauEntry {
                var: j,
                coef,
                status,
                value: res.value(j),
            });
        }
    }
    Ok(TableauRow {
        basic_var: var,
        value: res.value(var),
        entries,
    })
}

/// Fraction of nonbasic variables whose reduced cost vanishes.
pub fn dual_degeneracy(res: &LpResult, tol: &Tolerances) -> Result<f64, LpError> {
    if res.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal);
    }
    let mut nonbasic = 0usize;
    let mut zero = 0usize;
    for (j, st) in res.basis.status.iter().enumerate() {
        if *st == VarStatus::Basic {
            continue;
        }
        nonbasic += 1;
        if res.reduced_costs[j].abs() <= tol.zero {
            zero += 1;
        }
    }
    Ok(if nonbasic == 0 { 0.0 } else { zero as f64 / nonbasic as f64 })
}
