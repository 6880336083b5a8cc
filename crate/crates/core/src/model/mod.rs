//! Problem data model.
//!
//! A [`Problem`] is always stored as a minimization: when an instance is read
//! with a maximization sense the objective is negated and [`Problem::sense`]
//! records the flip so reported values can be converted back.
//!
//! Rows are two-sided (`lhs <= a·x <= rhs`); a one-sided row uses an infinite
//! side. Infinite values are `f64::INFINITY` in memory; any input magnitude of
//! at least [`INFINITY`] is read as infinite.

mod cip;
mod feasibility;
mod mps;
mod oracle;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signomial::SignomialTerm;

pub use cip::{parse_cip, write_cip};
pub use feasibility::{check_feasible, FeasibilityReport, Violation, ViolationKind};
pub use mps::parse_mps;
pub use oracle::{brute_force_optimum, OracleError};

/// Input magnitudes at or beyond this value are treated as infinite.
pub const INFINITY: f64 = 1e20;

/// Maps sentinel-encoded infinities onto `±f64::INFINITY`.
pub fn normalize_infinity(v: f64) -> f64 {
    if v >= INFINITY {
        f64::INFINITY
    } else if v <= -INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Mps,
    Cip,
}

impl FileFormat {
    /// Guesses the format from a file extension (`.mps` or `.cip`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mps" => Some(FileFormat::Mps),
            "cip" | "lp" => Some(FileFormat::Cip),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("variable {0}: lower bound exceeds upper bound")]
    CrossedBounds(usize),
    #[error("variable {0}: bound fixes the variable at infinity")]
    InfiniteFixing(usize),
    #[error("row {0}: lhs exceeds rhs")]
    CrossedSides(usize),
    #[error("row {row}: variable index {index} out of range")]
    IndexOutOfRange { row: usize, index: usize },
    #[error("vector length {got} does not match {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("indicator {0}: binary variable must be integer with bounds [0,1]")]
    NonBinaryIndicator(usize),
    #[error("indicator {0}: activation bound must be positive")]
    NonPositiveActivation(usize),
    #[error("signomial {0}: {1}")]
    Signomial(usize, String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("indicator on `{var}` references non-binary variable `{binvar}`")]
    NonBinaryIndicator { binvar: String, var: String },
    #[error("invalid problem: {0}")]
    Invalid(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            msg: msg.into(),
        }
    }
}

/// Reads a problem file in the given format.
pub fn parse_problem(path: &Path, format: FileFormat) -> Result<Problem, ParseError> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut problem = match format {
        FileFormat::Mps => parse_mps(&text)?,
        FileFormat::Cip => parse_cip(&text)?,
    };
    if problem.name.is_empty() {
        problem.name = name;
    }
    Ok(problem)
}

/// A two-sided linear row `lhs <= Σ coeffs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinRow {
    pub coeffs: Vec<(usize, f64)>,
    pub lhs: f64,
    pub rhs: f64,
}

impl LinRow {
    /// Builds a row, sorting the terms by index, merging duplicates and
    /// dropping zero coefficients.
    pub fn new(mut coeffs: Vec<(usize, f64)>, lhs: f64, rhs: f64) -> Self {
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, v) in coeffs {
            match merged.last_mut() {
                Some((k, w)) if *k == j => *w += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        LinRow {
            coeffs: merged,
            lhs: normalize_infinity(lhs),
            rhs: normalize_infinity(rhs),
        }
    }

    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, f64::NEG_INFINITY, rhs)
    }

    pub fn ge(coeffs: Vec<(usize, f64)>, lhs: f64) -> Self {
        Self::new(coeffs, lhs, f64::INFINITY)
    }

    pub fn eq(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, rhs, rhs)
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|p| self.coeffs[p].1)
            .unwrap_or(0.0)
    }
}

/// Semi-continuous pattern `x ∈ [0,u]`, `ℓ z <= x`, `z = 0 ⇒ x <= 0`.
///
/// The activation row `ℓ z - x <= 0` is part of the constraint and is added
/// to the LP relaxation by [`Problem::lp_rows`].
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorCons {
    pub binvar: usize,
    pub var: usize,
    pub activation: f64,
}

impl IndicatorCons {
    pub fn activation_row(&self) -> LinRow {
        LinRow::le(vec![(self.binvar, self.activation), (self.var, -1.0)], 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub values: Vec<f64>,
    /// Internal (minimization) objective value.
    pub objective: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub feas: f64,
    pub int: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-6,
            int: 1e-6,
            zero: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
    /// Minimization objective (negated when `sense` is `Maximize`).
    pub objective: Vec<f64>,
    /// Constant added to the minimization objective.
    pub obj_offset: f64,
    pub sense: Sense,
    pub rows: Vec<LinRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub indicators: Vec<IndicatorCons>,
    pub signomials: Vec<SignomialTerm>,
}

impl Problem {
    /// An empty minimization problem over `n` continuous variables in `[0, ∞)`.
    pub fn new(n: usize) -> Self {
        Problem {
            name: String::new(),
            var_names: (0..n).map(|j| format!("x{j}")).collect(),
            row_names: Vec::new(),
            objective: vec![0.0; n],
            obj_offset: 0.0,
            sense: Sense::Minimize,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            integer: vec![false; n],
            indicators: Vec::new(),
            signomials: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, row: LinRow) -> usize {
        self.row_names.push(format!("r{}", self.rows.len()));
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn set_binary(&mut self, j: usize) {
        self.integer[j] = true;
        self.lower[j] = 0.0;
        self.upper[j] = 1.0;
    }

    /// Switches to a maximization objective given in external form.
    pub fn set_maximize(&mut self, external_objective: Vec<f64>) {
        self.sense = Sense::Maximize;
        self.objective = external_objective.into_iter().map(|c| -c).collect();
    }

    pub fn integer_indices(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&j| self.integer[j]).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    /// Internal objective value of `x` (minimization form).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Converts an internal objective value to the sense the instance was
    /// written in.
    pub fn external_objective(&self, internal: f64) -> f64 {
        match self.sense {
            Sense::Minimize => internal,
            Sense::Maximize => -internal,
        }
    }

    /// Rows of the LP relaxation: the linear rows followed by one activation
    /// row per indicator constraint.
    pub fn lp_rows(&self) -> Vec<LinRow> {
        let mut rows = self.rows.clone();
        rows.extend(self.indicators.iter().map(IndicatorCons::activation_row));
        rows
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars();
        for (len, expected) in [
            (self.lower.len(), n),
            (self.upper.len(), n),
            (self.integer.len(), n),
            (self.var_names.len(), n),
        ] {
            if len != expected {
                return Err(ModelError::LengthMismatch { expected, got: len });
            }
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(ModelError::CrossedBounds(j));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(ModelError::InfiniteFixing(j));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.lhs > row.rhs {
                return Err(ModelError::CrossedSides(i));
            }
            if let Some(&(index, _)) = row.coeffs.iter().find(|&&(j, _)| j >= n) {
                return Err(ModelError::IndexOutOfRange { row: i, index });
            }
        }
        for (k, ind) in self.indicators.iter().enumerate() {
            let z = ind.binvar;
            if z >= n || ind.var >= n {
                return Err(ModelError::IndexOutOfRange {
                    row: k,
                    index: z.max(ind.var),
                });
            }
            if !self.integer[z] || self.lower[z] < 0.0 || self.upper[z] > 1.0 {
                return Err(ModelError::NonBinaryIndicator(k));
            }
            if !(ind.activation > 0.0) {
                return Err(ModelError::NonPositiveActivation(k));
            }
        }
        for (k, term) in self.signomials.iter().enumerate() {
            term.validate(n)
                .map_err(|e| ModelError::Signomial(k, e.to_string()))?;
        }
        Ok(())
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} vars ({} integer), {} rows, {} indicators",
            if self.name.is_empty() { "problem" } else { &self.name },
            self.num_vars(),
            self.integer.iter().filter(|&&b| b).count(),
            self.rows.len(),
            self.indicators.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_normalization_sorts_merges_and_drops_zeros() {
        let row = LinRow::new(vec![(3, 1.0), (1, 2.0), (3, -1.0), (0, 0.0)], 0.0, 1e21);
        assert_eq!(row.coeffs, vec![(1, 2.0)]);
        assert_eq!(row.rhs, f64::INFINITY);
    }

    #[test]
    fn validate_rejects_crossed_bounds() {
        let mut p = Problem::new(1);
        p.lower[0] = 2.0;
        p.upper[0] = 1.0;
        assert_eq!(p.validate(), Err(ModelError::CrossedBounds(0)));
    }

    #[test]
    fn validate_rejects_infinite_fixing() {
        let mut p = Problem::new(1);
        p.lower[0] = f64::INFINITY;
        p.upper[0] = f64::INFINITY;
        assert_eq!(p.validate(), Err(ModelError::InfiniteFixing(0)));
    }

    #[test]
    fn validate_rejects_non_binary_indicator() {
        let mut p = Problem::new(2);
        p.indicators.push(IndicatorCons {
            binvar: 0,
            var: 1,
            activation: 1.0,
        });
        assert_eq!(p.validate(), Err(ModelError::NonBinaryIndicator(0)));
        p.set_binary(0);
        assert_eq!(p.validate(), Ok(()));
    }

    #[test]
    fn maximize_is_stored_negated() {
        let mut p = Problem::new(2);
        p.set_maximize(vec![1.0, 2.0]);
        assert_eq!(p.objective, vec![-1.0, -2.0]);
        assert_eq!(p.external_objective(p.objective_value(&[1.0, 1.0])), 3.0);
    }
}
