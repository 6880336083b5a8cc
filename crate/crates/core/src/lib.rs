//! Compact branch-and-cut kernel for mixed-integer linear programs.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod branching;
pub mod cutsel;
pub mod diving;
pub mod generate;
pub mod gmi;
pub mod lagromory;
pub mod lp;
pub mod model;
pub mod propagate;
pub mod search;
pub mod signomial;
pub mod symmetry;

pub use gmi::{Cut, CutOrigin};
pub use lp::{solve_lp, LpData, LpResult, LpStatus};
pub use model::{LinRow, Problem, Solution, Tolerances};
