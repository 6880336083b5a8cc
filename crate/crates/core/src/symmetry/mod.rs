//! Permutation and signed permutation symmetries of a formulation, their
//! orbits, and first-level symretope (SST) cuts.
//!
//! Signed symmetries act on centered coordinates `x - m`, where `m` is the
//! midpoint of every finite domain outside indicator constraints.

pub mod graph;
pub mod search;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gmi::{Cut, CutOrigin};
use crate::model::Problem;

pub use graph::{build_graph, NodeKind, SymGraph};
pub use search::automorphisms;

pub const DEFAULT_NODE_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryMode {
    #[default]
    None,
    Perm,
    Signed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("automorphism search exceeded its budget of {0} nodes")]
    BudgetExceeded(usize),
    #[error("symmetry detection is off")]
    Disabled,
}

/// Signed permutation of variables: `image[j] = (k, negated)` sends `x_j` to
/// `x_k` (or to `-x_k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPerm {
    pub image: Vec<(usize, bool)>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm {
            image: (0..n).map(|j| (j, false)).collect(),
        }
    }

    pub fn from_perm(perm: &[usize]) -> Self {
        SignedPerm {
            image: perm.iter().map(|&k| (k, false)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(j, &(k, s))| j == k && !s)
    }

    pub fn is_positive(&self) -> bool {
        self.image.iter().all(|&(_, s)| !s)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        SignedPerm {
            image: other
                .image
                .iter()
                .map(|&(k, s)| {
                    let (l, t) = self.image[k];
                    (l, s ^ t)
                })
                .collect(),
        }
    }

    fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.len()];
        self.image.iter().all(|&(k, _)| k < seen.len() && !std::mem::replace(&mut seen[k], true))
    }
}

/// Numeric value on the 1e-9 grid used for color classes and row matching.
pub fn key(v: f64) -> i128 {
    if v == f64::INFINITY {
        i128::MAX
    } else if v == f64::NEG_INFINITY {
        -i128::MAX
    } else {
        (v * 1e9).round() as i128
    }
}

fn effective_bounds(p: &Problem, j: usize) -> (f64, f64) {
    if p.integer[j] {
        ((p.lower[j] - 1e-9).ceil(), (p.upper[j] + 1e-9).floor())
    } else {
        (p.lower[j], p.upper[j])
    }
}

/// Translation applied before signed matching: the domain midpoint for
/// variables with two finite bounds that take no part in an indicator, and
/// zero otherwise (and always zero when `signed` is false).
pub fn centers(p: &Problem, signed: bool) -> Vec<f64> {
    let mut in_indicator = vec![false; p.num_vars()];
    for ind in &p.indicators {
        in_indicator[ind.binvar] = true;
        in_indicator[ind.var] = true;
    }
    (0..p.num_vars())
        .map(|j| {
            let (l, u) = effective_bounds(p, j);
            if signed && !in_indicator[j] && l.is_finite() && u.is_finite() {
                0.5 * (l + u)
            } else {
                0.0
            }
        })
        .collect()
}

pub(crate) fn centered_bounds(p: &Problem, m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (0..p.num_vars())
        .map(|j| {
            let (l, u) = effective_bounds(p, j);
            (l - m[j], u - m[j])
        })
        .unzip()
}

type RowKey = (Vec<(usize, i128)>, i128, i128);

fn row_key(coeffs: impl Iterator<Item = (usize, f64)>, l: f64, r: f64, signed: bool) -> RowKey {
    let mut c: Vec<(usize, i128)> = coeffs.map(|(j, a)| (j, key(a))).collect();
    c.sort_unstable();
    let plain = (c, key(l), key(r));
    if !signed {
        return plain;
    }
    let flipped = (
        plain.0.iter().map(|&(j, a)| (j, -a)).collect(),
        -plain.2,
        -plain.1,
    );
    plain.min(flipped)
}

/// Checks that `g` maps the formulation onto itself: objective, bounds,
/// integrality, the multiset of rows (up to orientation in signed mode) and
/// the indicator constraints, whose variables may not change sign.
pub fn verify_symmetry(p: &Problem, g: &SignedPerm, mode: SymmetryMode) -> bool {
    let n = p.num_vars();
    if g.len() != n || !g.is_bijection() {
        return false;
    }
    let signed = match mode {
        SymmetryMode::None => return g.is_identity(),
        SymmetryMode::Perm if !g.is_positive() => return false,
        SymmetryMode::Perm => false,
        SymmetryMode::Signed => true,
    };
    let m = centers(p, signed);
    let (lo, up) = centered_bounds(p, &m);
    for (j, &(k, s)) in g.image.iter().enumerate() {
        let sign = if s { -1.0 } else { 1.0 };
        let (l, u) = if s { (-up[j], -lo[j]) } else { (lo[j], up[j]) };
        if p.integer[j] != p.integer[k]
            || key(p.objective[k]) != key(sign * p.objective[j])
            || key(lo[k]) != key(l)
            || key(up[k]) != key(u)
        {
            return false;
        }
    }
    let centered = |coeffs: &[(usize, f64)], l: f64, r: f64| {
        let shift: f64 = coeffs.iter().map(|&(j, a)| a * m[j]).sum();
        (l - shift, r - shift)
    };
    let mut rows: Vec<RowKey> = Vec::with_capacity(p.rows.len());
    let mut images: Vec<RowKey> = Vec::with_capacity(p.rows.len());
    for row in &p.rows {
        let (l, r) = centered(&row.coeffs, row.lhs, row.rhs);
        rows.push(row_key(row.coeffs.iter().copied(), l, r, signed));
        let mapped = row.coeffs.iter().map(|&(j, a)| {
            let (k, s) = g.image[j];
            (k, if s { -a } else { a })
        });
        images.push(row_key(mapped, l, r, signed));
    }
    rows.sort_unstable();
    images.sort_unstable();
    if rows != images {
        return false;
    }
    let mut inds: Vec<(usize, usize, i128)> = Vec::new();
    let mut mapped: Vec<(usize, usize, i128)> = Vec::new();
    for ind in &p.indicators {
        let (z, sz) = g.image[ind.binvar];
        let (x, sx) = g.image[ind.var];
        if sz || sx {
            return false;
        }
        inds.push((ind.binvar, ind.var, key(ind.activation)));
        mapped.push((z, x, key(ind.activation)));
    }
    inds.sort_unstable();
    mapped.sort_unstable();
    inds == mapped
}

/// Generators of the formulation symmetry group of `p` restricted to the
/// variables. Each generator is checked with [`verify_symmetry`].
pub fn detect_symmetries(p: &Problem, mode: SymmetryMode, budget: usize) -> Result<Vec<SignedPerm>, SymmetryError> {
    if mode == SymmetryMode::None {
        return Err(SymmetryError::Disabled);
    }
    let g = build_graph(p, mode);
    let n = p.num_vars();
    let gens = automorphisms(&g, budget)?;
    let mut out = Vec::new();
    for gamma in gens {
        let perm = SignedPerm {
            image: (0..n)
                .map(|j| match g.kinds[gamma[j]] {
                    NodeKind::Var(k) => (k, false),
                    NodeKind::NegVar(k) => (k, true),
                    _ => unreachable!("variable nodes map to variable nodes"),
                })
                .collect(),
        };
        if perm.is_identity() || out.contains(&perm) {
            continue;
        }
        debug_assert!(verify_symmetry(p, &perm, mode));
        if verify_symmetry(p, &perm, mode) {
            out.push(perm);
        }
    }
    Ok(out)
}

/// Every element of the group generated by `gens` (at most `limit`).
pub fn group_closure(gens: &[SignedPerm], n: usize, limit: usize) -> BTreeSet<SignedPerm> {
    let mut seen = BTreeSet::new();
    let id = SignedPerm::identity(n);
    let mut stack = vec![id.clone()];
    seen.insert(id);
    while let Some(h) = stack.pop() {
        for g in gens {
            let next = g.compose(&h);
            if seen.len() < limit && seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    seen
}

/// Variable orbits of size at least two under `gens` (signs ignored), each
/// sorted, ordered by smallest element.
pub fn orbits(n: usize, gens: &[SignedPerm]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for g in gens {
        for (j, &(k, _)) in g.image.iter().enumerate() {
            let (a, b) = (find(&mut parent, j), find(&mut parent, k));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let r = find(&mut parent, j);
        groups[r].push(j);
    }
    groups.into_iter().filter(|o| o.len() > 1).collect()
}

/// First-level SST cuts `x_j - m_j <= x_ℓ - m_ℓ` for the largest orbit (ties
/// to the smallest leader ℓ) of the subgroup generated by the all-positive
/// generators.
pub fn sst_cuts(p: &Problem, gens: &[SignedPerm], mode: SymmetryMode) -> Vec<Cut> {
    let positive: Vec<SignedPerm> = gens.iter().filter(|g| g.is_positive()).cloned().collect();
    let n = p.num_vars();
    let Some(orbit) = orbits(n, &positive).into_iter().fold(None::<Vec<usize>>, |best, o| match best {
        Some(b) if b.len() >= o.len() => Some(b),
        _ => Some(o),
    }) else {
        return Vec::new();
    };
    let m = centers(p, mode == SymmetryMode::Signed);
    let leader = orbit[0];
    orbit[1..]
        .iter()
        .map(|&j| Cut::new(vec![(leader, -1.0), (j, 1.0)], m[j] - m[leader], CutOrigin::Sst, n))
        .collect()
}
