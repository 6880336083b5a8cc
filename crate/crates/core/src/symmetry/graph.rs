//! Colored graphs whose automorphisms are the formulation symmetries.

use std::collections::BTreeMap;

use super::{centered_bounds, centers, key, SymmetryMode};
use crate::model::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Var(usize),
    NegVar(usize),
    /// Side node of a row; `flipped` marks the orientation `-a·x ∈ [-R, -L]`.
    Rhs { row: usize, flipped: bool },
    Cons(usize),
    Indicator(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    Var {
        integer: bool,
        obj: i128,
        lb: i128,
        ub: i128,
    },
    Rhs {
        lhs: i128,
        rhs: i128,
    },
    Linear,
    Indicator {
        activation: i128,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    Coef(i128),
    Side,
    Pair,
    BinVar,
    SlackVar,
}

#[derive(Clone, Debug)]
pub struct SymGraph {
    pub kinds: Vec<NodeKind>,
    pub colors: Vec<usize>,
    /// Undirected colored edges `(u, v, color)`.
    pub edges: Vec<(usize, usize, usize)>,
    pub num_vars: usize,
    pub signed: bool,
}

impl SymGraph {
    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_node_colors(&self) -> usize {
        self.colors.iter().max().map_or(0, |c| c + 1)
    }

    /// Index of the node of variable `j` (or of `-x_j` when `negated`).
    pub fn var_node(&self, j: usize, negated: bool) -> usize {
        if negated {
            self.num_vars + j
        } else {
            j
        }
    }

    /// Number of edges of each color, in color order.
    pub fn edge_color_classes(&self) -> Vec<usize> {
        let mut counts = BTreeMap::new();
        for &(_, _, c) in &self.edges {
            *counts.entry(c).or_insert(0usize) += 1;
        }
        counts.into_values().collect()
    }
}

struct Builder {
    kinds: Vec<NodeKind>,
    node_keys: Vec<NodeKey>,
    edges: Vec<(usize, usize, EdgeKey)>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, key: NodeKey) -> usize {
        self.kinds.push(kind);
        self.node_keys.push(key);
        self.kinds.len() - 1
    }
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let table: BTreeMap<K, usize> = keys
        .iter()
        .cloned()
        .map(|k| (k, 0))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    keys.iter().map(|k| table[k]).collect()
}

/// Builds the permutation graph (`Perm`) or the signed permutation graph
/// (`Signed`) of `p`.
pub fn build_graph(p: &Problem, mode: SymmetryMode) -> SymGraph {
    let signed = mode == SymmetryMode::Signed;
    let n = p.num_vars();
    let m = centers(p, signed);
    let (lo, up) = centered_bounds(p, &m);
    let mut b = Builder {
        kinds: Vec::new(),
        node_keys: Vec::new(),
        edges: Vec::new(),
    };
    for j in 0..n {
        b.node(
            NodeKind::Var(j),
            NodeKey::Var {
                integer: p.integer[j],
                obj: key(p.objective[j]),
                lb: key(lo[j]),
                ub: key(up[j]),
            },
        );
    }
    if signed {
        for j in 0..n {
            b.node(
                NodeKind::NegVar(j),
                NodeKey::Var {
                    integer: p.integer[j],
                    obj: key(-p.objective[j]),
                    lb: key(-up[j]),
                    ub: key(-lo[j]),
                },
            );
            b.edges.push((j, n + j, EdgeKey::Pair));
        }
    }
    for (i, row) in p.rows.iter().enumerate() {
        let shift: f64 = row.coeffs.iter().map(|&(j, a)| a * m[j]).sum();
        let (l, r) = (row.lhs - shift, row.rhs - shift);
        let cons = b.node(NodeKind::Cons(i), NodeKey::Linear);
        let pos = b.node(
            NodeKind::Rhs { row: i, flipped: false },
            NodeKey::Rhs { lhs: key(l), rhs: key(r) },
        );
        b.edges.push((cons, pos, EdgeKey::Side));
        for &(j, a) in &row.coeffs {
            b.edges.push((j, pos, EdgeKey::Coef(key(a))));
        }
        if signed {
            let neg = b.node(
                NodeKind::Rhs { row: i, flipped: true },
                NodeKey::Rhs {
                    lhs: key(-r),
                    rhs: key(-l),
                },
            );
            b.edges.push((cons, neg, EdgeKey::Side));
            for &(j, a) in &row.coeffs {
                b.edges.push((n + j, pos, EdgeKey::Coef(key(-a))));
                b.edges.push((j, neg, EdgeKey::Coef(key(-a))));
                b.edges.push((n + j, neg, EdgeKey::Coef(key(a))));
            }
        }
    }
    for (i, ind) in p.indicators.iter().enumerate() {
        let c = b.node(
            NodeKind::Indicator(i),
            NodeKey::Indicator {
                activation: key(ind.activation),
            },
        );
        b.edges.push((ind.binvar, c, EdgeKey::BinVar));
        b.edges.push((ind.var, c, EdgeKey::SlackVar));
    }
    let colors = rank(&b.node_keys);
    let edge_keys: Vec<EdgeKey> = b.edges.iter().map(|e| e.2.clone()).collect();
    let edge_colors = rank(&edge_keys);
    SymGraph {
        kinds: b.kinds,
        colors,
        edges: b
            .edges
            .iter()
            .zip(edge_colors)
            .map(|(&(u, v, _), c)| (u.min(v), u.max(v), c))
            .collect(),
        num_vars: n,
        signed,
    }
}
