//! Automorphism group generators by color refinement and
//! individualization-refinement search.

use std::collections::{BTreeMap, HashSet};

use super::graph::SymGraph;
use super::SymmetryError;

struct Searcher<'a> {
    adj: Vec<Vec<(usize, usize)>>,
    edges: HashSet<(usize, usize, usize)>,
    graph: &'a SymGraph,
    nodes: usize,
    budget: usize,
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut table: BTreeMap<K, usize> = keys.iter().cloned().map(|k| (k, 0)).collect();
    for (i, v) in table.values_mut().enumerate() {
        *v = i;
    }
    keys.iter().map(|k| table[k]).collect()
}

fn num_colors(c: &[usize]) -> usize {
    c.iter().max().map_or(0, |m| m + 1)
}

fn profile(c: &[usize]) -> Vec<usize> {
    let mut sizes = vec![0; num_colors(c)];
    for &k in c {
        sizes[k] += 1;
    }
    sizes
}

/// Smallest color whose cell has more than one node.
fn target_cell(c: &[usize]) -> Option<Vec<usize>> {
    let sizes = profile(c);
    let color = sizes.iter().position(|&s| s > 1)?;
    Some((0..c.len()).filter(|&v| c[v] == color).collect())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut v = v;
        while self.0[v] != r {
            let next = self.0[v];
            self.0[v] = r;
            v = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl<'a> Searcher<'a> {
    fn new(graph: &'a SymGraph, budget: usize) -> Self {
        let mut adj = vec![Vec::new(); graph.num_nodes()];
        let mut edges = HashSet::new();
        for &(u, v, c) in &graph.edges {
            adj[u].push((c, v));
            adj[v].push((c, u));
            edges.insert((u, v, c));
        }
        Searcher {
            adj,
            edges,
            graph,
            nodes: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<(), SymmetryError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(SymmetryError::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    /// Equitable refinement: split cells by the multiset of (edge color,
    /// neighbor color) until stable.
    fn refine(&self, colors: &[usize]) -> Vec<usize> {
        let mut c = rank(colors);
        loop {
            let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..c.len())
                .map(|v| {
                    let mut s: Vec<(usize, usize)> = self.adj[v].iter().map(|&(e, u)| (e, c[u])).collect();
                    s.sort_unstable();
                    (c[v], s)
                })
                .collect();
            let next = rank(&sigs);
            if num_colors(&next) == num_colors(&c) {
                return next;
            }
            c = next;
        }
    }

    fn individualize(&self, c: &[usize], v: usize) -> Vec<usize> {
        let keys: Vec<usize> = (0..c.len()).map(|u| 2 * c[u] + usize::from(u != v)).collect();
        self.refine(&keys)
    }

    fn is_automorphism(&self, gamma: &[usize]) -> bool {
        self.graph.colors.iter().enumerate().all(|(v, &c)| self.graph.colors[gamma[v]] == c)
            && self.graph.edges.iter().all(|&(u, v, c)| {
                let (a, b) = (gamma[u], gamma[v]);
                self.edges.contains(&(a.min(b), a.max(b), c))
            })
    }

    /// Looks below coloring `c` at `depth` for a leaf equivalent to `first`.
    fn find_leaf(
        &mut self,
        c: Vec<usize>,
        depth: usize,
        path: &[Vec<usize>],
        first: &[usize],
    ) -> Result<Option<Vec<usize>>, SymmetryError> {
        self.tick()?;
        if depth >= path.len() || profile(&c) != profile(&path[depth]) {
            return Ok(None);
        }
        let Some(cell) = target_cell(&c) else {
            let mut pos = vec![0; c.len()];
            for (v, &k) in c.iter().enumerate() {
                pos[k] = v;
            }
            let gamma: Vec<usize> = first.iter().map(|&k| pos[k]).collect();
            return Ok(self.is_automorphism(&gamma).then_some(gamma));
        };
        for u in cell {
            let next = self.individualize(&c, u);
            if let Some(g) = self.find_leaf(next, depth + 1, path, first)? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }
}

/// Generators of the automorphism group of `graph` as node permutations.
/// Fails once more than `budget` search nodes have been explored.
pub fn automorphisms(graph: &SymGraph, budget: usize) -> Result<Vec<Vec<usize>>, SymmetryError> {
    let mut s = Searcher::new(graph, budget);
    let mut c = s.refine(&graph.colors);
    let mut path = vec![c.clone()];
    let mut chosen = Vec::new();
    let mut cells = Vec::new();
    while let Some(cell) = target_cell(&c) {
        s.tick()?;
        let v = cell[0];
        c = s.individualize(&c, v);
        chosen.push(v);
        cells.push(cell);
        path.push(c.clone());
    }
    let first = c;
    let mut orbits = UnionFind((0..graph.num_nodes()).collect());
    let mut gens = Vec::new();
    for k in (0..chosen.len()).rev() {
        for &w in &cells[k] {
            if orbits.find(w) == orbits.find(chosen[k]) {
                continue;
            }
            let next = s.individualize(&path[k], w);
            if let Some(g) = s.find_leaf(next, k + 1, &path, &first)? {
                for (v, &u) in g.iter().enumerate() {
                    orbits.union(v, u);
                }
                gens.push(g);
            }
        }
    }
    Ok(gens)
}
