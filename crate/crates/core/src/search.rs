//! Branch-and-cut: best-bound search with short plunges, GMI cut rounds with
//! a pluggable selector, configurable branching, and root-node symmetry
//! handling, indicator diving and relax-and-cut.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::{
    gmi_branch_select, hybrid_select, most_fractional, Direction, GmiEffStats, HistoryCounters, HybridBranchWeights,
    HybridInputs, PseudoCostStore, DEFAULT_MAX_CANDS,
};
use crate::cutsel::{
    select_dynamic, select_ensemble, select_hybrid, DynamicConfig, EnsembleConfig, HybridWeights, SelectionContext,
    Selector,
};
use crate::diving::{dive, DiveConfig};
use crate::gmi::{separate_gmi, Cut, CutOrigin, GmiContext};
use crate::lagromory::{relax_and_cut, should_run, LagromoryConfig};
use crate::lp::{solve_lp, Basis, LpData, LpError, LpResult, LpStatus};
use crate::model::{check_feasible, LinRow, ModelError, Problem, Solution, Tolerances};
use crate::propagate::propagate_bounds;
use crate::symmetry::{detect_symmetries, sst_cuts, SymmetryMode, DEFAULT_NODE_BUDGET};

const PRUNE_TOL: f64 = 1e-7;
const INT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchRule {
    Hybrid,
    Gmi,
    Mostfrac,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryHandling {
    None,
    Sst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub cutsel: Selector,
    pub branching: BranchRule,
    pub symmetry: SymmetryMode,
    pub symmetry_handling: SymmetryHandling,
    /// Negative disables relax-and-cut, zero runs it at the root only, `k`
    /// runs it at every depth divisible by `k`.
    pub lagromory_freq: i64,
    /// `None` dives exactly when the problem has indicator constraints.
    pub indicator_diving: Option<bool>,
    pub seed: u64,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub max_rounds: usize,
    pub cut_depth: usize,
    pub max_cuts_per_round: usize,
    pub min_ortho: f64,
    pub stall_tol: f64,
    pub gmi_max_cands: usize,
    pub symmetry_budget: usize,
    pub lp_iter_limit: usize,
    pub hybrid_weights: HybridWeights,
    pub dynamic: DynamicConfig,
    pub ensemble: EnsembleConfig,
    pub branch_weights: HybridBranchWeights,
    pub lagromory: LagromoryConfig,
    pub dive: DiveConfig,
    /// Keep a copy of every cut added to an LP in the statistics.
    pub record_cuts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cutsel: Selector::Hybrid,
            branching: BranchRule::Hybrid,
            symmetry: SymmetryMode::None,
            symmetry_handling: SymmetryHandling::Sst,
            lagromory_freq: -1,
            indicator_diving: None,
            seed: 0,
            time_limit: None,
            node_limit: None,
            max_rounds: 3,
            cut_depth: 4,
            max_cuts_per_round: 10,
            min_ortho: 0.9,
            stall_tol: 1e-6,
            gmi_max_cands: DEFAULT_MAX_CANDS,
            symmetry_budget: DEFAULT_NODE_BUDGET,
            lp_iter_limit: 100_000,
            hybrid_weights: HybridWeights::default(),
            dynamic: DynamicConfig::default(),
            ensemble: EnsembleConfig::default(),
            branch_weights: HybridBranchWeights::default(),
            lagromory: LagromoryConfig::default(),
            dive: DiveConfig::default(),
            record_cuts: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("signomial terms are not supported by the search")]
    Signomial,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A cut added to some LP, with the node box it is valid in if local.
#[derive(Clone, Debug, PartialEq)]
pub struct KeptCut {
    pub cut: Cut,
    pub local_box: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub cuts_generated: BTreeMap<String, u64>,
    pub cuts_kept: BTreeMap<String, u64>,
    /// Internal (minimization) incumbent objective.
    pub incumbent: Option<f64>,
    pub dual_bound: f64,
    pub gap: Option<f64>,
    pub wall_time: f64,
    pub root_lp_bound: Option<f64>,
    pub lagromory_bound: Option<f64>,
    pub symmetry_generators: usize,
    pub symmetry_failed: bool,
    pub lp_failures: u64,
    /// `(node, objective)` for every incumbent improvement.
    pub incumbent_trace: Vec<(u64, f64)>,
    /// Global dual bound after every processed node.
    pub dual_trace: Vec<f64>,
    #[serde(skip)]
    pub kept_cuts: Vec<KeptCut>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub stats: SolveStats,
}

#[derive(Clone, Debug)]
struct BranchInfo {
    var: usize,
    dir: Direction,
    value: f64,
    distance: f64,
    parent_objective: f64,
}

#[derive(Clone, Debug)]
struct Node {
    id: u64,
    depth: usize,
    /// Bound changes `(var, lower, upper)` relative to the root.
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Basis>,
    bound: f64,
    local_cuts: Vec<LinRow>,
    branch: Option<BranchInfo>,
    tie: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smaller bound first, then the random rank, then age.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.tie.cmp(&self.tie))
            .then(other.id.cmp(&self.id))
    }
}

fn origin_name(c: &Cut) -> &'static str {
    match c.origin {
        CutOrigin::Gmi { .. } => "gmi",
        CutOrigin::Sst => "sst",
        CutOrigin::Signomial => "signomial",
        CutOrigin::User => "user",
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.round()).abs()
}

struct Solver<'a> {
    p: &'a Problem,
    cfg: &'a SolverConfig,
    start: Instant,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    base: LpData,
    global_rows: Vec<LinRow>,
    pool: Vec<Cut>,
    incumbent: Option<Solution>,
    stats: SolveStats,
    pc: PseudoCostStore,
    counters: HistoryCounters,
    gmi_stats: GmiEffStats,
    rng: ChaCha8Rng,
    next_id: u64,
    tol: Tolerances,
}

enum NodeResult {
    Pruned,
    Unbounded,
    Branched(Vec<Node>, usize),
}

impl<'a> Solver<'a> {
    fn cutoff(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective)
    }

    fn offer(&mut self, s: Solution) {
        if s.objective < self.cutoff() - 1e-9 {
            self.stats.incumbent_trace.push((self.stats.nodes, s.objective));
            self.incumbent = Some(s);
        }
    }

    fn count(map: &mut BTreeMap<String, u64>, key: &str, k: u64) {
        *map.entry(key.to_string()).or_insert(0) += k;
    }

    fn lp_solve(&mut self, data: &LpData, warm: Option<&Basis>) -> Result<LpResult, SolveError> {
        let res = solve_lp(data, warm, self.cfg.lp_iter_limit)?;
        self.stats.lp_iterations += res.iterations as u64;
        Ok(res)
    }

    fn select(&self, cuts: &[Cut], x: &[f64]) -> Vec<usize> {
        let ctx = SelectionContext {
            x,
            objective: &self.p.objective,
            integer: &self.p.integer,
            incumbent: self.incumbent.as_ref().map(|s| s.values.as_slice()),
        };
        let max = self.cfg.max_cuts_per_round;
        match self.cfg.cutsel {
            Selector::Hybrid => select_hybrid(cuts, &ctx, &self.cfg.hybrid_weights, self.cfg.min_ortho, max),
            Selector::Dynamic => select_dynamic(cuts, &ctx, &self.cfg.dynamic, max),
            Selector::Ensemble => {
                let mut kept = select_ensemble(cuts, &ctx, &self.pc, &self.cfg.ensemble);
                kept.truncate(max);
                kept
            }
        }
    }

    fn integral_solution(&self, x: &[f64]) -> Option<Solution> {
        let values: Vec<f64> = (0..self.p.num_vars())
            .map(|j| if self.p.integer[j] { x[j].round() } else { x[j] })
            .collect();
        let s = Solution {
            objective: self.p.objective_value(&values),
            values,
        };
        check_feasible(self.p, &s, &self.tol).is_feasible().then_some(s)
    }

    fn child(&mut self, node: &Node, lo: &[f64], up: &[f64], bound: f64, basis: &Basis, local: &[LinRow], branch: BranchInfo) -> Node {
        let mut changes = Vec::new();
        for j in 0..lo.len() {
            let (mut l, mut u) = (lo[j], up[j]);
            if j == branch.var {
                match branch.dir {
                    Direction::Down => u = u.min(branch.value.floor()),
                    Direction::Up => l = l.max(branch.value.ceil()),
                }
            }
            if l != self.root_lower[j] || u != self.root_upper[j] {
                changes.push((j, l, u));
            }
        }
        self.next_id += 1;
        Node {
            id: self.next_id,
            depth: node.depth + 1,
            changes,
            basis: Some(basis.clone()),
            bound,
            local_cuts: local.to_vec(),
            branch: Some(branch),
            tie: self.rng.gen(),
        }
    }

    fn process(&mut self, mut node: Node) -> Result<NodeResult, SolveError> {
        let p = self.p;
        let cfg = self.cfg;
        let (mut lo, mut up) = (self.root_lower.clone(), self.root_upper.clone());
        for &(j, l, u) in &node.changes {
            lo[j] = l;
            up[j] = u;
        }
        if propagate_bounds(p, &mut lo, &mut up).is_err() {
            self.note_infeasible(&node);
            return Ok(NodeResult::Pruned);
        }
        let mut data = self.base.clone();
        data.rows.extend(self.global_rows.iter().cloned());
        data.rows.extend(node.local_cuts.iter().cloned());
        data.col_lower.clone_from(&lo);
        data.col_upper.clone_from(&up);
        let mut local_flags = vec![false; self.base.num_rows() + self.global_rows.len()];
        local_flags.resize(data.num_rows(), true);
        let mut res = self.lp_solve(&data, node.basis.as_ref())?;
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                self.note_infeasible(&node);
                return Ok(NodeResult::Pruned);
            }
            LpStatus::Unbounded => return Ok(NodeResult::Unbounded),
            LpStatus::IterationLimit => {
                self.stats.lp_failures += 1;
                return Ok(NodeResult::Pruned);
            }
        }
        if let Some(b) = &node.branch {
            let gain = res.objective - b.parent_objective;
            self.pc.update(b.var, b.dir, gain, b.distance);
        }
        let mut bound = node.bound.max(res.objective);
        if node.depth == 0 {
            self.stats.root_lp_bound = Some(res.objective);
            let diving = cfg.indicator_diving.unwrap_or(!p.indicators.is_empty());
            if diving {
                if let Ok(d) = dive(p, &data, &res.x, &res.basis, &cfg.dive) {
                    if let Some(s) = d.solution {
                        self.offer(s);
                    }
                }
            }
        }

        let mut extra: Vec<Cut> = Vec::new();
        let lagr_here = cfg.lagromory_freq >= 0
            && (node.depth == 0 || (cfg.lagromory_freq > 0 && node.depth.is_multiple_of(cfg.lagromory_freq as usize)));
        if lagr_here && should_run(&res, &cfg.lagromory) {
            let ctx = GmiContext {
                lp: &data,
                integer: &p.integer,
                global_lower: &self.root_lower,
                global_upper: &self.root_upper,
                local_rows: &local_flags,
                x: &res.x,
                integer_slacks: false,
            };
            let cutoff = self.incumbent.as_ref().map(|s| s.objective);
            if let Ok(out) = relax_and_cut(&data, &res, &ctx, cutoff, &cfg.lagromory) {
                if node.depth == 0 {
                    self.stats.lagromory_bound = Some(out.bound);
                }
                bound = bound.max(out.bound);
                Self::count(&mut self.stats.cuts_generated, "lagromory", out.cuts.len() as u64);
                for c in out.cuts {
                    if c.local {
                        extra.push(c);
                    } else {
                        self.pool.push(c);
                    }
                }
            }
        }
        if bound >= self.cutoff() - PRUNE_TOL {
            return Ok(NodeResult::Pruned);
        }

        let mut new_local: Vec<LinRow> = Vec::new();
        if node.depth <= cfg.cut_depth {
            for _ in 0..cfg.max_rounds {
                let has_fractional = (0..p.num_vars()).any(|j| p.integer[j] && fractionality(res.x[j]) > INT_TOL);
                if !has_fractional {
                    break;
                }
                let ctx = GmiContext {
                    lp: &data,
                    integer: &p.integer,
                    global_lower: &self.root_lower,
                    global_upper: &self.root_upper,
                    local_rows: &local_flags,
                    x: &res.x,
                    integer_slacks: false,
                };
                let gmi = separate_gmi(&res, &ctx);
                Self::count(&mut self.stats.cuts_generated, "gmi", gmi.len() as u64);
                let round: Vec<(usize, f64)> = gmi
                    .iter()
                    .filter_map(|c| match c.origin {
                        CutOrigin::Gmi { source } => Some((source, c.efficacy)),
                        _ => None,
                    })
                    .collect();
                self.gmi_stats.record_round(&round);
                let n_gmi = gmi.len();
                let mut cands = gmi;
                let pool_start = cands.len();
                let mut pool_ids = Vec::new();
                for (i, c) in self.pool.iter().chain(extra.iter()).enumerate() {
                    let c = c.clone().with_efficacy(&res.x);
                    if c.efficacy > 1e-6 {
                        pool_ids.push(i);
                        cands.push(c);
                    }
                }
                if cands.is_empty() {
                    break;
                }
                let kept = self.select(&cands, &res.x);
                if kept.is_empty() {
                    break;
                }
                let rows_before = data.num_rows();
                let mut used_pool = Vec::new();
                for &k in &kept {
                    let c = &cands[k];
                    let name = if k < n_gmi { origin_name(c) } else { "lagromory" };
                    Self::count(&mut self.stats.cuts_kept, name, 1);
                    if k >= pool_start && pool_ids[k - pool_start] < self.pool.len() {
                        used_pool.push(pool_ids[k - pool_start]);
                    }
                    let global = node.depth == 0 && !c.local;
                    if cfg.record_cuts {
                        self.stats.kept_cuts.push(KeptCut {
                            cut: c.clone(),
                            local_box: (!global).then(|| (lo.clone(), up.clone())),
                        });
                    }
                    let row = c.to_row();
                    data.rows.push(row.clone());
                    local_flags.push(!global);
                    if global {
                        self.global_rows.push(row);
                    } else {
                        new_local.push(row);
                    }
                }
                if node.depth == 0 {
                    used_pool.sort_unstable();
                    for i in used_pool.into_iter().rev() {
                        self.pool.remove(i);
                    }
                }
                debug_assert!(data.num_rows() > rows_before);
                let next = self.lp_solve(&data, Some(&res.basis))?;
                match next.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => {
                        self.note_infeasible(&node);
                        return Ok(NodeResult::Pruned);
                    }
                    _ => {
                        self.stats.lp_failures += 1;
                        return Ok(NodeResult::Pruned);
                    }
                }
                let gain = next.objective - res.objective;
                res = next;
                bound = bound.max(res.objective);
                if bound >= self.cutoff() - PRUNE_TOL || gain < cfg.stall_tol {
                    break;
                }
            }
        }
        if bound >= self.cutoff() - PRUNE_TOL {
            return Ok(NodeResult::Pruned);
        }

        let x = &res.x;
        let cands: Vec<(usize, f64)> = (0..p.num_vars())
            .filter(|&j| p.integer[j] && fractionality(x[j]) > INT_TOL)
            .map(|j| (j, x[j] - x[j].floor()))
            .collect();
        let mut local = node.local_cuts.clone();
        local.extend(new_local);
        let (var, value) = if cands.is_empty() {
            let violated = p
                .indicators
                .iter()
                .find(|ind| x[ind.binvar] < 0.5 && x[ind.var] > self.tol.feas && lo[ind.binvar] < up[ind.binvar]);
            match violated {
                None => {
                    match self.integral_solution(x) {
                        Some(s) => self.offer(s),
                        None => self.stats.lp_failures += 1,
                    }
                    return Ok(NodeResult::Pruned);
                }
                Some(ind) => (ind.binvar, 0.5),
            }
        } else {
            let var = match cfg.branching {
                BranchRule::Mostfrac => most_fractional(&cands),
                BranchRule::Hybrid => {
                    let inp = HybridInputs {
                        stats: &self.gmi_stats,
                        pc: &self.pc,
                        counters: &self.counters,
                        weights: &cfg.branch_weights,
                    };
                    hybrid_select(&cands, &inp)
                }
                BranchRule::Gmi => {
                    let ctx = GmiContext {
                        lp: &data,
                        integer: &p.integer,
                        global_lower: &self.root_lower,
                        global_upper: &self.root_upper,
                        local_rows: &local_flags,
                        x,
                        integer_slacks: false,
                    };
                    gmi_branch_select(&cands, &res, &ctx, cfg.gmi_max_cands).map(|c| c.var)
                }
            }
            .expect("candidate list is nonempty");
            (var, x[var])
        };
        let f = value - value.floor();
        let down = BranchInfo {
            var,
            dir: Direction::Down,
            value,
            distance: f,
            parent_objective: res.objective,
        };
        let up_info = BranchInfo {
            var,
            dir: Direction::Up,
            value,
            distance: 1.0 - f,
            parent_objective: res.objective,
        };
        node.bound = bound;
        let d = self.child(&node, &lo, &up, bound, &res.basis, &local, down);
        let u = self.child(&node, &lo, &up, bound, &res.basis, &local, up_info);
        let preferred = usize::from(f >= 0.5);
        Ok(NodeResult::Branched(vec![d, u], preferred))
    }

    fn note_infeasible(&mut self, node: &Node) {
        if let Some(b) = &node.branch {
            self.counters.infeas_freq[b.var] += 1.0;
        }
    }

    fn dual_bound(&self, queue: &BinaryHeap<Node>, plunge: Option<&Node>) -> f64 {
        let open = queue
            .peek()
            .map(|n| n.bound)
            .into_iter()
            .chain(plunge.map(|n| n.bound))
            .fold(f64::INFINITY, f64::min);
        open.min(self.cutoff())
    }
}

/// Solves `p` to optimality or until a limit is hit.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    p.validate()?;
    if !p.signomials.is_empty() {
        return Err(SolveError::Signomial);
    }
    let n = p.num_vars();
    let (mut lo, mut up) = (p.lower.clone(), p.upper.clone());
    let mut s = Solver {
        p,
        cfg,
        start,
        root_lower: Vec::new(),
        root_upper: Vec::new(),
        base: LpData::from_problem(p),
        global_rows: Vec::new(),
        pool: Vec::new(),
        incumbent: None,
        stats: SolveStats::default(),
        pc: PseudoCostStore::new(n),
        counters: HistoryCounters::new(n),
        gmi_stats: GmiEffStats::new(n),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        next_id: 0,
        tol: Tolerances::default(),
    };
    if propagate_bounds(p, &mut lo, &mut up).is_err() {
        return Ok(s.finish(SolveStatus::Infeasible));
    }
    s.root_lower = lo;
    s.root_upper = up;

    if cfg.symmetry != SymmetryMode::None {
        match detect_symmetries(p, cfg.symmetry, cfg.symmetry_budget) {
            Ok(gens) => {
                s.stats.symmetry_generators = gens.len();
                if cfg.symmetry_handling == SymmetryHandling::Sst {
                    let cuts = sst_cuts(p, &gens, cfg.symmetry);
                    Solver::count(&mut s.stats.cuts_generated, "sst", cuts.len() as u64);
                    Solver::count(&mut s.stats.cuts_kept, "sst", cuts.len() as u64);
                    for c in cuts {
                        if cfg.record_cuts {
                            s.stats.kept_cuts.push(KeptCut {
                                cut: c.clone(),
                                local_box: None,
                            });
                        }
                        s.global_rows.push(c.to_row());
                    }
                }
            }
            Err(_) => s.stats.symmetry_failed = true,
        }
    }

    let root = Node {
        id: 0,
        depth: 0,
        changes: Vec::new(),
        basis: None,
        bound: f64::NEG_INFINITY,
        local_cuts: Vec::new(),
        branch: None,
        tie: 0,
    };
    let mut queue: BinaryHeap<Node> = BinaryHeap::new();
    let mut plunge: Option<Node> = Some(root);
    let mut plunge_depth = 0usize;
    loop {
        if plunge.is_none() && queue.is_empty() {
            break;
        }
        if cfg.node_limit.is_some_and(|l| s.stats.nodes >= l) {
            s.stats.dual_bound = s.dual_bound(&queue, plunge.as_ref());
            return Ok(s.finish(SolveStatus::NodeLimit));
        }
        if cfg.time_limit.is_some_and(|t| s.start.elapsed().as_secs_f64() >= t) {
            s.stats.dual_bound = s.dual_bound(&queue, plunge.as_ref());
            return Ok(s.finish(SolveStatus::TimeLimit));
        }
        let node = match plunge.take() {
            Some(n) => n,
            None => {
                plunge_depth = 0;
                queue.pop().expect("queue is nonempty")
            }
        };
        if node.bound >= s.cutoff() - PRUNE_TOL {
            continue;
        }
        s.stats.nodes += 1;
        match s.process(node)? {
            NodeResult::Pruned => {}
            NodeResult::Unbounded => return Ok(s.finish(SolveStatus::Unbounded)),
            NodeResult::Branched(children, preferred) => {
                if plunge_depth < 2 {
                    plunge_depth += 1;
                    for (i, c) in children.into_iter().enumerate() {
                        if i == preferred {
                            plunge = Some(c);
                        } else {
                            queue.push(c);
                        }
                    }
                } else {
                    queue.extend(children);
                }
            }
        }
        let db = s.dual_bound(&queue, plunge.as_ref());
        s.stats.dual_trace.push(db);
    }
    let status = if s.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    s.stats.dual_bound = s.cutoff();
    Ok(s.finish(status))
}

impl Solver<'_> {
    fn finish(mut self, status: SolveStatus) -> SolveOutcome {
        self.stats.wall_time = self.start.elapsed().as_secs_f64();
        self.stats.incumbent = self.incumbent.as_ref().map(|s| s.objective);
        if status == SolveStatus::Infeasible {
            self.stats.dual_bound = f64::INFINITY;
        }
        if status == SolveStatus::Unbounded {
            self.stats.dual_bound = f64::NEG_INFINITY;
        }
        self.stats.gap = match self.stats.incumbent {
            Some(pr) if self.stats.dual_bound.is_finite() => {
                Some((pr - self.stats.dual_bound) / pr.abs().max(1e-9))
            }
            _ => None,
        };
        SolveOutcome {
            status,
            solution: self.incumbent,
            stats: self.stats,
        }
    }
}
