//! Branching variable selection: GMI branching, the hybrid weighted-sum rule
//! with GMI efficacy terms, and most-fractional.

use serde::{Deserialize, Serialize};

use crate::gmi::{gmi_from_row, normalize_round, Cut, GmiContext};
use crate::lp::{tableau_row, LpResult};

pub const DEFAULT_MAX_CANDS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// Running per-variable record of normalized GMI efficacies.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GmiEffStats {
    pub avg: Vec<f64>,
    pub last: Vec<f64>,
    pub count: Vec<u64>,
}

impl GmiEffStats {
    pub fn new(n: usize) -> Self {
        GmiEffStats {
            avg: vec![0.0; n],
            last: vec![0.0; n],
            count: vec![0; n],
        }
    }

    /// Normalizes one separation round by its largest efficacy and folds the
    /// result into the averages. Variables absent from the round keep their
    /// values; a variable listed twice keeps its best efficacy.
    pub fn record_round(&mut self, round: &[(usize, f64)]) {
        if round.is_empty() {
            return;
        }
        let mut best: Vec<(usize, f64)> = Vec::new();
        for &(j, e) in round {
            match best.iter_mut().find(|(k, _)| *k == j) {
                Some((_, b)) => *b = b.max(e),
                None => best.push((j, e)),
            }
        }
        let effs: Vec<f64> = best.iter().map(|&(_, e)| e.max(0.0)).collect();
        let norm = normalize_round(&effs).expect("round is nonempty");
        for (&(j, _), v) in best.iter().zip(norm) {
            self.count[j] += 1;
            self.avg[j] += (v - self.avg[j]) / self.count[j] as f64;
            self.last[j] = v;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PseudoCostStore {
    pub down_sum: Vec<f64>,
    pub down_count: Vec<u64>,
    pub up_sum: Vec<f64>,
    pub up_count: Vec<u64>,
}

impl PseudoCostStore {
    pub fn new(n: usize) -> Self {
        PseudoCostStore {
            down_sum: vec![0.0; n],
            down_count: vec![0; n],
            up_sum: vec![0.0; n],
            up_count: vec![0; n],
        }
    }

    /// Records an objective `gain` observed after moving the LP value by
    /// `distance` in `dir`.
    pub fn update(&mut self, var: usize, dir: Direction, gain: f64, distance: f64) {
        if !(distance > 0.0) {
            return;
        }
        let per_unit = gain.max(0.0) / distance;
        match dir {
            Direction::Down => {
                self.down_sum[var] += per_unit;
                self.down_count[var] += 1;
            }
            Direction::Up => {
                self.up_sum[var] += per_unit;
                self.up_count[var] += 1;
            }
        }
    }

    fn sides(&self, dir: Direction) -> (&[f64], &[u64]) {
        match dir {
            Direction::Down => (&self.down_sum, &self.down_count),
            Direction::Up => (&self.up_sum, &self.up_count),
        }
    }

    pub fn has_history(&self) -> bool {
        self.down_count.iter().chain(&self.up_count).any(|&c| c > 0)
    }

    /// Average per-unit gain of `var`, or the mean over initialized variables
    /// if `var` has none (1 if nothing is initialized).
    pub fn estimate(&self, var: usize, dir: Direction) -> f64 {
        let (sum, count) = self.sides(dir);
        if count[var] > 0 {
            return sum[var] / count[var] as f64;
        }
        let (mut total, mut k) = (0.0, 0usize);
        for j in 0..sum.len() {
            if count[j] > 0 {
                total += sum[j] / count[j] as f64;
                k += 1;
            }
        }
        if k == 0 {
            1.0
        } else {
            total / k as f64
        }
    }

    /// Product score of the two child estimates at fractionality `frac`;
    /// zero while no history exists.
    pub fn score(&self, var: usize, frac: f64) -> f64 {
        if !self.has_history() {
            return 0.0;
        }
        let down = self.estimate(var, Direction::Down) * frac;
        let up = self.estimate(var, Direction::Up) * (1.0 - frac);
        down.max(1e-6) * up.max(1e-6)
    }
}

/// Per-variable history counters of the hybrid rule. Conflict counters stay
/// zero since there is no conflict analysis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistoryCounters {
    pub conflict_freq: Vec<f64>,
    pub conflict_len: Vec<f64>,
    pub fix_freq: Vec<f64>,
    pub infeas_freq: Vec<f64>,
    pub nl_count: Vec<f64>,
}

impl HistoryCounters {
    pub fn new(n: usize) -> Self {
        HistoryCounters {
            conflict_freq: vec![0.0; n],
            conflict_len: vec![0.0; n],
            fix_freq: vec![0.0; n],
            infeas_freq: vec![0.0; n],
            nl_count: vec![0.0; n],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridBranchWeights {
    pub w_pseudo: f64,
    pub w_conflict_freq: f64,
    pub w_conflict_len: f64,
    pub w_fixfreq: f64,
    pub w_infeasfreq: f64,
    pub w_nlcount: f64,
    pub gmiavgeffweight: f64,
    pub gmilasteffweight: f64,
}

impl Default for HybridBranchWeights {
    fn default() -> Self {
        HybridBranchWeights {
            w_pseudo: 1.0,
            w_conflict_freq: 0.01,
            w_conflict_len: 0.01,
            w_fixfreq: 0.01,
            w_infeasfreq: 0.01,
            w_nlcount: 0.01,
            gmiavgeffweight: 0.0,
            gmilasteffweight: 1e-5,
        }
    }
}

/// Candidate-set averages used to normalize each measure as `m / (m + avg)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeasureAverages {
    pub pseudo: f64,
    pub conflict_freq: f64,
    pub conflict_len: f64,
    pub fix_freq: f64,
    pub infeas_freq: f64,
    pub nl_count: f64,
}

fn normalized(m: f64, avg: f64) -> f64 {
    if m + avg > 0.0 {
        m / (m + avg)
    } else {
        0.0
    }
}

pub struct HybridInputs<'a> {
    pub stats: &'a GmiEffStats,
    pub pc: &'a PseudoCostStore,
    pub counters: &'a HistoryCounters,
    pub weights: &'a HybridBranchWeights,
}

impl HybridInputs<'_> {
    pub fn averages(&self, cands: &[(usize, f64)]) -> MeasureAverages {
        let k = cands.len().max(1) as f64;
        let mean = |f: &dyn Fn(usize, f64) -> f64| cands.iter().map(|&(j, fr)| f(j, fr)).sum::<f64>() / k;
        let c = self.counters;
        MeasureAverages {
            pseudo: mean(&|j, fr| self.pc.score(j, fr)),
            conflict_freq: mean(&|j, _| c.conflict_freq[j]),
            conflict_len: mean(&|j, _| c.conflict_len[j]),
            fix_freq: mean(&|j, _| c.fix_freq[j]),
            infeas_freq: mean(&|j, _| c.infeas_freq[j]),
            nl_count: mean(&|j, _| c.nl_count[j]),
        }
    }
}

/// Weighted sum of the normalized history measures plus the two GMI terms.
pub fn hybrid_score(var: usize, frac: f64, inp: &HybridInputs, avg: &MeasureAverages) -> f64 {
    let w = inp.weights;
    let c = inp.counters;
    w.w_pseudo * normalized(inp.pc.score(var, frac), avg.pseudo)
        + w.w_conflict_freq * normalized(c.conflict_freq[var], avg.conflict_freq)
        + w.w_conflict_len * normalized(c.conflict_len[var], avg.conflict_len)
        + w.w_fixfreq * normalized(c.fix_freq[var], avg.fix_freq)
        + w.w_infeasfreq * normalized(c.infeas_freq[var], avg.infeas_freq)
        + w.w_nlcount * normalized(c.nl_count[var], avg.nl_count)
        + w.gmiavgeffweight * inp.stats.avg[var]
        + w.gmilasteffweight * inp.stats.last[var]
}

/// Candidate with the highest hybrid score; ties go to the smallest index.
/// `cands` holds `(var, fractionality)` pairs.
pub fn hybrid_select(cands: &[(usize, f64)], inp: &HybridInputs) -> Option<usize> {
    let avg = inp.averages(cands);
    let mut best: Option<(usize, f64)> = None;
    for &(j, f) in cands {
        let s = hybrid_score(j, f, inp, &avg);
        let better = match best {
            None => true,
            Some((k, b)) => s > b || (s == b && j < k),
        };
        if better {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j)
}

/// Candidate closest to one half; ties go to the smallest index.
pub fn most_fractional(cands: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(j, f) in cands {
        let s = f.min(1.0 - f);
        if best.is_none_or(|(k, b)| s > b || (s == b && j < k)) {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmiBranchChoice {
    pub var: usize,
    pub cut: Option<Cut>,
    /// GMI efficacies of the scored candidates.
    pub scores: Vec<(usize, f64)>,
}

/// Branches on the candidate whose tableau row yields the most efficacious
/// GMI cut. At most `max_cands` candidates (lowest index first) are scored;
/// nonbasic candidates and rejected cuts score zero. Falls back to the most
/// fractional candidate when no cut is found.
pub fn gmi_branch_select(
    cands: &[(usize, f64)],
    res: &LpResult,
    ctx: &GmiContext,
    max_cands: usize,
) -> Option<GmiBranchChoice> {
    let mut sorted: Vec<(usize, f64)> = cands.to_vec();
    sorted.sort_by_key(|&(j, _)| j);
    sorted.truncate(max_cands);
    let mut scores = Vec::new();
    let mut best: Option<(usize, i64, Cut)> = None;
    for &(j, _) in &sorted {
        let cut = if res.is_basic(j) {
            tableau_row(ctx.lp, res, j).ok().and_then(|row| gmi_from_row(&row, ctx))
        } else {
            None
        };
        let eff = cut.as_ref().map_or(0.0, |c| c.efficacy);
        scores.push((j, eff));
        if let Some(cut) = cut {
            let key = quantize(eff);
            if best.as_ref().is_none_or(|(_, b, _)| key > *b) {
                best = Some((j, key, cut));
            }
        }
    }
    match best {
        Some((var, _, cut)) => Some(GmiBranchChoice {
            var,
            cut: Some(cut),
            scores,
        }),
        None => most_fractional(cands).map(|var| GmiBranchChoice {
            var,
            cut: None,
            scores,
        }),
    }
}

/// Score on a 1e-9 grid so that rounding noise cannot reorder ties.
pub fn quantize(v: f64) -> i64 {
    (v * 1e9).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_average_of_normalized_efficacies() {
        let mut s = GmiEffStats::new(3);
        s.record_round(&[(0, 0.8)]);
        assert_eq!((s.avg[0], s.last[0]), (1.0, 1.0));
        s.record_round(&[(0, 0.2), (1, 0.4)]);
        assert_eq!((s.avg[0], s.last[0]), (0.75, 0.5));
        assert_eq!(s.last[1], 1.0);
        assert_eq!((s.count[2], s.avg[2]), (0, 0.0));
    }

    #[test]
    fn pseudocost_updates() {
        let mut pc = PseudoCostStore::new(3);
        assert_eq!(pc.score(0, 0.5), 0.0);
        pc.update(0, Direction::Down, 1.0, 0.5);
        assert_eq!(pc.estimate(0, Direction::Down), 2.0);
        pc.update(1, Direction::Down, 4.0, 1.0);
        // uninitialized variable takes the average of initialized ones
        assert_eq!(pc.estimate(2, Direction::Down), 3.0);
        pc.update(2, Direction::Up, 0.0, 0.5);
        assert_eq!(pc.estimate(2, Direction::Up), 0.0);
    }

    #[test]
    fn last_efficacy_breaks_ties() {
        let n = 2;
        let mut stats = GmiEffStats::new(n);
        stats.last = vec![0.4, 1.0];
        let pc = PseudoCostStore::new(n);
        let counters = HistoryCounters::new(n);
        let only_last = HybridBranchWeights {
            w_pseudo: 0.0,
            w_conflict_freq: 0.0,
            w_conflict_len: 0.0,
            w_fixfreq: 0.0,
            w_infeasfreq: 0.0,
            w_nlcount: 0.0,
            gmiavgeffweight: 0.0,
            gmilasteffweight: 1.0,
        };
        let inp = HybridInputs {
            stats: &stats,
            pc: &pc,
            counters: &counters,
            weights: &only_last,
        };
        assert_eq!(hybrid_select(&[(0, 0.5), (1, 0.5)], &inp), Some(1));

        let mut pc = PseudoCostStore::new(n);
        pc.update(0, Direction::Down, 1.0, 0.5);
        pc.update(1, Direction::Down, 1.0, 0.5);
        let defaults = HybridBranchWeights::default();
        let inp = HybridInputs {
            stats: &stats,
            pc: &pc,
            counters: &counters,
            weights: &defaults,
        };
        assert_eq!(hybrid_select(&[(0, 0.5), (1, 0.5)], &inp), Some(1));
    }

    #[test]
    fn no_history_scores_zero_and_picks_first() {
        let n = 3;
        let stats = GmiEffStats::new(n);
        let pc = PseudoCostStore::new(n);
        let counters = HistoryCounters::new(n);
        let w = HybridBranchWeights::default();
        let inp = HybridInputs {
            stats: &stats,
            pc: &pc,
            counters: &counters,
            weights: &w,
        };
        let cands = [(2, 0.5), (1, 0.3)];
        let avg = inp.averages(&cands);
        assert_eq!(hybrid_score(2, 0.5, &inp, &avg), 0.0);
        assert_eq!(hybrid_select(&cands, &inp), Some(1));
    }

    #[test]
    fn most_fractional_prefers_half() {
        assert_eq!(most_fractional(&[(0, 0.1), (1, 0.45), (2, 0.55)]), Some(1));
    }
}
