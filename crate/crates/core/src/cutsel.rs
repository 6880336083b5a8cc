//! Cut selection: hybrid scoring with an orthogonality filter, the dynamic
//! pairwise-efficacy filter, and the ensemble selector.
//!
//! Selectors return indices into the candidate slice, in selection order.
//! Scores are compared on a 1e-9 grid with ties going to the lower index, so
//! positive rescaling of a candidate never changes the outcome.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::{quantize, PseudoCostStore};
use crate::gmi::Cut;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutSelError {
    #[error("cuts are antiparallel and jointly infeasible")]
    Incompatible,
    #[error("cut has zero norm")]
    ZeroNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Hybrid,
    Dynamic,
    Ensemble,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridWeights {
    pub w_eff: f64,
    pub w_intsup: f64,
    pub w_objpar: f64,
    pub w_dcd: f64,
}

impl Default for HybridWeights {
    fn default() -> Self {
        HybridWeights {
            w_eff: 1.0,
            w_intsup: 0.1,
            w_objpar: 0.1,
            w_dcd: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    Normal,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicConfig {
    pub mingain: f64,
    pub filtermode: FilterMode,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        DynamicConfig {
            mingain: 0.01,
            filtermode: FilterMode::Normal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub max_density: f64,
    pub parallelism_penalty: f64,
    /// Total nonzeros the selected cuts may add; `None` means ten per variable.
    pub nnz_budget: Option<usize>,
    pub w_pseudo: f64,
    pub w_sparsity: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            max_density: 0.4,
            parallelism_penalty: 0.2,
            nnz_budget: None,
            w_pseudo: 0.5,
            w_sparsity: 0.5,
        }
    }
}

/// LP data the scores refer to.
pub struct SelectionContext<'a> {
    pub x: &'a [f64],
    pub objective: &'a [f64],
    pub integer: &'a [bool],
    pub incumbent: Option<&'a [f64]>,
}

fn efficacy_at(cut: &Cut, x: &[f64]) -> f64 {
    let norm = cut.norm();
    if norm == 0.0 {
        f64::NEG_INFINITY
    } else {
        cut.violation(x) / norm
    }
}

/// Share of the cut's nonzeros on integer variables.
pub fn integer_support(cut: &Cut, integer: &[bool]) -> f64 {
    if cut.coeffs.is_empty() {
        return 0.0;
    }
    let k = cut.coeffs.iter().filter(|&&(j, _)| integer[j]).count();
    k as f64 / cut.coeffs.len() as f64
}

/// `|cos ∠(a, c)|`.
pub fn objective_parallelism(cut: &Cut, objective: &[f64]) -> f64 {
    let cn = objective.iter().map(|c| c * c).sum::<f64>().sqrt();
    let an = cut.norm();
    if cn == 0.0 || an == 0.0 {
        return 0.0;
    }
    let d: f64 = cut.coeffs.iter().map(|&(j, a)| a * objective[j]).sum();
    (d / (an * cn)).abs().min(1.0)
}

/// Violation at `x` measured along the unit direction from `x` to the
/// incumbent.
pub fn directed_cutoff_distance(cut: &Cut, x: &[f64], incumbent: &[f64]) -> f64 {
    let dir: Vec<f64> = incumbent.iter().zip(x).map(|(s, v)| s - v).collect();
    let dn = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    let an = cut.norm();
    if dn <= 1e-12 || an == 0.0 {
        return 0.0;
    }
    let along: f64 = cut.coeffs.iter().map(|&(j, a)| a * dir[j]).sum::<f64>() / dn;
    let denom = along.abs().max(1e-6 * an);
    cut.violation(x) / denom
}

pub fn score_hybrid(cut: &Cut, ctx: &SelectionContext, w: &HybridWeights) -> f64 {
    let mut s = w.w_eff * efficacy_at(cut, ctx.x);
    if w.w_intsup != 0.0 {
        s += w.w_intsup * integer_support(cut, ctx.integer);
    }
    if w.w_objpar != 0.0 {
        s += w.w_objpar * objective_parallelism(cut, ctx.objective);
    }
    if w.w_dcd != 0.0 {
        if let Some(inc) = ctx.incumbent {
            s += w.w_dcd * directed_cutoff_distance(cut, ctx.x, inc);
        }
    }
    s
}

/// Indices ordered by descending score, ties by index.
pub fn order_by_score(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(quantize(scores[i])), i));
    idx
}

/// Greedy filter over `order`: keeps a cut only if its orthogonality
/// `1 - |cos|` to every kept cut is at least `min_ortho`.
pub fn filter_orthogonality(cuts: &[Cut], order: &[usize], min_ortho: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &i in order {
        if kept
            .iter()
            .all(|&k| 1.0 - cuts[i].parallelism(&cuts[k]) >= min_ortho)
        {
            kept.push(i);
        }
    }
    kept
}

/// Hybrid selection: score, sort, filter for orthogonality, keep at most
/// `max_cuts`.
pub fn select_hybrid(
    cuts: &[Cut],
    ctx: &SelectionContext,
    w: &HybridWeights,
    min_ortho: f64,
    max_cuts: usize,
) -> Vec<usize> {
    let scores: Vec<f64> = cuts.iter().map(|c| score_hybrid(c, ctx, w)).collect();
    let order: Vec<usize> = order_by_score(&scores)
        .into_iter()
        .filter(|&i| efficacy_at(&cuts[i], ctx.x) > 0.0)
        .collect();
    let mut kept = filter_orthogonality(cuts, &order, min_ortho);
    kept.truncate(max_cuts);
    kept
}

/// Geometry of two violated cuts at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGeometry {
    pub distance: f64,
    /// Neither single-cut projection strictly satisfies the other cut.
    pub in_fan: bool,
}

pub fn pair_geometry(c1: &Cut, c2: &Cut, x: &[f64]) -> Result<PairGeometry, CutSelError> {
    let (n1, n2) = (c1.norm(), c2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(CutSelError::ZeroNorm);
    }
    let (v1, v2) = (c1.violation(x).max(0.0), c2.violation(x).max(0.0));
    let (g11, g22, g12) = (n1 * n1, n2 * n2, c1.dot(c2));
    let (e1, e2) = (v1 / n1, v2 / n2);
    // a2·(x - t a1) - b2 = v2 - t g12 with t = v1/g11
    let slack_after_1 = v2 - (v1 / g11) * g12;
    let slack_after_2 = v1 - (v2 / g22) * g12;
    let tol1 = 1e-12 * (1.0 + v2.abs()) + 1e-12 * n2;
    let tol2 = 1e-12 * (1.0 + v1.abs()) + 1e-12 * n1;
    let p1_ok = slack_after_1 <= tol1;
    let p2_ok = slack_after_2 <= tol2;
    let in_fan = !(slack_after_1 < -tol1) && !(slack_after_2 < -tol2);
    if p1_ok || p2_ok {
        return Ok(PairGeometry {
            distance: e1.max(e2),
            in_fan,
        });
    }
    let det = g11 * g22 - g12 * g12;
    if det <= 1e-12 * g11 * g22 {
        return Err(CutSelError::Incompatible);
    }
    // λ = G⁻¹ v, distance² = vᵀ G⁻¹ v
    let l1 = (g22 * v1 - g12 * v2) / det;
    let l2 = (g11 * v2 - g12 * v1) / det;
    let d2 = (l1 * v1 + l2 * v2).max(0.0);
    Ok(PairGeometry {
        distance: d2.sqrt().max(e1.max(e2)),
        in_fan,
    })
}

/// Distance from `x` to `{a1·z <= b1, a2·z <= b2}`.
pub fn pairwise_efficacy(c1: &Cut, c2: &Cut, x: &[f64]) -> Result<f64, CutSelError> {
    pair_geometry(c1, c2, x).map(|g| g.distance)
}

/// Dynamic filter over `order`: a candidate is kept if, against every kept
/// cut `i`, the pair improves on `i`'s efficacy by the factor `1 + mingain`
/// and `x` lies in the pair's intersection fan. In mode `f` the remaining
/// candidates are re-sorted by pairwise efficacy with the newest kept cut
/// after every acceptance.
pub fn filter_dynamic(cuts: &[Cut], order: &[usize], x: &[f64], cfg: &DynamicConfig) -> Vec<usize> {
    let effs: Vec<f64> = cuts.iter().map(|c| efficacy_at(c, x)).collect();
    let mut rest: Vec<usize> = order.iter().copied().filter(|&i| effs[i] > 0.0).collect();
    let mut kept: Vec<usize> = Vec::new();
    while !rest.is_empty() {
        let j = rest.remove(0);
        let accept = kept.iter().all(|&i| match pair_geometry(&cuts[i], &cuts[j], x) {
            Ok(g) => g.in_fan && g.distance >= (1.0 + cfg.mingain) * effs[i],
            Err(_) => false,
        });
        if !accept {
            continue;
        }
        kept.push(j);
        if cfg.filtermode == FilterMode::F && !rest.is_empty() {
            let keys: Vec<(i64, usize)> = rest
                .iter()
                .map(|&k| {
                    let d = pairwise_efficacy(&cuts[j], &cuts[k], x).unwrap_or(f64::NEG_INFINITY);
                    (quantize(d.max(-1e9)), k)
                })
                .collect();
            let mut keyed: Vec<(i64, usize)> = keys;
            keyed.sort_by_key(|&(s, k)| (std::cmp::Reverse(s), k));
            rest = keyed.into_iter().map(|(_, k)| k).collect();
        }
    }
    kept
}

/// Dynamic selection: hybrid order (efficacy-led default weights) followed by
/// the dynamic filter, keeping at most `max_cuts`.
pub fn select_dynamic(
    cuts: &[Cut],
    ctx: &SelectionContext,
    cfg: &DynamicConfig,
    max_cuts: usize,
) -> Vec<usize> {
    let w = HybridWeights::default();
    let scores: Vec<f64> = cuts.iter().map(|c| score_hybrid(c, ctx, &w)).collect();
    let mut kept = filter_dynamic(cuts, &order_by_score(&scores), ctx.x, cfg);
    kept.truncate(max_cuts);
    kept
}

/// Ensemble selection: density filter, composite score, parallelism penalty
/// against already selected cuts, nonzero budget.
pub fn select_ensemble(
    cuts: &[Cut],
    ctx: &SelectionContext,
    pseudo: &PseudoCostStore,
    cfg: &EnsembleConfig,
) -> Vec<usize> {
    let n = ctx.x.len();
    let budget = cfg.nnz_budget.unwrap_or(10 * n);
    let pc_scores: Vec<f64> = (0..n)
        .map(|j| {
            let f = ctx.x[j] - ctx.x[j].floor();
            if ctx.integer[j] {
                pseudo.score(j, f.clamp(1e-6, 1.0 - 1e-6))
            } else {
                0.0
            }
        })
        .collect();
    let pc_max = pc_scores.iter().copied().fold(0.0, f64::max);
    let w = HybridWeights::default();
    let mut base: Vec<(usize, f64)> = Vec::new();
    for (i, c) in cuts.iter().enumerate() {
        if c.nnz() == 0 || c.density > cfg.max_density || efficacy_at(c, ctx.x) <= 0.0 {
            continue;
        }
        let pc_term = if pc_max > 0.0 {
            c.coeffs.iter().map(|&(j, _)| pc_scores[j]).sum::<f64>() / (c.nnz() as f64 * pc_max)
        } else {
            0.0
        };
        let s = score_hybrid(c, ctx, &w) + cfg.w_pseudo * pc_term + cfg.w_sparsity * (1.0 - c.density);
        base.push((i, s));
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut used = 0usize;
    while !base.is_empty() {
        let mut best: Option<(usize, i64)> = None;
        for (pos, &(i, s)) in base.iter().enumerate() {
            let par = kept.iter().map(|&k| cuts[i].parallelism(&cuts[k])).fold(0.0, f64::max);
            let key = quantize(s * (1.0 - cfg.parallelism_penalty * par));
            if best.is_none_or(|(bp, bk)| key > bk || (key == bk && i < base[bp].0)) {
                best = Some((pos, key));
            }
        }
        let (pos, _) = best.expect("nonempty");
        let (i, _) = base.remove(pos);
        if used + cuts[i].nnz() > budget {
            break;
        }
        used += cuts[i].nnz();
        kept.push(i);
    }
    kept
}

/// Penalized ensemble score of `cut` given the already selected cuts.
pub fn ensemble_penalty(cut: &Cut, selected: &[&Cut], penalty: f64) -> f64 {
    let par = selected.iter().map(|k| cut.parallelism(k)).fold(0.0, f64::max);
    1.0 - penalty * par
}
