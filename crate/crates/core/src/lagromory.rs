//! Relax-and-cut: dualize GMI cuts with nonnegative multipliers, improve the
//! multipliers by a stabilized subgradient method and harvest new GMI cuts
//! from every fresh optimal basis of the Lagrangian LP.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gmi::{separate_gmi, Cut, GmiContext};
use crate::lp::{dual_degeneracy, solve_lp, LpData, LpError, LpResult, LpStatus, VarStatus};
use crate::model::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LagromoryError {
    #[error("starting LP is not optimal")]
    NotOptimal,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallNorm {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LagromoryConfig {
    pub max_iters: usize,
    pub cuts_per_basis: usize,
    /// Weight of the best multipliers found so far in each update.
    pub kappa: f64,
    pub radius: f64,
    pub norm: BallNorm,
    pub stall_iters: usize,
    pub degeneracy_threshold: f64,
    pub lp_iter_limit: usize,
}

impl Default for LagromoryConfig {
    fn default() -> Self {
        LagromoryConfig {
            max_iters: 30,
            cuts_per_basis: 5,
            kappa: 0.5,
            radius: 1e4,
            norm: BallNorm::L2,
            stall_iters: 5,
            degeneracy_threshold: 0.5,
            lp_iter_limit: 50_000,
        }
    }
}

/// Runs only on optimal LPs whose dual degeneracy reaches the threshold.
pub fn should_run(res: &LpResult, cfg: &LagromoryConfig) -> bool {
    dual_degeneracy(res, &Tolerances::default()).is_ok_and(|d| d >= cfg.degeneracy_threshold)
}

/// Projects onto `{λ >= 0, ‖λ‖ <= radius}`.
pub fn project(lambda: &mut [f64], radius: f64, norm: BallNorm) {
    for v in lambda.iter_mut() {
        *v = v.max(0.0);
    }
    match norm {
        BallNorm::L2 => {
            let r = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > radius {
                lambda.iter_mut().for_each(|v| *v *= radius / r);
            }
        }
        BallNorm::L1 => {
            if lambda.iter().sum::<f64>() <= radius {
                return;
            }
            let mut sorted = lambda.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let (mut acc, mut theta) = (0.0, 0.0);
            for (k, &v) in sorted.iter().enumerate() {
                acc += v;
                let t = (acc - radius) / (k + 1) as f64;
                if v > t {
                    theta = t;
                }
            }
            lambda.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagromoryOutcome {
    /// Best Lagrangian bound, never below the starting LP bound.
    pub bound: f64,
    /// Distinct harvested cuts.
    pub cuts: Vec<Cut>,
    /// Lagrangian value per iteration, starting with `λ = 0`.
    pub values: Vec<f64>,
    /// Best bound after each iteration.
    pub trace: Vec<f64>,
}

fn cut_key(c: &Cut) -> Vec<i64> {
    let norm = c.norm();
    let mut k: Vec<i64> = c
        .coeffs
        .iter()
        .flat_map(|&(j, a)| [j as i64, (a / norm * 1e9).round() as i64])
        .collect();
    k.push((c.rhs / norm * 1e9).round() as i64);
    k
}

struct Harvest {
    seen_bases: HashSet<Vec<VarStatus>>,
    seen_cuts: HashSet<Vec<i64>>,
    cuts: Vec<Cut>,
}

impl Harvest {
    fn take(&mut self, res: &LpResult, lp: &LpData, gmi: &GmiContext, per_basis: usize) -> usize {
        if !self.seen_bases.insert(res.basis.status.clone()) {
            return 0;
        }
        let ctx = GmiContext {
            lp,
            x: &res.x,
            ..*gmi
        };
        let mut found = separate_gmi(res, &ctx);
        found.sort_by(|a, b| b.efficacy.total_cmp(&a.efficacy));
        let mut added = 0;
        for c in found {
            if added == per_basis {
                break;
            }
            if self.seen_cuts.insert(cut_key(&c)) {
                self.cuts.push(c);
                added += 1;
            }
        }
        added
    }
}

/// Relax-and-cut from the optimal LP `root` of `lp`. `gmi` supplies the
/// integrality and bound data for cut derivation (its `lp` and `x` fields
/// are replaced per basis). `incumbent` enables Polyak steps.
pub fn relax_and_cut(
    lp: &LpData,
    root: &LpResult,
    gmi: &GmiContext,
    incumbent: Option<f64>,
    cfg: &LagromoryConfig,
) -> Result<LagromoryOutcome, LagromoryError> {
    if root.status != LpStatus::Optimal {
        return Err(LagromoryError::NotOptimal);
    }
    let mut h = Harvest {
        seen_bases: HashSet::new(),
        seen_cuts: HashSet::new(),
        cuts: Vec::new(),
    };
    h.take(root, lp, gmi, cfg.cuts_per_basis);
    let mut lambda = vec![0.0; h.cuts.len()];
    let mut core = lambda.clone();
    let mut best = root.objective;
    let mut values = vec![root.objective];
    let mut trace = vec![best];
    let mut x = root.x.clone();
    let mut value = root.objective;
    let mut basis = root.basis.clone();
    let mut stall = 0;
    for k in 1..=cfg.max_iters {
        if h.cuts.is_empty() {
            break;
        }
        lambda.resize(h.cuts.len(), 0.0);
        core.resize(h.cuts.len(), 0.0);
        let g: Vec<f64> = h.cuts.iter().map(|c| c.activity(&x) - c.rhs).collect();
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 <= 1e-18 {
            break;
        }
        let step = match incumbent {
            Some(ub) if ub > value + 1e-9 => (ub - value) / g2,
            _ => 1.0 / k as f64,
        };
        for (l, gi) in lambda.iter_mut().zip(&g) {
            *l += step * gi;
        }
        project(&mut lambda, cfg.radius, cfg.norm);
        for (l, c) in lambda.iter_mut().zip(&core) {
            *l = (1.0 - cfg.kappa) * *l + cfg.kappa * c;
        }

        let mut data = lp.clone();
        for (c, &l) in h.cuts.iter().zip(&lambda) {
            if l == 0.0 {
                continue;
            }
            for &(j, a) in &c.coeffs {
                data.objective[j] += l * a;
            }
            data.obj_offset -= l * c.rhs;
        }
        let res = solve_lp(&data, Some(&basis), cfg.lp_iter_limit)?;
        if res.status != LpStatus::Optimal {
            break;
        }
        value = res.objective;
        values.push(value);
        if value > best + 1e-9 * (1.0 + best.abs()) {
            best = value;
            core.clone_from(&lambda);
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(best);
        h.take(&res, lp, gmi, cfg.cuts_per_basis);
        x.clone_from(&res.x);
        basis = res.basis;
        if stall >= cfg.stall_iters {
            break;
        }
    }
    Ok(LagromoryOutcome {
        bound: best,
        cuts: h.cuts,
        values,
        trace,
    })
}
