//! Independent oracles shared by the integration tests and the acceptance
//! runner.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cipkit::bench::{BenchRecord, BracketTable, Unit};
use cipkit::cutsel::Selector;
use cipkit::generate::{random_milp, MilpParams};
use cipkit::model::write_cip;
use cipkit::search::{BranchRule, SolverConfig};
use cipkit::signomial::{Side, SignomialRelation, SignomialTerm};
use cipkit::lagromory::{should_run, LagromoryConfig};
use cipkit::model::brute_force_optimum;
use cipkit::gmi::{separate_gmi, GmiContext};
use cipkit::symmetry::SignedPerm;
use cipkit::{solve_lp, Cut, LpData, LpResult, LpStatus, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POINT_TOL: f64 = 1e-9;
pub const CUT_TOL: f64 = 1e-6;

pub fn suite_params(it: usize) -> MilpParams {
    MilpParams {
        max_int_ub: 1 + (it % 3) as i64,
        max_rows: 3 + it % 5,
        ..MilpParams::default()
    }
}

/// The enumerable MILP suite: `count` instances from a fixed seed.
pub fn suite(seed: u64, count: usize) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|it| random_milp(&mut rng, &suite_params(it))).collect()
}

fn integer_assignments(p: &Problem) -> Vec<Vec<f64>> {
    let ints: Vec<usize> = (0..p.num_vars()).filter(|&j| p.integer[j]).collect();
    let mut out = vec![vec![0.0; p.num_vars()]];
    for &j in &ints {
        let (lo, hi) = (p.lower[j].ceil() as i64, p.upper[j].floor() as i64);
        assert!(hi - lo < 1000, "integer domain too large to enumerate");
        out = out
            .into_iter()
            .flat_map(|x| {
                (lo..=hi).map(move |v| {
                    let mut y = x.clone();
                    y[j] = v as f64;
                    y
                })
            })
            .collect();
    }
    out
}

fn satisfies_rows(p: &Problem, x: &[f64]) -> bool {
    p.rows.iter().all(|r| {
        let act: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        let tol = POINT_TOL * (1.0 + act.abs());
        act >= r.lhs - tol && act <= r.rhs + tol
    })
}

/// Every vertex of the continuous slice over every integer assignment of a
/// problem with at most two bounded continuous variables. A linear
/// inequality is valid for the mixed-integer set iff it holds at all of them.
pub fn extreme_points(p: &Problem) -> Vec<Vec<f64>> {
    let cont: Vec<usize> = (0..p.num_vars()).filter(|&j| !p.integer[j]).collect();
    assert!(cont.len() <= 2, "oracle handles at most two continuous variables");
    for &j in &cont {
        assert!(p.lower[j].is_finite() && p.upper[j].is_finite());
    }
    // hyperplanes g·x_C = h over the continuous coordinates
    let mut out = Vec::new();
    for base in integer_assignments(p) {
        if cont.is_empty() {
            if satisfies_rows(p, &base) {
                out.push(base);
            }
            continue;
        }
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for (k, &j) in cont.iter().enumerate() {
            let mut g = vec![0.0; cont.len()];
            g[k] = 1.0;
            planes.push((g.clone(), p.lower[j]));
            planes.push((g, p.upper[j]));
        }
        for r in &p.rows {
            let g: Vec<f64> = cont
                .iter()
                .map(|&j| r.coeffs.iter().find(|&&(i, _)| i == j).map_or(0.0, |&(_, a)| a))
                .collect();
            if g.iter().all(|&a| a == 0.0) {
                continue;
            }
            let fixed: f64 = r.coeffs.iter().filter(|&&(j, _)| p.integer[j]).map(|&(j, a)| a * base[j]).sum();
            for side in [r.lhs, r.rhs] {
                if side.is_finite() {
                    planes.push((g.clone(), side - fixed));
                }
            }
        }
        let mut push = |xc: &[f64]| {
            let mut x = base.clone();
            for (k, &j) in cont.iter().enumerate() {
                x[j] = xc[k];
            }
            let in_box = cont
                .iter()
                .all(|&j| x[j] >= p.lower[j] - POINT_TOL && x[j] <= p.upper[j] + POINT_TOL);
            if in_box && satisfies_rows(p, &x) {
                out.push(x);
            }
        };
        if cont.len() == 1 {
            for (g, h) in &planes {
                push(&[h / g[0]]);
            }
        } else {
            for a in 0..planes.len() {
                for b in a + 1..planes.len() {
                    let ((g1, h1), (g2, h2)) = (&planes[a], &planes[b]);
                    let det = g1[0] * g2[1] - g1[1] * g2[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    push(&[(h1 * g2[1] - g1[1] * h2) / det, (g1[0] * h2 - h1 * g2[0]) / det]);
                }
            }
        }
    }
    out
}

/// First point the cut separates by more than `CUT_TOL` in Euclidean distance.
pub fn separated_point<'a>(points: &'a [Vec<f64>], cut: &Cut) -> Option<&'a Vec<f64>> {
    let norm = cut.norm();
    points.iter().find(|x| (cut.activity(x) - cut.rhs) / norm > CUT_TOL)
}

/// Rounds of root GMI separation where every cut found is appended to the
/// LP before the next solve. Returns each cut with its generating LP point.
pub fn gmi_rounds(p: &Problem, rounds: usize, integer_slacks: bool) -> Vec<(Cut, Vec<f64>)> {
    let mut lp = LpData::from_problem(p);
    let (lower, upper) = (p.lower.clone(), p.upper.clone());
    let mut out = Vec::new();
    for _ in 0..rounds {
        let res = match solve_lp(&lp, None, 100_000) {
            Ok(r) if r.status == LpStatus::Optimal => r,
            _ => break,
        };
        let local = vec![false; lp.rows.len()];
        let ctx = GmiContext {
            lp: &lp,
            integer: &p.integer,
            global_lower: &lower,
            global_upper: &upper,
            local_rows: &local,
            x: &res.x,
            integer_slacks,
        };
        let cuts = separate_gmi(&res, &ctx);
        if cuts.is_empty() {
            break;
        }
        for c in cuts {
            lp.add_row(c.to_row());
            out.push((c, res.x.clone()));
        }
    }
    out
}

/// Euclidean projection of `x` onto `{a1·z <= b1} ∩ {a2·z <= b2}` by
/// Dykstra's alternating projections.
pub fn dykstra(a1: &[f64], b1: f64, a2: &[f64], b2: f64, x: &[f64]) -> Vec<f64> {
    fn proj(a: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
        let act: f64 = a.iter().zip(y).map(|(u, v)| u * v).sum();
        let nn: f64 = a.iter().map(|u| u * u).sum();
        let t = ((act - b) / nn).max(0.0);
        y.iter().zip(a).map(|(v, u)| v - t * u).collect()
    }
    let n = x.len();
    let (mut z, mut p, mut q) = (x.to_vec(), vec![0.0; n], vec![0.0; n]);
    for _ in 0..1_000_000 {
        let yin: Vec<f64> = (0..n).map(|i| z[i] + p[i]).collect();
        let y = proj(a1, b1, &yin);
        p = (0..n).map(|i| yin[i] - y[i]).collect();
        let zin: Vec<f64> = (0..n).map(|i| y[i] + q[i]).collect();
        let znew = proj(a2, b2, &zin);
        q = (0..n).map(|i| zin[i] - znew[i]).collect();
        let step: f64 = (0..n).map(|i| (znew[i] - z[i]).powi(2)).sum::<f64>().sqrt();
        z = znew;
        if step < 1e-15 {
            break;
        }
    }
    z
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// All `2ⁿ·n!` signed permutations of `n` coordinates.
pub fn all_signed_perms(n: usize) -> Vec<SignedPerm> {
    let mut out = Vec::new();
    for perm in permutations(n) {
        for mask in 0..(1usize << n) {
            let image = perm.iter().enumerate().map(|(i, &j)| (j, mask >> i & 1 == 1)).collect();
            out.push(SignedPerm { image });
        }
    }
    out
}

/// `(∏(v_i + s))^{1/n} - s` by a direct product.
pub fn naive_sgm(values: &[f64], s: f64) -> f64 {
    let prod: f64 = values.iter().map(|v| v + s).product();
    prod.powf(1.0 / values.len() as f64) - s
}

/// A GMI cut with the LP point it was derived at and, for local cuts, the
/// integer box it is valid in.
pub struct TreeCut {
    pub cut: Cut,
    pub x: Vec<f64>,
    pub local_box: Option<(Vec<f64>, Vec<f64>)>,
}

/// GMI cuts separated at up to `max_nodes` nodes of a depth-first
/// branching tree. `rule` picks the branching variable among the fractional
/// ones: 0 takes the first, 1 the last, 2 the most fractional. Each node runs
/// `rounds` separation rounds, appending its cuts as rows.
pub fn gmi_tree(p: &Problem, max_nodes: usize, rounds: usize, rule: usize) -> Vec<TreeCut> {
    let base = LpData::from_problem(p);
    let mut stack = vec![(p.lower.clone(), p.upper.clone())];
    let mut out = Vec::new();
    let mut nodes = 0;
    while let Some((lo, up)) = stack.pop() {
        if nodes == max_nodes {
            break;
        }
        nodes += 1;
        let mut lp = base.clone();
        lp.col_lower.clone_from(&lo);
        lp.col_upper.clone_from(&up);
        let mut local = vec![false; base.rows.len()];
        let mut first_x = None;
        for _ in 0..rounds {
            let res = match solve_lp(&lp, None, 100_000) {
                Ok(r) if r.status == LpStatus::Optimal => r,
                _ => break,
            };
            let ctx = GmiContext {
                lp: &lp,
                integer: &p.integer,
                global_lower: &p.lower,
                global_upper: &p.upper,
                local_rows: &local,
                x: &res.x,
                integer_slacks: nodes % 2 == 0,
            };
            let cuts = separate_gmi(&res, &ctx);
            first_x.get_or_insert_with(|| res.x.clone());
            if cuts.is_empty() {
                break;
            }
            for cut in cuts {
                lp.add_row(cut.to_row());
                local.push(cut.local);
                let local_box = cut.local.then(|| (lo.clone(), up.clone()));
                out.push(TreeCut {
                    cut,
                    x: res.x.clone(),
                    local_box,
                });
            }
        }
        let Some(x) = first_x else { continue };
        let fracs: Vec<usize> = (0..p.num_vars())
            .filter(|&j| p.integer[j] && (x[j] - x[j].round()).abs() > 1e-6)
            .collect();
        let pick = match rule {
            0 => fracs.first().copied(),
            1 => fracs.last().copied(),
            _ => fracs.iter().copied().max_by(|&a, &b| {
                let d = |j: usize| 0.5 - (x[j] - x[j].floor() - 0.5).abs();
                d(a).total_cmp(&d(b)).then(b.cmp(&a))
            }),
        };
        if let Some(j) = pick {
            let (mut dn, mut upc) = ((lo.clone(), up.clone()), (lo, up));
            dn.1[j] = x[j].floor();
            upc.0[j] = x[j].ceil();
            stack.push(dn);
            stack.push(upc);
        }
    }
    out
}

/// Points of `points` inside the box.
pub fn in_box(points: &[Vec<f64>], lo: &[f64], up: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|x| x.iter().enumerate().all(|(j, &v)| v >= lo[j] - POINT_TOL && v <= up[j] + POINT_TOL))
        .cloned()
        .collect()
}

/// Feasible enumerable instances whose root LP is at least half dual degenerate.
pub fn degenerate_instances(seed: u64, count: usize) -> Vec<(Problem, LpResult, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = LagromoryConfig::default();
    let mut out = Vec::new();
    let mut it = 0;
    while out.len() < count {
        let p = random_milp(&mut rng, &suite_params(it));
        it += 1;
        assert!(it < 100_000, "not enough degenerate instances");
        let root = solve_lp(&LpData::from_problem(&p), None, 100_000).unwrap();
        if root.status != LpStatus::Optimal || !should_run(&root, &cfg) {
            continue;
        }
        if let Some(opt) = brute_force_optimum(&p, 1 << 20).unwrap() {
            out.push((p, root, opt.objective));
        }
    }
    out
}

pub const GRID: usize = 21;

/// Random term over `x_0..x_{n-1}` with `t = x_n`, boxes inside `[0.5, 4]`
/// and at most two variables on either side of the lifted form.
pub fn random_term(rng: &mut ChaCha8Rng) -> SignomialTerm {
    loop {
        let n = rng.gen_range(1..=3);
        let exponents: Vec<f64> = (0..n)
            .map(|_| {
                let e = rng.gen_range(0.25..2.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (e * 4.0f64).round() / 4.0
            })
            .collect();
        let pos = exponents.iter().filter(|&&e| e > 0.0).count();
        if exponents.contains(&0.0) || pos > 2 || n - pos + 1 > 2 {
            continue;
        }
        let (mut lower, mut upper) = (vec![], vec![]);
        for _ in 0..n {
            let a: f64 = rng.gen_range(0.5..3.5);
            lower.push(a);
            upper.push(rng.gen_range(a + 0.25..=4.0));
        }
        let relation = match rng.gen_range(0..3) {
            0 => SignomialRelation::Equal,
            1 => SignomialRelation::TermAtMost,
            _ => SignomialRelation::TermAtLeast,
        };
        let mut term = SignomialTerm {
            vars: (0..n).collect(),
            exponents,
            aux: n,
            relation,
            lower,
            upper,
            t_lower: 0.0,
            t_upper: 0.0,
        };
        let (lo, hi) = term.monomial_range();
        term.t_lower = lo;
        term.t_upper = hi;
        return term;
    }
}

pub fn grid_points(term: &SignomialTerm) -> Vec<Vec<f64>> {
    let mut lo = term.lower.clone();
    let mut hi = term.upper.clone();
    lo.push(term.t_lower);
    hi.push(term.t_upper);
    let mut out = vec![vec![]];
    for k in 0..lo.len() {
        out = out
            .into_iter()
            .flat_map(|z: Vec<f64>| {
                let (l, h) = (lo[k], hi[k]);
                (0..GRID).map(move |i| {
                    let mut y = z.clone();
                    y.push(l + (h - l) * i as f64 / (GRID - 1) as f64);
                    y
                })
            })
            .collect();
    }
    out
}

pub fn on_side(term: &SignomialTerm, side: Side, z: &[f64]) -> bool {
    let (m, t) = (term.monomial(z), z[term.aux]);
    match side {
        Side::S1 => m <= t,
        Side::S2 => m >= t,
    }
}

pub fn random_point(term: &SignomialTerm, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut z: Vec<f64> = (0..term.vars.len()).map(|k| rng.gen_range(term.lower[k]..=term.upper[k])).collect();
    z.push(rng.gen_range(term.t_lower..=term.t_upper));
    z
}

pub fn members(t: &BracketTable, name: &str) -> BTreeSet<Unit> {
    t.row(name).unwrap().members.iter().cloned().collect()
}

pub fn check_partition(t: &BracketTable) {
    let all = members(t, "all");
    let parts = ["both-solved", "diff-timeouts", "both-unsolved"].map(|n| members(t, n));
    assert_eq!(parts.iter().map(|s| s.len()).sum::<usize>(), all.len());
    let union: BTreeSet<Unit> = parts.iter().flatten().cloned().collect();
    assert_eq!(union, all);
    assert!(members(t, "affected").is_subset(&all));
    let brackets = ["[0,tilim]", "[1,tilim]", "[10,tilim]", "[100,tilim]", "[1000,tilim]"].map(|n| members(t, n));
    for w in brackets.windows(2) {
        assert!(w[1].is_subset(&w[0]));
    }
    let solved_somewhere: BTreeSet<Unit> = parts[0].union(&parts[1]).cloned().collect();
    assert_eq!(brackets[0], solved_somewhere);
}

pub fn to_record(config: &str, (inst, seed, status, time, nodes, obj): (u8, u64, u8, f64, u64, i8)) -> BenchRecord {
    let status = ["optimal", "infeasible", "time_limit", "node_limit"][status as usize];
    BenchRecord {
        instance: format!("i{inst}"),
        seed,
        config: config.into(),
        status: status.into(),
        time_s: time,
        nodes,
        objective: (status != "infeasible").then_some(obj as f64),
        dual_bound: None,
    }
}

pub fn write_instances(dir: &std::path::Path, count: usize) -> Vec<PathBuf> {
    suite(91, count)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let path = dir.join(format!("inst{i:02}.cip"));
            std::fs::write(&path, write_cip(p)).unwrap();
            path
        })
        .collect()
}

pub fn configs() -> Vec<(String, SolverConfig)> {
    vec![
        ("base".into(), SolverConfig { branching: BranchRule::Mostfrac, ..SolverConfig::default() }),
        ("cand".into(), SolverConfig { cutsel: Selector::Ensemble, ..SolverConfig::default() }),
    ]
}

pub fn strip_times(records: &[BenchRecord]) -> Vec<BenchRecord> {
    records.iter().map(|r| BenchRecord { time_s: 0.0, ..r.clone() }).collect()
}

pub fn time_free_rows(t: &BracketTable) -> Vec<(String, Vec<Unit>, [usize; 2], [Option<f64>; 2])> {
    t.rows
        .iter()
        .filter(|r| !r.name.starts_with('[') || r.name == "[0,tilim]")
        .map(|r| (r.name.clone(), r.members.clone(), r.solved, r.nodes))
        .collect()
}
