//! Benchmark runs over instances × seeds × configurations and the bracket
//! report aggregating them with shifted geometric means.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{parse_problem, FileFormat};
use crate::search::{solve, SolverConfig};

pub const TIME_SHIFT: f64 = 1.0;
pub const NODE_SHIFT: f64 = 100.0;
pub const BRACKETS: [f64; 5] = [0.0, 1.0, 10.0, 100.0, 1000.0];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("value {0} is negative")]
    Negative(f64),
    #[error("shift {0} is not positive")]
    BadShift(f64),
    #[error("baseline config `{0}` has no records")]
    MissingBaseline(String),
    #[error("expected exactly two configs, found {0:?}")]
    ConfigCount(Vec<String>),
    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },
    #[error("record line {line}: {source}")]
    Record { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `(∏(v_i + s))^{1/n} - s`, evaluated in log space.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    if !(shift > 0.0) {
        return Err(BenchError::BadShift(shift));
    }
    if let Some(&v) = values.iter().find(|&&v| !(v >= 0.0)) {
        return Err(BenchError::Negative(v));
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Ok((mean.exp() - shift).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub seed: u64,
    pub config: String,
    pub status: String,
    pub time_s: f64,
    pub nodes: u64,
    /// Objective in the sense the instance was written in.
    pub objective: Option<f64>,
    pub dual_bound: Option<f64>,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.status == "optimal" || self.status == "infeasible"
    }
}

/// Reads a TOML solver configuration; its id is the file stem.
pub fn load_config(path: &Path) -> Result<(String, SolverConfig), BenchError> {
    let err = |msg: String| BenchError::Config {
        path: path.display().to_string(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let cfg: SolverConfig = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| err("no file stem".into()))?;
    Ok((id, cfg))
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Solves every instance with every seed and config, writing one JSON line
/// per record to `out` as soon as it is available. Failures become status
/// rows (`parse_error`, `error`).
pub fn run_bench(
    instances: &[PathBuf],
    seeds: &[u64],
    configs: &[(String, SolverConfig)],
    time_limit: f64,
    out: &mut dyn Write,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut records = Vec::new();
    for path in instances {
        let name = instance_name(path);
        let parsed = FileFormat::from_path(path)
            .ok_or_else(|| "unknown file extension".to_string())
            .and_then(|f| parse_problem(path, f).map_err(|e| e.to_string()));
        for &seed in seeds {
            for (id, base) in configs {
                let mut rec = BenchRecord {
                    instance: name.clone(),
                    seed,
                    config: id.clone(),
                    status: "parse_error".into(),
                    time_s: 0.0,
                    nodes: 0,
                    objective: None,
                    dual_bound: None,
                };
                if let Ok(p) = &parsed {
                    let cfg = SolverConfig {
                        seed,
                        time_limit: Some(time_limit),
                        ..base.clone()
                    };
                    let start = Instant::now();
                    let res = solve(p, &cfg);
                    rec.time_s = start.elapsed().as_secs_f64();
                    match res {
                        Ok(o) => {
                            rec.status = o.status.as_str().into();
                            rec.nodes = o.stats.nodes;
                            rec.objective = o.solution.map(|s| p.external_objective(s.objective));
                            rec.dual_bound = o
                                .stats
                                .dual_bound
                                .is_finite()
                                .then(|| p.external_objective(o.stats.dual_bound));
                        }
                        Err(_) => rec.status = "error".into(),
                    }
                }
                serde_json::to_writer(&mut *out, &rec).map_err(io::Error::from)?;
                writeln!(out)?;
                out.flush()?;
                records.push(rec);
            }
        }
    }
    Ok(records)
}

pub fn read_records(reader: impl BufRead) -> Result<Vec<BenchRecord>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| BenchError::Record { line: i + 1, source })?);
    }
    Ok(out)
}

pub type Unit = (String, u64);

#[derive(Clone, Debug, PartialEq)]
pub struct BracketRow {
    pub name: String,
    pub members: Vec<Unit>,
    /// Solved counts for baseline and candidate.
    pub solved: [usize; 2],
    pub time: [Option<f64>; 2],
    pub nodes: [Option<f64>; 2],
    /// Baseline mean over candidate mean.
    pub time_ratio: Option<f64>,
    pub node_ratio: Option<f64>,
}

impl BracketRow {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    pub baseline: String,
    pub candidate: String,
    pub rows: Vec<BracketRow>,
    /// Units whose solved results disagree between the configs.
    pub inconsistent: Vec<Unit>,
    /// Units missing a record for one of the configs.
    pub incomplete: Vec<Unit>,
}

impl BracketTable {
    pub fn row(&self, name: &str) -> Option<&BracketRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

fn consistent(a: &BenchRecord, b: &BenchRecord) -> bool {
    if a.status == "optimal" && b.status == "optimal" {
        match (a.objective, b.objective) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-6 * x.abs().max(y.abs()).max(1.0),
            _ => false,
        }
    } else if a.solved() && b.solved() {
        a.status == b.status
    } else {
        true
    }
}

/// Aggregates the records of exactly two configs per (instance, seed) unit
/// into the subsets all, affected, `[t,tilim]`, diff-timeouts, both-solved
/// and both-unsolved.
pub fn bracket_report(
    records: &[BenchRecord],
    baseline: &str,
    time_shift: f64,
    node_shift: f64,
) -> Result<BracketTable, BenchError> {
    let configs: BTreeSet<&str> = records.iter().map(|r| r.config.as_str()).collect();
    if !configs.contains(baseline) {
        return Err(BenchError::MissingBaseline(baseline.into()));
    }
    if configs.len() != 2 {
        return Err(BenchError::ConfigCount(configs.iter().map(|s| s.to_string()).collect()));
    }
    let candidate = configs.iter().find(|&&c| c != baseline).expect("two configs").to_string();
    let mut by_unit: BTreeMap<Unit, [Option<&BenchRecord>; 2]> = BTreeMap::new();
    for r in records {
        let slot = usize::from(r.config != baseline);
        by_unit.entry((r.instance.clone(), r.seed)).or_default()[slot] = Some(r);
    }
    let mut pairs: Vec<(Unit, [&BenchRecord; 2])> = Vec::new();
    let mut inconsistent = Vec::new();
    let mut incomplete = Vec::new();
    for (unit, slots) in by_unit {
        match slots {
            [Some(a), Some(b)] if consistent(a, b) => pairs.push((unit, [a, b])),
            [Some(_), Some(_)] => inconsistent.push(unit),
            _ => incomplete.push(unit),
        }
    }

    let mut subsets: Vec<(String, Vec<usize>)> = Vec::new();
    let all: Vec<usize> = (0..pairs.len()).collect();
    let filter = |f: &dyn Fn(&[&BenchRecord; 2]) -> bool| -> Vec<usize> {
        all.iter().copied().filter(|&i| f(&pairs[i].1)).collect()
    };
    subsets.push(("all".into(), all.clone()));
    subsets.push((
        "affected".into(),
        filter(&|[a, b]| a.solved() != b.solved() || a.nodes != b.nodes),
    ));
    for t in BRACKETS {
        subsets.push((
            format!("[{t},tilim]"),
            filter(&|[a, b]| (a.solved() || b.solved()) && a.time_s.max(b.time_s) >= t),
        ));
    }
    subsets.push(("diff-timeouts".into(), filter(&|[a, b]| a.solved() != b.solved())));
    subsets.push(("both-solved".into(), filter(&|[a, b]| a.solved() && b.solved())));
    subsets.push(("both-unsolved".into(), filter(&|[a, b]| !a.solved() && !b.solved())));

    let rows = subsets
        .into_iter()
        .map(|(name, idx)| {
            let mean = |side: usize, f: &dyn Fn(&BenchRecord) -> f64, s: f64| {
                let v: Vec<f64> = idx.iter().map(|&i| f(pairs[i].1[side])).collect();
                shifted_geomean(&v, s).ok()
            };
            let time = [0, 1].map(|k| mean(k, &|r| r.time_s, time_shift));
            let nodes = [0, 1].map(|k| mean(k, &|r| r.nodes as f64, node_shift));
            let ratio = |m: [Option<f64>; 2], s: f64| match m {
                [Some(a), Some(b)] if b > 0.0 => Some(a / b),
                [Some(a), Some(b)] if a == b => Some(1.0),
                [Some(a), Some(b)] => Some((a + s) / (b + s)),
                _ => None,
            };
            BracketRow {
                members: idx.iter().map(|&i| pairs[i].0.clone()).collect(),
                solved: [0, 1].map(|k| idx.iter().filter(|&&i| pairs[i].1[k].solved()).count()),
                time_ratio: ratio(time, time_shift),
                node_ratio: ratio(nodes, node_shift),
                time,
                nodes,
                name,
            }
        })
        .collect();
    Ok(BracketTable {
        baseline: baseline.into(),
        candidate,
        rows,
        inconsistent,
        incomplete,
    })
}

fn cell(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

impl fmt::Display for BracketTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<15} {:>6} | {:>7} {:>9} {:>9} | {:>7} {:>9} {:>9} | {:>6} {:>6}",
            "subset", "count", "solved", "time", "nodes", "solved", "time", "nodes", "time", "nodes"
        )?;
        writeln!(
            f,
            "{:<15} {:>6} | {:^27} | {:^27} | {:^13}",
            "", "", self.baseline, self.candidate, "base/cand"
        )?;
        writeln!(f, "{}", "-".repeat(95))?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<15} {:>6} | {:>7} {:>9} {:>9} | {:>7} {:>9} {:>9} | {:>6} {:>6}",
                r.name,
                r.count(),
                r.solved[0],
                cell(r.time[0], 2),
                cell(r.nodes[0], 1),
                r.solved[1],
                cell(r.time[1], 2),
                cell(r.nodes[1], 1),
                cell(r.time_ratio, 2),
                cell(r.node_ratio, 2),
            )?;
        }
        if !self.inconsistent.is_empty() {
            writeln!(f, "inconsistent (excluded):")?;
            for (inst, seed) in &self.inconsistent {
                writeln!(f, "  {inst} seed {seed}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, config: &str, status: &str, time_s: f64, nodes: u64, obj: f64) -> BenchRecord {
        BenchRecord {
            instance: instance.into(),
            seed: 0,
            config: config.into(),
            status: status.into(),
            time_s,
            nodes,
            objective: Some(obj),
            dual_bound: Some(obj),
        }
    }

    #[test]
    fn geomean_examples() {
        assert!((shifted_geomean(&[1.0, 1.0], 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(shifted_geomean(&[0.0], 7.0).unwrap(), 0.0);
        let v = shifted_geomean(&[10.0, 1000.0], 1.0).unwrap();
        assert!((v - ((11.0f64 * 1001.0).sqrt() - 1.0)).abs() < 1e-9);
        assert!(matches!(shifted_geomean(&[], 1.0), Err(BenchError::Empty)));
        assert!(matches!(shifted_geomean(&[-1.0], 1.0), Err(BenchError::Negative(_))));
    }

    #[test]
    fn ratio_is_baseline_over_candidate() {
        let recs = vec![
            rec("a", "base", "optimal", 2.0, 5, 1.0),
            rec("b", "base", "optimal", 8.0, 5, 1.0),
            rec("a", "cand", "optimal", 4.0, 5, 1.0),
            rec("b", "cand", "optimal", 4.0, 5, 1.0),
        ];
        let t = bracket_report(&recs, "base", TIME_SHIFT, NODE_SHIFT).unwrap();
        let all = t.row("all").unwrap();
        let expected = (27f64.sqrt() - 1.0) / (25f64.sqrt() - 1.0);
        assert!((all.time_ratio.unwrap() - expected).abs() < 1e-12);
        assert_eq!(all.node_ratio, Some(1.0));
        assert_eq!(t.row("affected").unwrap().count(), 0);
    }

    #[test]
    fn solved_only_by_candidate_is_a_diff_timeout() {
        let recs = vec![
            rec("a", "base", "time_limit", 60.0, 900, 1.0),
            rec("a", "cand", "optimal", 3.0, 40, 1.0),
        ];
        let t = bracket_report(&recs, "base", TIME_SHIFT, NODE_SHIFT).unwrap();
        assert_eq!(t.row("diff-timeouts").unwrap().count(), 1);
        assert_eq!(t.row("[10,tilim]").unwrap().count(), 1);
        assert_eq!(t.row("both-solved").unwrap().count(), 0);
    }

    #[test]
    fn inconsistent_objectives_are_excluded() {
        let recs = vec![
            rec("a", "base", "optimal", 1.0, 1, 1.0),
            rec("a", "cand", "optimal", 1.0, 1, 2.0),
        ];
        let t = bracket_report(&recs, "base", TIME_SHIFT, NODE_SHIFT).unwrap();
        assert_eq!(t.inconsistent, vec![("a".to_string(), 0)]);
        assert_eq!(t.row("all").unwrap().count(), 0);
    }

    #[test]
    fn baseline_must_exist() {
        let recs = vec![rec("a", "x", "optimal", 1.0, 1, 1.0)];
        assert!(matches!(
            bracket_report(&recs, "base", TIME_SHIFT, NODE_SHIFT),
            Err(BenchError::MissingBaseline(_))
        ));
    }
}
