mod common;

use std::collections::BTreeSet;

use cipkit::bench::{bracket_report, load_config, read_records, run_bench, shifted_geomean, BenchRecord, Unit, NODE_SHIFT, TIME_SHIFT};
use cipkit::cutsel::Selector;
use cipkit::search::BranchRule;
use common::{check_partition, configs, naive_sgm, strip_times, time_free_rows, to_record, write_instances};
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = (u8, u64, u8, f64, u64, i8)> {
    (0u8..6, 0u64..2, 0u8..4, 0.0f64..2000.0, 0u64..5000, -2i8..3)
}

proptest! {
    #[test]
    fn geomean_matches_naive_product(values in prop::collection::vec(0.0f64..1000.0, 1..30), big in any::<bool>()) {
        let s = if big { 100.0 } else { 1.0 };
        let got = shifted_geomean(&values, s).unwrap();
        let want = naive_sgm(&values, s);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn subsets_partition_the_units(
        base in prop::collection::vec(record_strategy(), 1..20),
        cand in prop::collection::vec(record_strategy(), 1..20),
    ) {
        let mut records: Vec<BenchRecord> = base.into_iter().map(|r| to_record("a", r)).collect();
        records.extend(cand.into_iter().map(|r| to_record("b", r)));
        records.sort_by(|x, y| (&x.instance, x.seed, &x.config).cmp(&(&y.instance, y.seed, &y.config)));
        records.dedup_by(|x, y| (&x.instance, x.seed, &x.config) == (&y.instance, y.seed, &y.config));
        let t = bracket_report(&records, "a", TIME_SHIFT, NODE_SHIFT).unwrap();
        check_partition(&t);
        let units: BTreeSet<Unit> = records.iter().map(|r| (r.instance.clone(), r.seed)).collect();
        prop_assert_eq!(t.row("all").unwrap().count() + t.inconsistent.len() + t.incomplete.len(), units.len());
    }
}

#[test]
fn bench_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write_instances(dir.path(), 10);
    let seeds = [0, 1];
    let mut buf = Vec::new();
    let first = run_bench(&instances, &seeds, &configs(), 60.0, &mut buf).unwrap();
    assert_eq!(first.len(), 40);
    assert_eq!(read_records(buf.as_slice()).unwrap(), first);
    let second = run_bench(&instances, &seeds, &configs(), 60.0, &mut Vec::new()).unwrap();
    assert_eq!(strip_times(&first), strip_times(&second));

    let t1 = bracket_report(&first, "base", TIME_SHIFT, NODE_SHIFT).unwrap();
    let t2 = bracket_report(&second, "base", TIME_SHIFT, NODE_SHIFT).unwrap();
    assert_eq!(time_free_rows(&t1), time_free_rows(&t2));
    assert!(t1.inconsistent.is_empty());
    assert_eq!(t1.row("all").unwrap().count(), 20);
    check_partition(&t1);
    let text = t1.to_string();
    for name in ["all", "affected", "[0,tilim]", "[1000,tilim]", "diff-timeouts", "both-solved"] {
        assert!(text.contains(name));
    }
}

#[test]
fn unreadable_instances_become_parse_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.cip");
    std::fs::write(&bad, "MINIMIZE\n  obj: x +\nEND\n").unwrap();
    let recs = run_bench(&[bad], &[0], &configs(), 1.0, &mut Vec::new()).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.status == "parse_error" && r.instance == "broken"));
}

#[test]
fn config_files_load_by_stem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fast.cfg");
    std::fs::write(&path, "cutsel = \"dynamic\"\nbranching = \"gmi\"\nmax_rounds = 1\n").unwrap();
    let (id, cfg) = load_config(&path).unwrap();
    assert_eq!(id, "fast");
    assert_eq!(cfg.cutsel, Selector::Dynamic);
    assert_eq!(cfg.branching, BranchRule::Gmi);
    assert_eq!(cfg.max_rounds, 1);
    std::fs::write(&path, "cutsel = \"nope\"\n").unwrap();
    assert!(load_config(&path).is_err());
}

#[test]
fn report_requires_two_configs() {
    let r = to_record("a", (0, 0, 0, 1.0, 1, 0));
    assert!(bracket_report(std::slice::from_ref(&r), "a", TIME_SHIFT, NODE_SHIFT).is_err());
    let mut r3 = vec![r.clone(), to_record("b", (0, 0, 0, 1.0, 1, 0)), to_record("c", (0, 0, 0, 1.0, 1, 0))];
    assert!(bracket_report(&r3, "a", TIME_SHIFT, NODE_SHIFT).is_err());
    r3.pop();
    assert!(bracket_report(&r3, "a", TIME_SHIFT, NODE_SHIFT).is_ok());
}
