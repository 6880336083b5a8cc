mod common;

use cipkit::gmi::efficacy;
use common::{extreme_points, gmi_rounds, gmi_tree, in_box, separated_point, suite};

#[test]
fn tree_gmi_cuts_never_separate_feasible_points() {
    let mut total = 0;
    for (it, p) in suite(21, 80).iter().enumerate() {
        let points = extreme_points(p);
        for tc in (0..3).flat_map(|rule| gmi_tree(p, 60, 3, rule)) {
            let pts = match &tc.local_box {
                Some((lo, up)) => in_box(&points, lo, up),
                None => points.clone(),
            };
            assert!(separated_point(&pts, &tc.cut).is_none(), "instance {it}: {:?}", tc.cut);
            assert!(tc.cut.efficacy > 0.0);
            assert!(efficacy(&tc.cut, &tc.x).unwrap() > 0.0);
            total += 1;
        }
    }
    assert!(total > 300, "only {total} cuts");
}

#[test]
fn root_rounds_with_integer_slacks_stay_valid() {
    let mut total = 0;
    for p in suite(22, 80) {
        let points = extreme_points(&p);
        for (cut, x) in gmi_rounds(&p, 5, true) {
            assert!(separated_point(&points, &cut).is_none());
            assert!(efficacy(&cut, &x).unwrap() > 0.0);
            total += 1;
        }
    }
    assert!(total > 0);
}
