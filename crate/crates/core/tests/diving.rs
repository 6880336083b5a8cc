use cipkit::diving::{choose_and_fix, dive, indicator_score, DiveConfig, Fixing, IndicatorCandidate};
use cipkit::generate::semicontinuous_toy;
use cipkit::model::check_feasible;
use cipkit::{solve_lp, LpData, LpStatus, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn phi(xhat: f64, l: f64, u: f64) -> f64 {
    if xhat <= 0.0 || xhat > u || (l <= xhat && xhat <= u) {
        -1.0
    } else {
        100.0 * (l - xhat) / l
    }
}

proptest! {
    #[test]
    fn score_matches_piecewise_definition(xhat in -5.0f64..20.0, l in 0.1f64..10.0, width in 0.0f64..10.0) {
        let u = l + width;
        prop_assert_eq!(indicator_score(xhat, l, u).unwrap(), phi(xhat, l, u));
        prop_assert_eq!(indicator_score(xhat, l, f64::INFINITY).unwrap(), phi(xhat, l, f64::INFINITY));
    }

    #[test]
    fn fix_value_follows_the_half_activation_threshold(xhat in 0.001f64..0.999, l in 0.1f64..10.0) {
        let cand = IndicatorCandidate { binvar: 3, xhat: xhat * l, activation: l, upper: f64::INFINITY };
        let fix = choose_and_fix(&[cand]).unwrap().unwrap();
        let expected = if xhat * l >= 0.5 * l { 1.0 } else { 0.0 };
        prop_assert_eq!(fix, Fixing::Fix { var: 3, value: expected });
    }
}

#[test]
fn half_activation_fixes_to_one() {
    for l in [0.2, 1.0, 3.0, 7.5, 10.0] {
        let cand = IndicatorCandidate { binvar: 0, xhat: 0.5 * l, activation: l, upper: f64::INFINITY };
        assert_eq!(choose_and_fix(&[cand]).unwrap(), Some(Fixing::Fix { var: 0, value: 1.0 }));
        assert_eq!(indicator_score(0.5 * l, l, f64::INFINITY).unwrap(), 50.0);
    }
}

#[test]
fn dive_finds_feasible_semicontinuous_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for it in 0..20 {
        let p = semicontinuous_toy(&mut rng, 1 + it % 4);
        let lp = LpData::from_problem(&p);
        let root = solve_lp(&lp, None, 10_000).unwrap();
        assert_eq!(root.status, LpStatus::Optimal);
        let out = dive(&p, &lp, &root.x, &root.basis, &DiveConfig::default()).unwrap();
        let sol = out.solution.expect("dive found no solution");
        assert!(check_feasible(&p, &sol, &Tolerances::default()).is_feasible());
    }
}
