mod common;

use cipkit::gmi::GmiContext;
use cipkit::lagromory::{relax_and_cut, BallNorm, LagromoryConfig};
use cipkit::LpData;
use common::{degenerate_instances, extreme_points, separated_point};

#[test]
fn bound_stays_between_lp_and_optimum() {
    let mut harvested = 0;
    for (k, (p, root, opt)) in degenerate_instances(71, 25).into_iter().enumerate() {
        let lp = LpData::from_problem(&p);
        let points = extreme_points(&p);
        let local = vec![false; lp.rows.len()];
        let ctx = GmiContext {
            lp: &lp,
            integer: &p.integer,
            global_lower: &p.lower,
            global_upper: &p.upper,
            local_rows: &local,
            x: &root.x,
            integer_slacks: false,
        };
        let cfg = LagromoryConfig {
            norm: if k % 2 == 0 { BallNorm::L2 } else { BallNorm::L1 },
            ..LagromoryConfig::default()
        };
        for incumbent in [None, Some(opt)] {
            let out = relax_and_cut(&lp, &root, &ctx, incumbent, &cfg).unwrap();
            for &b in &out.trace {
                assert!(b >= root.objective - 1e-9 && b <= opt + 1e-9, "{b} outside [{}, {opt}]", root.objective);
            }
            for c in &out.cuts {
                assert!(separated_point(&points, c).is_none());
            }
            harvested += out.cuts.len();
        }
    }
    assert!(harvested > 0);
}
