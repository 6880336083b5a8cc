mod common;

use std::collections::BTreeSet;

use cipkit::generate::random_symmetric;
use cipkit::model::parse_cip;
use cipkit::symmetry::{detect_symmetries, group_closure, verify_symmetry, SignedPerm, SymmetryMode, DEFAULT_NODE_BUDGET};
use common::all_signed_perms;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXAMPLE: &str = "\
MAXIMIZE
  obj: y + z
SUBJECT TO
  c1: -2 w + 2 x + 3 y + 3 z <= 4
BOUNDS
  w free
  x free
BINARY
  y z
END
";

fn brute_force_group(p: &cipkit::Problem, mode: SymmetryMode) -> BTreeSet<SignedPerm> {
    all_signed_perms(p.num_vars())
        .into_iter()
        .filter(|g| (mode == SymmetryMode::Signed || g.is_positive()) && verify_symmetry(p, g, mode))
        .collect()
}

fn detected_group(p: &cipkit::Problem, mode: SymmetryMode) -> BTreeSet<SignedPerm> {
    let gens = detect_symmetries(p, mode, DEFAULT_NODE_BUDGET).unwrap();
    for g in &gens {
        assert!(verify_symmetry(p, g, mode));
    }
    group_closure(&gens, p.num_vars(), 100_000)
}

#[test]
fn example_groups() {
    let p = parse_cip(EXAMPLE).unwrap();
    let idx = |n: &str| p.var_index(n).unwrap();
    let (w, x, y, z) = (idx("w"), idx("x"), idx("y"), idx("z"));
    let mut swap = SignedPerm::identity(4);
    swap.image[y] = (z, false);
    swap.image[z] = (y, false);
    let perm = detected_group(&p, SymmetryMode::Perm);
    assert_eq!(perm, group_closure(&[swap.clone()], 4, 100));

    let mut reflect = SignedPerm::identity(4);
    reflect.image[w] = (x, true);
    reflect.image[x] = (w, true);
    let signed = detected_group(&p, SymmetryMode::Signed);
    assert_eq!(signed, group_closure(&[swap, reflect.clone()], 4, 100));
    assert!(signed.contains(&reflect));
}

#[test]
fn signed_detection_is_complete_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for it in 0..60 {
        let p = random_symmetric(&mut rng, 1 + it % 4);
        assert_eq!(detected_group(&p, SymmetryMode::Signed), brute_force_group(&p, SymmetryMode::Signed), "{p:?}");
    }
}

#[test]
fn permutation_detection_is_complete_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for it in 0..60 {
        let p = random_symmetric(&mut rng, 1 + it % 5);
        assert_eq!(detected_group(&p, SymmetryMode::Perm), brute_force_group(&p, SymmetryMode::Perm), "{p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detected_generators_verify(seed in any::<u64>(), n in 1usize..7) {
        let p = random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n);
        for mode in [SymmetryMode::Perm, SymmetryMode::Signed] {
            for g in detect_symmetries(&p, mode, DEFAULT_NODE_BUDGET).unwrap() {
                prop_assert!(verify_symmetry(&p, &g, mode));
                prop_assert!(!g.is_identity());
            }
        }
    }

    #[test]
    fn signed_group_contains_permutation_group(seed in any::<u64>(), n in 1usize..5) {
        let p = random_symmetric(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let perm = detected_group(&p, SymmetryMode::Perm);
        let signed = detected_group(&p, SymmetryMode::Signed);
        prop_assert!(perm.is_subset(&signed));
    }
}
