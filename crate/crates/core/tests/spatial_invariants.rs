mod common;

use bwqa::spatial::Constants;
use common::invariants::{self, Check};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn holds(check: Check, seed: u64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check(&mut rng, &Constants::default()).map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn certainties_stay_in_unit_interval(seed in any::<u64>()) {
        holds(invariants::certainty_bounds, seed)?;
    }

    #[test]
    fn converse_relations_agree(seed in any::<u64>()) {
        holds(invariants::converses, seed)?;
    }

    #[test]
    fn touching_is_symmetric(seed in any::<u64>()) {
        holds(invariants::touching_symmetry, seed)?;
    }

    #[test]
    fn block_relations_ignore_translation(seed in any::<u64>()) {
        holds(invariants::translation_invariance, seed)?;
    }

    #[test]
    fn near_boost_keeps_ranking(seed in any::<u64>()) {
        holds(invariants::near_ranking, seed)?;
    }

    #[test]
    fn face_contact_is_unit_distance(seed in any::<u64>()) {
        holds(invariants::face_contact_distance, seed)?;
    }
}

#[test]
fn random_scenes_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 3..=6 {
        for _ in 0..50 {
            let s = common::random_scene(&mut rng, n);
            assert_eq!(s.blocks().len(), n);
            s.validate().unwrap();
        }
    }
}
