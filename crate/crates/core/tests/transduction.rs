mod common;

use common::transduction::{engine, oracle, random_input};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

#[test]
fn fixture_paths() {
    // first matching branch dead-ends, a sibling leaf recovers
    assert_eq!(engine(&toks("a b red")).as_deref(), Some("ab-color"));
    assert_eq!(engine(&toks("a c d")).as_deref(), Some("a-d"));
    // whole first subtree exhausted, recovery at the parent's sibling
    assert_eq!(engine(&toks("a b c x")).as_deref(), Some("c-mid"));
    assert_eq!(engine(&toks("a c x")).as_deref(), Some("a-three"));
    assert_eq!(engine(&toks("blue")).as_deref(), Some("one-color"));
    assert_eq!(engine(&toks("d d")), None);
}

proptest! {
    #[test]
    fn engine_matches_leaf_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = random_input(&mut rng);
        prop_assert_eq!(engine(&input), oracle(&input), "{:?}", input);
    }
}
