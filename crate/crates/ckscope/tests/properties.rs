//! Property tests for the syntax layer and the semantic invariants that every
//! model must satisfy, driven by randomly generated formulas, substitutions
//! and small frames.

use std::collections::HashSet;

use proptest::prelude::*;

use ckscope::kripke::{enumerate_valuations, Relation};
use ckscope::syntax::{enumerate_formulas, match_schema, parse};
use ckscope::{Formula, Frame, Model, Substitution};

fn formula_strategy(props: &'static [&'static str]) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Bot),
        proptest::sample::select(props).prop_map(Formula::prop),
    ];
    leaf.prop_recursive(4, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.clone().prop_map(Formula::boxed),
            inner.prop_map(Formula::dia),
        ]
    })
}

/// A random valid frame on up to four worlds: a random generator set closed
/// into a preorder (never placing anything above the last world, the bomb)
/// and a random modal relation obeying the bomb-row law.
fn frame_strategy() -> impl Strategy<Value = Frame> {
    (2usize..=4).prop_flat_map(|n| {
        let pairs = n * n;
        (
            Just(n),
            proptest::collection::vec(any::<bool>(), pairs),
            proptest::collection::vec(any::<bool>(), pairs),
        )
            .prop_map(|(n, leq_bits, r_bits)| {
                let bomb = n - 1;
                let mut leq = Relation::empty(n);
                let mut r = Relation::empty(n);
                for x in 0..n {
                    for y in 0..n {
                        if x != bomb && leq_bits[x * n + y] {
                            leq.set(x, y);
                        }
                        if x != bomb && r_bits[x * n + y] {
                            r.set(x, y);
                        }
                    }
                }
                r.set(bomb, bomb);
                let names = (0..bomb)
                    .map(|i| format!("w{i}"))
                    .chain(["bomb".to_string()])
                    .collect();
                Frame::new(names, bomb, leq.reflexive_transitive_closure(), r, false)
                    .expect("constructed frames are valid")
            })
    })
}

proptest! {
    /// Printing then parsing is the identity on formulas.
    #[test]
    fn print_parse_round_trip(f in formula_strategy(&["p", "q", "r"])) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    /// Matching a schema against one of its own instances recovers the
    /// substitution, restricted to the propositions the schema mentions.
    #[test]
    fn match_recovers_substitution(
        s in formula_strategy(&["p", "q"]),
        a in formula_strategy(&["p", "q"]),
        b in formula_strategy(&["p", "q"]),
    ) {
        let mut sigma = Substitution::new();
        sigma.insert("p".to_string(), a);
        sigma.insert("q".to_string(), b);
        let instance = s.substitute(&sigma);
        let recovered = match_schema(&s, &instance);
        prop_assert!(recovered.is_some());
        let recovered = recovered.unwrap();
        for p in s.prop_names() {
            prop_assert_eq!(&recovered[&p], &sigma[&p]);
        }
        prop_assert_eq!(s.substitute(&recovered), instance);
    }

    /// Formulas survive the JSON round trip used by every file format.
    #[test]
    fn formula_serde_round_trip(f in formula_strategy(&["p", "q"])) {
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<Formula>(&json).unwrap(), f);
    }

    /// Frames survive their JSON round trip.
    #[test]
    fn frame_serde_round_trip(fr in frame_strategy()) {
        let json = serde_json::to_string(&fr).unwrap();
        prop_assert_eq!(serde_json::from_str::<Frame>(&json).unwrap(), fr);
    }

    /// Persistence and the bomb clause: every truth set in every model is an
    /// upset containing the bomb.
    #[test]
    fn truth_sets_are_upsets_containing_the_bomb(
        fr in frame_strategy(),
        f in formula_strategy(&["p"]),
    ) {
        for v in enumerate_valuations(&fr, &["p"]) {
            let m = Model::new(fr.clone(), v).unwrap();
            let ts = m.truth_set(&f);
            prop_assert!(ts.contains(fr.bomb()));
            prop_assert!(fr.is_upset(ts));
        }
    }
}

#[test]
fn enumeration_has_no_duplicates_and_respects_depth() {
    let mut seen = HashSet::new();
    for f in enumerate_formulas(&["p", "q"], 2) {
        assert!(f.depth() <= 2, "{f} exceeds the depth bound");
        assert!(seen.insert(f.to_string()), "duplicate emitted");
    }
    assert!(!seen.is_empty());
}
