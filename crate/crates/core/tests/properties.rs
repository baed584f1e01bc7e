//! Property-based invariants: parser round-trips, trace-relation algebra,
//! search-outcome self-checking, and semantic lemmas on enumerated models.

use proptest::prelude::*;

use igl_core::cyclic::{check_progress, compose, TraceRel};
use igl_core::prover::{prove, SearchConfig, SearchOutcome};
use igl_core::semantics::{
    birel_satisfies, check_igl_birel_class, enumerate_igl_models, lift_interpretation,
    seq_satisfied, valid_interpretation, Interpretation,
};
use igl_core::sequent::DisjFormula;
use igl_core::{Formula, Label, LabelledFormula, Sequent, SystemId};

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::Bottom),
        Just(Formula::atom("p")),
        Just(Formula::atom("q")),
        Just(Formula::atom("r")),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.clone().prop_map(Formula::boxed),
            inner.prop_map(Formula::dia),
        ]
    })
}

fn trace_rel() -> impl Strategy<Value = TraceRel> {
    let labels = ["x", "y", "z"];
    proptest::collection::btree_map(
        (0..3usize, 0..3usize).prop_map(move |(a, b)| (Label::from(labels[a]), Label::from(labels[b]))),
        any::<bool>(),
        0..6,
    )
}

proptest! {
    #[test]
    fn formula_display_parses_back(f in formula()) {
        let text = f.to_string();
        let back = Formula::parse(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn sequent_display_parses_back(
        lhs in proptest::collection::vec((0..2usize, formula()), 0..3),
        rhs in (0..2usize, formula()),
        rel in proptest::collection::btree_set((0..2usize, 0..2usize), 0..3),
    ) {
        let labels = [Label::from("x"), Label::from("y")];
        let s = Sequent::new(
            rel.into_iter().map(|(a, b)| (labels[a].clone(), labels[b].clone())),
            lhs.into_iter().map(|(l, f)| DisjFormula::single(LabelledFormula {
                label: labels[l].clone(),
                formula: f,
            })),
            [DisjFormula::single(LabelledFormula {
                label: labels[rhs.0].clone(),
                formula: rhs.1,
            })],
        );
        let text = s.to_string();
        let back = Sequent::parse(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn trace_relation_composition_is_associative(
        a in trace_rel(), b in trace_rel(), c in trace_rel()
    ) {
        prop_assert_eq!(compose(&compose(&a, &b), &c), compose(&a, &compose(&b, &c)));
    }

    /// Every certificate the search produces passes both checkers, and
    /// provability implies truth in every small model.
    #[test]
    fn search_outcomes_are_self_checking(f in formula()) {
        let mut cfg = SearchConfig::for_system(SystemId::IK4);
        cfg.max_depth = 60;
        cfg.max_labels = 6;
        match prove(&f, &cfg) {
            SearchOutcome::Provable(p) => {
                p.check_local().unwrap();
                check_progress(&p).unwrap();
                for m in enumerate_igl_models(2, &["p".to_owned(), "q".to_owned()]) {
                    for w in 0..m.worlds.len() {
                        prop_assert!(birel_satisfies(&m, w, &f));
                    }
                }
            }
            SearchOutcome::Refutable(d) => d.validate().unwrap(),
            SearchOutcome::Unknown { .. } => {}
        }
    }

    /// Birelational satisfaction is monotone along the partial order.
    #[test]
    fn satisfaction_is_monotone(f in formula(), pick in any::<u64>()) {
        let models = enumerate_igl_models(2, &["p".to_owned(), "q".to_owned()]);
        let m = &models[(pick as usize) % models.len()];
        for &(w, w1) in &m.leq {
            if birel_satisfies(m, w, &f) {
                prop_assert!(birel_satisfies(m, w1, &f));
            }
        }
    }

    /// Lifting an interpretation keeps it valid and moves every label up.
    #[test]
    fn lifted_interpretations_stay_valid(f in formula(), pick in any::<u64>()) {
        let models = enumerate_igl_models(2, &["p".to_owned(), "q".to_owned()]);
        let m = &models[(pick as usize) % models.len()];
        let x = Label::from("x");
        let s = Sequent::goal("x", f);
        for w in 0..m.worlds.len() {
            let i: Interpretation = [(x.clone(), w)].into_iter().collect();
            for w1 in 0..m.worlds.len() {
                if !m.leq_holds(w, w1) {
                    continue;
                }
                let lifted = lift_interpretation(m, &s, &i, &x, w1).unwrap();
                prop_assert!(valid_interpretation(m, &lifted, &s));
                prop_assert_eq!(lifted[&x], w1);
                for (z, v) in &i {
                    prop_assert!(m.leq_holds(*v, lifted[z]), "lift moved {} down", z);
                }
            }
        }
    }
}

/// Larger model enumeration: every enumerated model is in the right frame
/// class and no two are identical.
#[test]
fn four_world_enumeration_is_sound_and_duplicate_free() {
    let models = enumerate_igl_models(4, &["p".to_owned()]);
    assert!(!models.is_empty());
    for m in &models {
        check_igl_birel_class(m).unwrap();
    }
    for (i, a) in models.iter().enumerate() {
        for b in &models[i + 1..] {
            assert_ne!(format!("{a:?}"), format!("{b:?}"), "duplicate model");
        }
    }
}
