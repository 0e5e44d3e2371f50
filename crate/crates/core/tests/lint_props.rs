mod common;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logicpo_core::lint::{lint, DiagnosticKind};
use logicpo_core::oracle::classify;
use logicpo_core::prover::Budget;
use logicpo_core::story::{FolStory, Label};
use logicpo_core::syntax::{Formula, Term};

use common::ground::satisfiable;
use common::random::random_story;

fn rename_predicates(f: &Formula, prefix: &str) -> Formula {
    let r = |g: &Formula| Box::new(rename_predicates(g, prefix));
    match f {
        Formula::Pred(p, args) => Formula::Pred(format!("{prefix}{p}"), args.clone()),
        Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::Not(r(g)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Xor(a, b) => Formula::Xor(r(a), r(b)),
        Formula::Implies(a, b) => Formula::Implies(r(a), r(b)),
        Formula::Iff(a, b) => Formula::Iff(r(a), r(b)),
        Formula::ForAll(v, g) => Formula::ForAll(v.clone(), r(g)),
        Formula::Exists(v, g) => Formula::Exists(v.clone(), r(g)),
    }
}

fn story(rng: &mut ChaCha8Rng) -> FolStory {
    let k = rng.gen_range(1..=5);
    let (p, c) = random_story(rng, k);
    FolStory::new(p, c).unwrap()
}

#[test]
fn consistent_arities_never_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let s = story(&mut rng);
        assert!(lint(&s).iter().all(|d| d.kind != DiagnosticKind::ArityMismatch));
    }
    let s = FolStory::parse(&["all x. (Owns(x) -> P(x))", "Owns(a, b)"], "P(a)").unwrap();
    let d: Vec<_> = lint(&s).into_iter().filter(|d| d.kind == DiagnosticKind::ArityMismatch).collect();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].symbols, vec!["Owns"]);
    assert_eq!(d[0].formula_indices, vec![0, 1]);
}

/// Kind and symbols of every diagnostic, ignoring formula positions.
fn findings(s: &FolStory) -> Vec<(DiagnosticKind, Vec<String>)> {
    let mut out: Vec<_> = lint(s).into_iter().map(|d| (d.kind, d.symbols)).collect();
    out.sort();
    out
}

#[test]
fn premise_order_does_not_change_findings() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..300 {
        let s = story(&mut rng);
        let mut premises = s.premises.clone();
        premises.shuffle(&mut rng);
        let t = FolStory::new(premises, s.conclusion.clone()).unwrap();
        assert_eq!(findings(&s), findings(&t));
    }
}

#[test]
fn disjoint_conclusion_is_uncertain_unless_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    for _ in 0..300 {
        let s = story(&mut rng);
        let c = rename_predicates(&s.conclusion, "Z");
        let t = s.with_conclusion(c.clone());
        assert!(lint(&t).iter().any(|d| d.kind == DiagnosticKind::ConclusionVocabularyDisjoint));
        let (Some((premises_sat, _)), Some((c_sat, _)), Some((neg_sat, _))) = (
            satisfiable(&t.premises, 20),
            satisfiable(std::slice::from_ref(&c), 20),
            satisfiable(&[Formula::not(c.clone())], 20),
        ) else {
            continue;
        };
        if premises_sat && c_sat && neg_sat {
            assert_eq!(classify(&t, &Budget::default()).label, Label::Uncertain);
            checked += 1;
        }
    }
    assert!(checked >= 100, "{checked}");
}

#[test]
fn free_variables_are_reported() {
    let s = FolStory::new(vec![Formula::pred("P", vec![Term::var("x")])], Formula::pred("P", vec![Term::cnst("a")])).unwrap();
    let d: Vec<_> = lint(&s).into_iter().filter(|d| d.kind == DiagnosticKind::FreeVariableClosed).collect();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].formula_indices, vec![0]);
}
