//! Random function-free stories for checking the pipeline against the
//! ground oracle.

use rand::seq::SliceRandom;
use rand::Rng;

use logicpo_core::syntax::{Formula, Term};

const CONSTANTS: [&str; 4] = ["a", "b", "c", "d"];
const PREDICATES: [(&str, usize); 5] = [("P", 1), ("Q", 1), ("R", 1), ("S", 2), ("T", 0)];

pub struct Vocabulary {
    pub constants: Vec<&'static str>,
    pub predicates: Vec<(&'static str, usize)>,
}

impl Vocabulary {
    pub fn random(rng: &mut impl Rng) -> Self {
        let k = rng.gen_range(1..=CONSTANTS.len());
        let constants = CONSTANTS[..k].to_vec();
        let mut predicates = PREDICATES.to_vec();
        predicates.shuffle(rng);
        predicates.truncate(rng.gen_range(2..=4));
        predicates.sort();
        Self { constants, predicates }
    }

    fn atom(&self, rng: &mut impl Rng, vars: &[&str]) -> Formula {
        let (p, arity) = *self.predicates.choose(rng).expect("non-empty");
        let args = (0..arity)
            .map(|_| {
                if !vars.is_empty() && rng.gen_bool(0.7) {
                    Term::var(*vars.choose(rng).expect("non-empty"))
                } else {
                    Term::cnst(*self.constants.choose(rng).expect("non-empty"))
                }
            })
            .collect();
        Formula::pred(p, args)
    }

    pub fn matrix(&self, rng: &mut impl Rng, vars: &[&str], depth: usize) -> Formula {
        if depth == 0 || rng.gen_bool(0.3) {
            let a = self.atom(rng, vars);
            return if rng.gen_bool(0.3) { Formula::not(a) } else { a };
        }
        let l = self.matrix(rng, vars, depth - 1);
        let r = self.matrix(rng, vars, depth - 1);
        match rng.gen_range(0..6) {
            0 => Formula::and(l, r),
            1 => Formula::or(l, r),
            2 => Formula::implies(l, r),
            3 => Formula::iff(l, r),
            4 => Formula::xor(l, r),
            _ => Formula::not(l),
        }
    }

    /// Prenex premise with an existential block before a universal block.
    pub fn premise(&self, rng: &mut impl Rng) -> Formula {
        match rng.gen_range(0..6) {
            0 => self.matrix(rng, &[], 2),
            1 | 2 => Formula::forall("x", self.matrix(rng, &["x"], 2)),
            3 => Formula::forall("x", Formula::forall("y", self.matrix(rng, &["x", "y"], 2))),
            4 => Formula::exists("x", self.matrix(rng, &["x"], 2)),
            _ => Formula::exists("x", Formula::forall("y", self.matrix(rng, &["x", "y"], 2))),
        }
    }

    /// A conclusion with at most one kind of quantifier, so both the
    /// conclusion and its negation stay inside the oracle's fragment.
    pub fn conclusion(&self, rng: &mut impl Rng) -> Formula {
        match rng.gen_range(0..3) {
            0 => self.matrix(rng, &[], 2),
            1 => Formula::forall("x", self.matrix(rng, &["x"], 1)),
            _ => Formula::exists("x", self.matrix(rng, &["x"], 1)),
        }
    }
}

pub fn random_story(rng: &mut impl Rng, premises: usize) -> (Vec<Formula>, Formula) {
    let v = Vocabulary::random(rng);
    let ps = (0..premises).map(|_| v.premise(rng)).collect();
    (ps, v.conclusion(rng))
}

const UNARY: [&str; 8] = ["Student", "Athlete", "Tall", "Rich", "Happy", "Employee", "Remote", "Manager"];
const NAMES: [&str; 3] = ["John", "Mary", "Sam"];

fn unary(rng: &mut impl Rng, t: Term) -> Formula {
    Formula::pred(*UNARY.choose(rng).expect("non-empty"), vec![t])
}

fn name(rng: &mut impl Rng) -> Term {
    Term::cnst(*NAMES.choose(rng).expect("non-empty"))
}

fn px(rng: &mut impl Rng) -> Formula {
    unary(rng, Term::var("x"))
}

fn fact(rng: &mut impl Rng) -> Formula {
    let n = name(rng);
    unary(rng, n)
}

/// Six premises shaped like hand-written reasoning stories: rule premises
/// over unary predicates, a few facts about named individuals and one
/// relation.
pub fn folio_story(rng: &mut impl Rng) -> (Vec<Formula>, Formula) {
    let all = |body: Formula| Formula::forall("x", body);
    let mut premises = Vec::with_capacity(6);
    for i in 0..6 {
        let f = if i < 4 {
            match rng.gen_range(0..6) {
                0 => all(Formula::implies(px(rng), px(rng))),
                1 => all(Formula::implies(Formula::and(px(rng), px(rng)), px(rng))),
                2 => all(Formula::implies(px(rng), Formula::or(px(rng), px(rng)))),
                3 => all(Formula::implies(px(rng), Formula::not(px(rng)))),
                4 => all(Formula::implies(px(rng), Formula::xor(px(rng), px(rng)))),
                _ => {
                    let n = name(rng);
                    all(Formula::implies(Formula::pred("Knows", vec![Term::var("x"), n]), px(rng)))
                }
            }
        } else {
            match rng.gen_range(0..5) {
                0 => fact(rng),
                1 => Formula::not(fact(rng)),
                2 => Formula::or(fact(rng), fact(rng)),
                3 => Formula::pred("Knows", vec![name(rng), name(rng)]),
                _ => Formula::exists("x", Formula::and(px(rng), px(rng))),
            }
        };
        premises.push(f);
    }
    let conclusion = match rng.gen_range(0..4) {
        0 => fact(rng),
        1 => Formula::not(fact(rng)),
        2 => Formula::and(fact(rng), fact(rng)),
        _ => all(Formula::implies(px(rng), px(rng))),
    };
    (premises, conclusion)
}
