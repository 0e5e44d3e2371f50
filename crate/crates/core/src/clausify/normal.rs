use std::collections::BTreeSet;

use crate::syntax::{Formula, Term};

/// Wraps the free variables of `f` in universal quantifiers, first-occurring
/// variable outermost. Closed input is returned unchanged.
pub fn close_free(f: &Formula) -> Formula {
    f.free_vars()
        .into_iter()
        .rev()
        .fold(f.clone(), |acc, v| Formula::forall(v, acc))
}

/// Negation normal form: only conjunction, disjunction, quantifiers, and
/// negation directly above atoms remain.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => {
            if positive {
                f.clone()
            } else {
                Formula::not(f.clone())
            }
        }
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(l, r) if positive => Formula::and(nnf(l, true), nnf(r, true)),
        Formula::And(l, r) => Formula::or(nnf(l, false), nnf(r, false)),
        Formula::Or(l, r) if positive => Formula::or(nnf(l, true), nnf(r, true)),
        Formula::Or(l, r) => Formula::and(nnf(l, false), nnf(r, false)),
        Formula::Implies(l, r) if positive => Formula::or(nnf(l, false), nnf(r, true)),
        Formula::Implies(l, r) => Formula::and(nnf(l, true), nnf(r, false)),
        Formula::Iff(l, r) if positive => Formula::and(
            Formula::or(nnf(l, false), nnf(r, true)),
            Formula::or(nnf(l, true), nnf(r, false)),
        ),
        Formula::Iff(l, r) => Formula::or(
            Formula::and(nnf(l, true), nnf(r, false)),
            Formula::and(nnf(l, false), nnf(r, true)),
        ),
        Formula::Xor(l, r) if positive => Formula::or(
            Formula::and(nnf(l, true), nnf(r, false)),
            Formula::and(nnf(l, false), nnf(r, true)),
        ),
        Formula::Xor(l, r) => Formula::and(
            Formula::or(nnf(l, false), nnf(r, true)),
            Formula::or(nnf(l, true), nnf(r, false)),
        ),
        Formula::ForAll(v, g) if positive => Formula::forall(v.clone(), nnf(g, true)),
        Formula::ForAll(v, g) => Formula::exists(v.clone(), nnf(g, false)),
        Formula::Exists(v, g) if positive => Formula::exists(v.clone(), nnf(g, true)),
        Formula::Exists(v, g) => Formula::forall(v.clone(), nnf(g, false)),
    }
}

fn free_in(v: &str, f: &Formula) -> bool {
    f.free_vars().iter().any(|x| x == v)
}

/// Pushes quantifiers of an NNF formula as far inward as possible and drops
/// vacuous ones.
pub fn miniscope(f: &Formula) -> Formula {
    match f {
        Formula::And(l, r) => Formula::and(miniscope(l), miniscope(r)),
        Formula::Or(l, r) => Formula::or(miniscope(l), miniscope(r)),
        Formula::ForAll(v, g) => push_forall(v, miniscope(g)),
        Formula::Exists(v, g) => push_exists(v, miniscope(g)),
        _ => f.clone(),
    }
}

fn push_forall(v: &str, body: Formula) -> Formula {
    if !free_in(v, &body) {
        return body;
    }
    match body {
        Formula::And(l, r) => Formula::and(push_forall(v, *l), push_forall(v, *r)),
        Formula::Or(l, r) if !free_in(v, &l) => Formula::or(*l, push_forall(v, *r)),
        Formula::Or(l, r) if !free_in(v, &r) => Formula::or(push_forall(v, *l), *r),
        other => Formula::forall(v, other),
    }
}

fn push_exists(v: &str, body: Formula) -> Formula {
    if !free_in(v, &body) {
        return body;
    }
    match body {
        Formula::Or(l, r) => Formula::or(push_exists(v, *l), push_exists(v, *r)),
        Formula::And(l, r) if !free_in(v, &l) => Formula::and(*l, push_exists(v, *r)),
        Formula::And(l, r) if !free_in(v, &r) => Formula::and(push_exists(v, *l), *r),
        other => Formula::exists(v, other),
    }
}

/// Gives every quantifier its own variable name (`_v1`, `_v2`, ...).
pub(crate) fn standardize_apart(f: &Formula, counter: &mut usize) -> Formula {
    match f {
        Formula::ForAll(v, g) | Formula::Exists(v, g) => {
            *counter += 1;
            let fresh = format!("_v{counter}");
            let body = standardize_apart(&g.substitute(v, &Term::Var(fresh.clone())), counter);
            if matches!(f, Formula::ForAll(..)) {
                Formula::forall(fresh, body)
            } else {
                Formula::exists(fresh, body)
            }
        }
        Formula::Not(g) => Formula::not(standardize_apart(g, counter)),
        Formula::Pred(..) | Formula::Eq(..) => f.clone(),
        _ => {
            let (op, l, r) = f.as_binary().expect("binary");
            let l = standardize_apart(l, counter);
            let r = standardize_apart(r, counter);
            Formula::binary(op, l, r)
        }
    }
}

/// Issues Skolem symbols `sk1`, `sk2`, ... that avoid a reserved name set.
#[derive(Clone, Debug, Default)]
pub struct Skolemizer {
    reserved: BTreeSet<String>,
    counter: usize,
    issued: Vec<String>,
}

impl Skolemizer {
    pub fn new(reserved: BTreeSet<String>) -> Self {
        Self { reserved, counter: 0, issued: Vec::new() }
    }

    pub fn fresh(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("sk{}", self.counter);
            if !self.reserved.contains(&name) {
                self.reserved.insert(name.clone());
                self.issued.push(name.clone());
                return name;
            }
        }
    }

    pub fn issued(&self) -> &[String] {
        &self.issued
    }

    /// Removes existentials from a closed NNF formula whose quantifiers bind
    /// distinct variables. A Skolem term depends only on the universals that
    /// occur free in the existential's scope.
    pub fn skolemize(&mut self, f: &Formula) -> Formula {
        let mut universals = Vec::new();
        self.eliminate(f, &mut universals)
    }

    fn eliminate(&mut self, f: &Formula, universals: &mut Vec<String>) -> Formula {
        match f {
            Formula::ForAll(v, g) => {
                universals.push(v.clone());
                let body = self.eliminate(g, universals);
                universals.pop();
                Formula::forall(v.clone(), body)
            }
            Formula::Exists(v, g) => {
                let free = f.free_vars();
                let deps: Vec<Term> = universals
                    .iter()
                    .filter(|u| free.contains(u))
                    .map(|u| Term::Var(u.clone()))
                    .collect();
                let name = self.fresh();
                let witness = if deps.is_empty() { Term::Const(name) } else { Term::App(name, deps) };
                self.eliminate(&g.substitute(v, &witness), universals)
            }
            Formula::And(l, r) => {
                Formula::and(self.eliminate(l, universals), self.eliminate(r, universals))
            }
            Formula::Or(l, r) => {
                Formula::or(self.eliminate(l, universals), self.eliminate(r, universals))
            }
            _ => f.clone(),
        }
    }
}

fn symbols_of(f: &Formula) -> BTreeSet<String> {
    let story = crate::story::FolStory { premises: vec![], conclusion: f.clone(), raw_lines: vec![] };
    story.symbol_names()
}

/// Skolemizes a single closed NNF formula with a fresh symbol table.
pub fn skolemize(f: &Formula) -> Formula {
    let mut counter = 0;
    let apart = standardize_apart(f, &mut counter);
    Skolemizer::new(symbols_of(f)).skolemize(&apart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_equal, parse_formula};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn close_single_free_variable() {
        assert_eq!(close_free(&p("P(x)")), p("all x. P(x)"));
    }

    #[test]
    fn close_leaves_closed_formula() {
        let f = p("all x. P(x)");
        assert_eq!(close_free(&f), f);
    }

    #[test]
    fn close_phi_output() {
        let f = close_free(&p("DepartFrom(x) -> ArriveAt(x)"));
        assert_eq!(f, p("all x. (DepartFrom(x) -> ArriveAt(x))"));
    }

    #[test]
    fn nnf_de_morgan() {
        assert_eq!(to_nnf(&p("-(P(a) & Q(a))")), p("-P(a) | -Q(a)"));
    }

    #[test]
    fn nnf_xor_expansion() {
        assert_eq!(to_nnf(&p("A(c) ⊕ B(c)")), p("(A(c) & -B(c)) | (-A(c) & B(c))"));
    }

    #[test]
    fn nnf_double_negation() {
        assert_eq!(to_nnf(&p("--P(a)")), p("P(a)"));
    }

    #[test]
    fn nnf_quantifier_duality() {
        assert_eq!(to_nnf(&p("-all x. (P(x) -> Q(x))")), p("exists x. (P(x) & -Q(x))"));
    }

    #[test]
    fn skolem_constant() {
        assert_eq!(skolemize(&p("exists x. P(x)")), p("P(sk1)"));
    }

    #[test]
    fn skolem_function_of_universal() {
        let got = skolemize(&p("all x. exists y. R(x, y)"));
        let expected = Formula::forall(
            "x",
            Formula::pred("R", vec![Term::var("x"), Term::app("sk1", vec![Term::var("x")])]),
        );
        assert!(alpha_equal(&got, &expected), "{got}");
    }

    #[test]
    fn skolem_table1_existential() {
        let f = to_nnf(&p("∃x (Year(x) ∧ Since2016(x) ∧ AlignHighSchool(x))"));
        assert_eq!(skolemize(&f), p("Year(sk1) & Since2016(sk1) & AlignHighSchool(sk1)"));
    }

    #[test]
    fn skolem_avoids_existing_symbols() {
        assert_eq!(skolemize(&p("exists x. (P(x) & Q(sk1))")), p("P(sk2) & Q(sk1)"));
    }

    #[test]
    fn skolem_arity_is_minimal() {
        // y does not depend on z
        let got = skolemize(&p("all x. all z. (Q(z) | exists y. R(x, y))"));
        let Formula::ForAll(_, inner) = &got else { panic!() };
        let Formula::ForAll(_, body) = &**inner else { panic!() };
        let Formula::Or(_, r) = &**body else { panic!("{got}") };
        let Formula::Pred(_, args) = &**r else { panic!() };
        assert!(matches!(&args[1], Term::App(_, deps) if deps.len() == 1));
    }

    #[test]
    fn miniscope_splits_conjunction() {
        let got = miniscope(&p("all x. (P(x) & Q(x))"));
        assert_eq!(got, p("(all x. P(x)) & (all x. Q(x))"));
        let got = miniscope(&p("all x. exists y. (P(x) & Q(y))"));
        assert_eq!(got, p("(all x. P(x)) & (exists y. Q(y))"));
    }
}
