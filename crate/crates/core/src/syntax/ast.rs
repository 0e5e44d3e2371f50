use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A first-order term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
    /// Function application; arity is always at least one.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn cnst(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        debug_assert!(!args.is_empty(), "function application needs arguments");
        Term::App(name.into(), args)
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) | Term::App(n, _) => n,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match self {
            Term::Var(n) => n == v,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub(crate) fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Replaces every occurrence of variable `v` with `by`.
    pub fn substitute(&self, v: &str, by: &Term) -> Term {
        match self {
            Term::Var(n) if n == v => by.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(v, by)).collect())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) | Term::Const(n) => f.write_str(n),
            Term::App(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A first-order formula. Exclusive-or is kept as its own node and only
/// expanded during clausification or ASCII rendering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Pred(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

/// Binary connectives, used to share code between the five binary variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl Formula {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred(name.into(), args)
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Pred(name.into(), Vec::new())
    }

    pub fn eq(l: Term, r: Term) -> Self {
        Formula::Eq(l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn xor(l: Formula, r: Formula) -> Self {
        Formula::Xor(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(v.into(), Box::new(body))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn binary(op: Connective, l: Formula, r: Formula) -> Self {
        match op {
            Connective::And => Formula::and(l, r),
            Connective::Or => Formula::or(l, r),
            Connective::Xor => Formula::xor(l, r),
            Connective::Implies => Formula::implies(l, r),
            Connective::Iff => Formula::iff(l, r),
        }
    }

    /// Splits a binary node into its connective and operands.
    pub fn as_binary(&self) -> Option<(Connective, &Formula, &Formula)> {
        match self {
            Formula::And(l, r) => Some((Connective::And, l, r)),
            Formula::Or(l, r) => Some((Connective::Or, l, r)),
            Formula::Xor(l, r) => Some((Connective::Xor, l, r)),
            Formula::Implies(l, r) => Some((Connective::Implies, l, r)),
            Formula::Iff(l, r) => Some((Connective::Iff, l, r)),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Pred(..) | Formula::Eq(..))
    }

    pub fn is_quantifier(&self) -> bool {
        matches!(self, Formula::ForAll(..) | Formula::Exists(..))
    }

    /// Number of AST nodes, terms included.
    pub fn size(&self) -> usize {
        fn term_size(t: &Term) -> usize {
            match t {
                Term::App(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
                _ => 1,
            }
        }
        match self {
            Formula::Pred(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
            Formula::Eq(l, r) => 1 + term_size(l) + term_size(r),
            Formula::Not(g) => 1 + g.size(),
            Formula::ForAll(_, g) | Formula::Exists(_, g) => 1 + g.size(),
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                1 + l.size() + r.size()
            }
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let visit_term = |t: &Term, out: &mut Vec<String>| {
            let mut vs = Vec::new();
            t.collect_vars(&mut vs);
            for v in vs {
                if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        };
        match self {
            Formula::Pred(_, args) => args.iter().for_each(|a| visit_term(a, out)),
            Formula::Eq(l, r) => {
                visit_term(l, out);
                visit_term(r, out);
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                bound.push(v.clone());
                g.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Predicate symbols with their arities, sorted.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if let Formula::Pred(n, args) = a {
                out.insert((n.clone(), args.len()));
            }
        });
        out
    }

    /// Calls `f` on every atomic subformula, left to right.
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => f(self),
            Formula::Not(g) | Formula::ForAll(_, g) | Formula::Exists(_, g) => g.visit_atoms(f),
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                l.visit_atoms(f);
                r.visit_atoms(f);
            }
        }
    }

    /// Capture-free substitution of a free variable by a term. Bound variables
    /// that would capture a variable of `by` are renamed.
    pub fn substitute(&self, v: &str, by: &Term) -> Formula {
        match self {
            Formula::Pred(n, args) => {
                Formula::Pred(n.clone(), args.iter().map(|a| a.substitute(v, by)).collect())
            }
            Formula::Eq(l, r) => Formula::Eq(l.substitute(v, by), r.substitute(v, by)),
            Formula::Not(g) => Formula::not(g.substitute(v, by)),
            Formula::ForAll(x, g) | Formula::Exists(x, g) => {
                let rebuild = |x: String, g: Formula| match self {
                    Formula::ForAll(..) => Formula::forall(x, g),
                    _ => Formula::exists(x, g),
                };
                if x == v {
                    return self.clone();
                }
                if by.contains_var(x) {
                    let mut fresh = format!("{x}_");
                    while by.contains_var(&fresh) || g.free_vars().contains(&fresh) {
                        fresh.push('_');
                    }
                    let renamed = g.substitute(x, &Term::Var(fresh.clone()));
                    rebuild(fresh, renamed.substitute(v, by))
                } else {
                    rebuild(x.clone(), g.substitute(v, by))
                }
            }
            _ => {
                let (op, l, r) = self.as_binary().expect("binary");
                Formula::binary(op, l.substitute(v, by), r.substitute(v, by))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render(self, super::Dialect::Ascii))
    }
}

/// True iff `f` and `g` are identical up to a consistent renaming of bound
/// variables.
pub fn alpha_equal(f: &Formula, g: &Formula) -> bool {
    let mut left = Vec::new();
    let mut right = Vec::new();
    alpha_formula(f, g, &mut left, &mut right)
}

fn alpha_formula<'a>(
    f: &'a Formula,
    g: &'a Formula,
    left: &mut Vec<&'a str>,
    right: &mut Vec<&'a str>,
) -> bool {
    match (f, g) {
        (Formula::Pred(a, xs), Formula::Pred(b, ys)) => {
            a == b
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_term(x, y, left, right))
        }
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => {
            alpha_term(a1, b1, left, right) && alpha_term(a2, b2, left, right)
        }
        (Formula::Not(a), Formula::Not(b)) => alpha_formula(a, b, left, right),
        (Formula::ForAll(x, a), Formula::ForAll(y, b))
        | (Formula::Exists(x, a), Formula::Exists(y, b)) => {
            left.push(x);
            right.push(y);
            let eq = alpha_formula(a, b, left, right);
            left.pop();
            right.pop();
            eq
        }
        _ => match (f.as_binary(), g.as_binary()) {
            (Some((op1, l1, r1)), Some((op2, l2, r2))) => {
                op1 == op2 && alpha_formula(l1, l2, left, right) && alpha_formula(r1, r2, left, right)
            }
            _ => false,
        },
    }
}

fn alpha_term(s: &Term, t: &Term, left: &[&str], right: &[&str]) -> bool {
    match (s, t) {
        (Term::Var(a), Term::Var(b)) => {
            let i = left.iter().rposition(|v| v == a);
            let j = right.iter().rposition(|v| v == b);
            match (i, j) {
                (Some(i), Some(j)) => i == j,
                (None, None) => a == b,
                _ => false,
            }
        }
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_term(x, y, left, right))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(v: &str) -> Formula {
        Formula::pred("P", vec![Term::var(v)])
    }

    #[test]
    fn alpha_bound_renaming() {
        assert!(alpha_equal(&Formula::forall("x", px("x")), &Formula::forall("y", px("y"))));
    }

    #[test]
    fn alpha_quantifier_kind_matters() {
        assert!(!alpha_equal(&Formula::forall("x", px("x")), &Formula::exists("x", px("x"))));
    }

    #[test]
    fn alpha_reflexive() {
        let f = Formula::forall(
            "x",
            Formula::exists("y", Formula::implies(px("x"), Formula::pred("R", vec![Term::var("x"), Term::var("y")]))),
        );
        assert!(alpha_equal(&f, &f));
    }

    #[test]
    fn alpha_free_vs_bound() {
        // ∀x P(x) vs ∀y P(x): x is free on the right
        assert!(!alpha_equal(&Formula::forall("x", px("x")), &Formula::forall("y", px("x"))));
        // free variables must match by name
        assert!(!alpha_equal(&px("x"), &px("y")));
    }

    #[test]
    fn alpha_shadowing_resolves_innermost() {
        let f = Formula::forall("x", Formula::forall("x", px("x")));
        let g = Formula::forall("a", Formula::forall("b", px("b")));
        let h = Formula::forall("a", Formula::forall("b", px("a")));
        assert!(alpha_equal(&f, &g));
        assert!(!alpha_equal(&f, &h));
    }

    #[test]
    fn free_vars_in_order() {
        let f = Formula::and(
            Formula::pred("R", vec![Term::var("y"), Term::var("x")]),
            Formula::forall("y", px("y")),
        );
        assert_eq!(f.free_vars(), vec!["y".to_string(), "x".to_string()]);
    }

    #[test]
    fn substitute_avoids_capture() {
        // (∀y R(x, y))[x := y]  must not capture
        let f = Formula::forall("y", Formula::pred("R", vec![Term::var("x"), Term::var("y")]));
        let g = f.substitute("x", &Term::var("y"));
        let expected = Formula::forall("z", Formula::pred("R", vec![Term::var("y"), Term::var("z")]));
        assert!(alpha_equal(&g, &expected));
    }
}
