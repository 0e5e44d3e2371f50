//! Reference labels by exhaustive search for a Herbrand model.
//!
//! Works on function-free, equality-free problems whose quantifiers, after
//! pushing negations through, never put an existential under a universal.
//! Existentials become fresh constants and universals range over the
//! constants, which is complete for that fragment.

use std::collections::{BTreeSet, HashMap};

use logicpo_core::story::Label;
use logicpo_core::syntax::{Formula, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundVerdict {
    pub label: Label,
    /// Largest number of ground atoms searched in either direction.
    pub atoms: usize,
}

/// `None` when the problem falls outside the fragment or needs more than
/// `max_atoms` ground atoms.
pub fn ground_label(premises: &[Formula], conclusion: &Formula, max_atoms: usize) -> Option<GroundVerdict> {
    let mut with_neg: Vec<Formula> = premises.to_vec();
    with_neg.push(Formula::not(conclusion.clone()));
    let mut with_pos: Vec<Formula> = premises.to_vec();
    with_pos.push(conclusion.clone());
    let (sat_neg, a1) = satisfiable(&with_neg, max_atoms)?;
    let (sat_pos, a2) = satisfiable(&with_pos, max_atoms)?;
    let label = match (sat_neg, sat_pos) {
        (false, false) => Label::Error,
        (false, true) => Label::True,
        (true, false) => Label::False,
        (true, true) => Label::Uncertain,
    };
    Some(GroundVerdict { label, atoms: a1.max(a2) })
}

/// Satisfiability of a set of formulas and the number of ground atoms.
pub fn satisfiable(formulas: &[Formula], max_atoms: usize) -> Option<(bool, usize)> {
    let mut fresh = 0;
    let mut skolemized = Vec::new();
    for f in formulas {
        let mut closed = f.clone();
        for v in f.free_vars() {
            closed = Formula::forall(v, closed);
        }
        skolemized.push(skolemize(&closed, true, false, &mut fresh, &HashMap::new())?);
    }
    let mut universe = BTreeSet::new();
    let mut preds = BTreeSet::new();
    for f in &skolemized {
        collect(f, &mut universe, &mut preds);
    }
    if universe.is_empty() {
        universe.insert("#d".to_string());
    }
    let universe: Vec<String> = universe.into_iter().collect();
    let mut index = HashMap::new();
    for (p, arity) in &preds {
        for args in tuples(&universe, *arity) {
            let n = index.len();
            index.insert((p.clone(), args), n);
            if index.len() > max_atoms {
                return None;
            }
        }
    }
    let n = index.len();
    let grounder = Grounder { universe: &universe, index: &index };
    let ground: Vec<G> = skolemized.iter().map(|f| grounder.ground(f, &mut HashMap::new())).collect();
    let mut assignment = vec![None; n];
    Some((dfs(&ground, 0, &mut assignment), n))
}

fn tuples(universe: &[String], arity: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                universe.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn has_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => false,
        Formula::Not(g) => has_quantifier(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Xor(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            has_quantifier(a) || has_quantifier(b)
        }
        Formula::ForAll(..) | Formula::Exists(..) => true,
    }
}

fn subst_term(t: &Term, map: &HashMap<String, String>) -> Option<Term> {
    match t {
        Term::Var(v) => Some(map.get(v).map_or_else(|| t.clone(), |c| Term::cnst(c.clone()))),
        Term::Const(_) => Some(t.clone()),
        Term::App(..) => None,
    }
}

/// `positive` is the polarity of `f`; `under_universal` says whether an
/// effectively universal quantifier encloses it.
fn skolemize(f: &Formula, positive: bool, under_universal: bool, fresh: &mut usize, map: &HashMap<String, String>) -> Option<Formula> {
    let rec = |g: &Formula, pol: bool, fresh: &mut usize| skolemize(g, pol, under_universal, fresh, map);
    Some(match f {
        Formula::Pred(p, args) => Formula::pred(p.clone(), args.iter().map(|t| subst_term(t, map)).collect::<Option<_>>()?),
        Formula::Eq(..) => return None,
        Formula::Not(g) => Formula::not(rec(g, !positive, fresh)?),
        Formula::And(a, b) => Formula::and(rec(a, positive, fresh)?, rec(b, positive, fresh)?),
        Formula::Or(a, b) => Formula::or(rec(a, positive, fresh)?, rec(b, positive, fresh)?),
        Formula::Implies(a, b) => Formula::implies(rec(a, !positive, fresh)?, rec(b, positive, fresh)?),
        Formula::Iff(a, b) | Formula::Xor(a, b) => {
            if has_quantifier(a) || has_quantifier(b) {
                return None;
            }
            let (a, b) = (rec(a, positive, fresh)?, rec(b, positive, fresh)?);
            if matches!(f, Formula::Iff(..)) {
                Formula::iff(a, b)
            } else {
                Formula::xor(a, b)
            }
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            let universal = matches!(f, Formula::ForAll(..)) == positive;
            let mut inner = map.clone();
            if universal {
                inner.remove(v);
                let body = skolemize(body, positive, true, fresh, &inner)?;
                return Some(if matches!(f, Formula::ForAll(..)) { Formula::forall(v.clone(), body) } else { Formula::exists(v.clone(), body) });
            }
            if under_universal {
                return None;
            }
            inner.insert(v.clone(), format!("#sk{fresh}"));
            *fresh += 1;
            return skolemize(body, positive, under_universal, fresh, &inner);
        }
    })
}

fn collect(f: &Formula, universe: &mut BTreeSet<String>, preds: &mut BTreeSet<(String, usize)>) {
    match f {
        Formula::Pred(p, args) => {
            preds.insert((p.clone(), args.len()));
            for a in args {
                if let Term::Const(c) = a {
                    universe.insert(c.clone());
                }
            }
        }
        Formula::Eq(..) => unreachable!("rejected during skolemization"),
        Formula::Not(g) | Formula::ForAll(_, g) | Formula::Exists(_, g) => collect(g, universe, preds),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Xor(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect(a, universe, preds);
            collect(b, universe, preds);
        }
    }
}

/// A ground formula over atom indices.
enum G {
    Atom(usize),
    Not(Box<G>),
    And(Vec<G>),
    Or(Vec<G>),
    Iff(Box<G>, Box<G>),
    Xor(Box<G>, Box<G>),
}

struct Grounder<'a> {
    universe: &'a [String],
    index: &'a HashMap<(String, Vec<String>), usize>,
}

impl Grounder<'_> {
    fn ground(&self, f: &Formula, env: &mut HashMap<String, String>) -> G {
        let boxed = |g: G| Box::new(g);
        match f {
            Formula::Pred(p, args) => {
                let names: Vec<String> = args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => env[v].clone(),
                        Term::Const(c) => c.clone(),
                        Term::App(..) => unreachable!("function-free"),
                    })
                    .collect();
                G::Atom(self.index[&(p.clone(), names)])
            }
            Formula::Eq(..) => unreachable!("equality-free"),
            Formula::Not(g) => G::Not(boxed(self.ground(g, env))),
            Formula::And(x, y) => G::And(vec![self.ground(x, env), self.ground(y, env)]),
            Formula::Or(x, y) => G::Or(vec![self.ground(x, env), self.ground(y, env)]),
            Formula::Implies(x, y) => G::Or(vec![G::Not(boxed(self.ground(x, env))), self.ground(y, env)]),
            Formula::Iff(x, y) => G::Iff(boxed(self.ground(x, env)), boxed(self.ground(y, env))),
            Formula::Xor(x, y) => G::Xor(boxed(self.ground(x, env)), boxed(self.ground(y, env))),
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let saved = env.get(v).cloned();
                let parts = self
                    .universe
                    .iter()
                    .map(|c| {
                        env.insert(v.clone(), c.clone());
                        self.ground(body, env)
                    })
                    .collect();
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                if matches!(f, Formula::ForAll(..)) {
                    G::And(parts)
                } else {
                    G::Or(parts)
                }
            }
        }
    }
}

/// Kleene three-valued evaluation; `None` means not yet determined.
fn eval(g: &G, a: &[Option<bool>]) -> Option<bool> {
    match g {
        G::Atom(i) => a[*i],
        G::Not(x) => eval(x, a).map(|v| !v),
        G::And(xs) | G::Or(xs) => {
            let short = matches!(g, G::Or(_));
            let mut acc = Some(!short);
            for x in xs {
                match eval(x, a) {
                    Some(v) if v == short => return Some(short),
                    None => acc = None,
                    Some(_) => {}
                }
            }
            acc
        }
        G::Iff(x, y) => Some(eval(x, a)? == eval(y, a)?),
        G::Xor(x, y) => Some(eval(x, a)? != eval(y, a)?),
    }
}

fn dfs(formulas: &[G], i: usize, assignment: &mut Vec<Option<bool>>) -> bool {
    let mut all_true = true;
    for f in formulas {
        match eval(f, assignment) {
            Some(false) => return false,
            Some(true) => {}
            None => all_true = false,
        }
    }
    if all_true {
        return true;
    }
    if i == assignment.len() {
        return false;
    }
    for v in [true, false] {
        assignment[i] = Some(v);
        if dfs(formulas, i + 1, assignment) {
            return true;
        }
    }
    assignment[i] = None;
    false
}
