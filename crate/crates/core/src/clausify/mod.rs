//! Clausal normal form for FOL stories: universal closure, connective
//! elimination, NNF, miniscoping, Skolemization and CNF by plain distribution.

mod normal;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::story::FolStory;
use crate::syntax::{Formula, Term};

pub use normal::{close_free, miniscope, skolemize, to_nnf, Skolemizer};

/// Predicate name used for equality atoms.
pub const EQUALITY: &str = "=";

/// Per-formula clause cap; distribution beyond this aborts.
pub const DEFAULT_MAX_CLAUSES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn is_equality(&self) -> bool {
        self.predicate == EQUALITY && self.args.len() == 2
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equality() {
            return write!(f, "{} = {}", self.args[0], self.args[1]);
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Self { positive: true, atom: Atom { predicate: predicate.into(), args } }
    }

    pub fn neg(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Self { positive: false, atom: Atom { predicate: predicate.into(), args } }
    }

    pub fn negated(&self) -> Self {
        Self { positive: !self.positive, atom: self.atom.clone() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.positive, self.atom.is_equality()) {
            (true, _) => write!(f, "{}", self.atom),
            (false, true) => write!(f, "{} != {}", self.atom.args[0], self.atom.args[1]),
            (false, false) => write!(f, "-{}", self.atom),
        }
    }
}

/// Which input a clause was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    /// Index into the story's premise list.
    Premise(usize),
    Conclusion,
    NegatedConclusion,
    EqualityAxiom,
}

/// A disjunction of literals; its variables are implicitly universal and the
/// empty clause is a contradiction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub literals: Vec<Literal>,
    pub origin: Origin,
}

impl Clause {
    pub fn new(literals: Vec<Literal>, origin: Origin) -> Self {
        Self { literals, origin }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("$F");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClausifyOptions {
    /// Add reflexivity, symmetry, transitivity and congruence clauses when the
    /// story uses equality.
    pub equality_axioms: bool,
    pub max_clauses_per_formula: usize,
}

impl Default for ClausifyOptions {
    fn default() -> Self {
        Self { equality_axioms: false, max_clauses_per_formula: DEFAULT_MAX_CLAUSES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClausifyError {
    #[error("formula {origin:?} expands to more than {limit} clauses")]
    ClauseExplosion { origin: Origin, limit: usize },
}

/// Clauses of a story, with the conclusion clausified both as stated and
/// negated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoryClauses {
    pub premises: Vec<Clause>,
    pub conclusion_pos: Vec<Clause>,
    pub conclusion_neg: Vec<Clause>,
    /// Empty unless equality axioms were requested and equality occurs.
    pub equality_axioms: Vec<Clause>,
    /// Formula indices (premises first, conclusion last) whose free
    /// variables were universally closed.
    pub closed_free: Vec<usize>,
    pub skolem_symbols: Vec<String>,
}

impl StoryClauses {
    /// Clause set for the refutation `premises ∪ {¬conclusion}`.
    pub fn entailment_problem(&self) -> Vec<Clause> {
        self.premises.iter().chain(&self.equality_axioms).chain(&self.conclusion_neg).cloned().collect()
    }

    /// Clause set for the refutation `premises ∪ {conclusion}`.
    pub fn contradiction_problem(&self) -> Vec<Clause> {
        self.premises.iter().chain(&self.equality_axioms).chain(&self.conclusion_pos).cloned().collect()
    }
}

/// Clausifies a whole story. Skolem symbols are numbered across the story in
/// the order premises, conclusion, negated conclusion, and never reuse a name
/// already present in the story.
pub fn to_clauses(story: &FolStory, opts: &ClausifyOptions) -> Result<StoryClauses, ClausifyError> {
    let mut sk = Skolemizer::new(story.symbol_names());
    let mut closed_free = Vec::new();
    let mut premises = Vec::new();
    for (i, f) in story.premises.iter().enumerate() {
        if !f.is_closed() {
            closed_free.push(i);
        }
        premises.extend(formula_clauses(f, Origin::Premise(i), &mut sk, opts)?);
    }
    if !story.conclusion.is_closed() {
        closed_free.push(story.conclusion_index());
    }
    let closed_conclusion = close_free(&story.conclusion);
    let conclusion_pos = formula_clauses(&closed_conclusion, Origin::Conclusion, &mut sk, opts)?;
    let negated = Formula::not(closed_conclusion);
    let conclusion_neg = formula_clauses(&negated, Origin::NegatedConclusion, &mut sk, opts)?;

    let uses_equality = premises
        .iter()
        .chain(&conclusion_pos)
        .flat_map(|c| &c.literals)
        .any(|l| l.atom.is_equality());
    let equality_axioms = if opts.equality_axioms && uses_equality {
        equality_axioms(premises.iter().chain(&conclusion_pos).chain(&conclusion_neg))
    } else {
        Vec::new()
    };

    Ok(StoryClauses {
        premises,
        conclusion_pos,
        conclusion_neg,
        equality_axioms,
        closed_free,
        skolem_symbols: sk.issued().to_vec(),
    })
}

/// Clausifies one formula (closing it first).
pub fn formula_clauses(
    f: &Formula,
    origin: Origin,
    sk: &mut Skolemizer,
    opts: &ClausifyOptions,
) -> Result<Vec<Clause>, ClausifyError> {
    let prepared = miniscope(&to_nnf(&close_free(f)));
    let mut counter = 0;
    let apart = normal::standardize_apart(&prepared, &mut counter);
    let skolemized = sk.skolemize(&apart);
    let matrix = cnf(&skolemized, opts.max_clauses_per_formula)
        .ok_or(ClausifyError::ClauseExplosion { origin, limit: opts.max_clauses_per_formula })?;
    let mut out: Vec<Clause> = Vec::new();
    for lits in matrix {
        if let Some(lits) = simplify(lits) {
            let clause = Clause::new(canonical_variables(lits), origin);
            if !out.contains(&clause) {
                out.push(clause);
            }
        }
    }
    Ok(out)
}

fn cnf(f: &Formula, limit: usize) -> Option<Vec<Vec<Literal>>> {
    match f {
        Formula::ForAll(_, g) => cnf(g, limit),
        Formula::And(l, r) => {
            let mut a = cnf(l, limit)?;
            let b = cnf(r, limit)?;
            if a.len() + b.len() > limit {
                return None;
            }
            a.extend(b);
            Some(a)
        }
        Formula::Or(l, r) => {
            let a = cnf(l, limit)?;
            let b = cnf(r, limit)?;
            if a.len().saturating_mul(b.len()) > limit {
                return None;
            }
            let mut out = Vec::with_capacity(a.len() * b.len());
            for x in &a {
                for y in &b {
                    out.push(x.iter().chain(y).cloned().collect());
                }
            }
            Some(out)
        }
        Formula::Not(g) => Some(vec![vec![literal_of(g, false)]]),
        Formula::Pred(..) | Formula::Eq(..) => Some(vec![vec![literal_of(f, true)]]),
        other => unreachable!("not in skolemized negation normal form: {other}"),
    }
}

fn literal_of(f: &Formula, positive: bool) -> Literal {
    match f {
        Formula::Pred(n, args) => Literal { positive, atom: Atom { predicate: n.clone(), args: args.clone() } },
        Formula::Eq(l, r) => {
            Literal { positive, atom: Atom { predicate: EQUALITY.to_string(), args: vec![l.clone(), r.clone()] } }
        }
        other => unreachable!("negation above a non-atom: {other}"),
    }
}

/// Removes repeated literals; `None` for tautologies.
fn simplify(lits: Vec<Literal>) -> Option<Vec<Literal>> {
    let mut out: Vec<Literal> = Vec::with_capacity(lits.len());
    for l in lits {
        if out.iter().any(|o| o.atom == l.atom && o.positive != l.positive) {
            return None;
        }
        if !out.contains(&l) {
            out.push(l);
        }
    }
    Some(out)
}

/// Variable name for the i-th distinct variable of a clause.
pub fn clause_var_name(i: usize) -> String {
    const BASE: [&str; 6] = ["X", "Y", "Z", "U", "V", "W"];
    let round = i / BASE.len();
    if round == 0 {
        BASE[i].to_string()
    } else {
        format!("{}{round}", BASE[i % BASE.len()])
    }
}

fn canonical_variables(lits: Vec<Literal>) -> Vec<Literal> {
    fn rename(t: &Term, map: &mut HashMap<String, String>) -> Term {
        match t {
            Term::Var(v) => {
                let n = map.len();
                Term::Var(map.entry(v.clone()).or_insert_with(|| clause_var_name(n)).clone())
            }
            Term::Const(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename(a, map)).collect()),
        }
    }
    let mut map = HashMap::new();
    lits.into_iter()
        .map(|l| Literal {
            positive: l.positive,
            atom: Atom {
                predicate: l.atom.predicate,
                args: l.atom.args.iter().map(|a| rename(a, &mut map)).collect(),
            },
        })
        .collect()
}

fn equality_axioms<'a>(clauses: impl Iterator<Item = &'a Clause>) -> Vec<Clause> {
    fn functions(t: &Term, out: &mut BTreeSet<(String, usize)>) {
        if let Term::App(f, args) = t {
            out.insert((f.clone(), args.len()));
            args.iter().for_each(|a| functions(a, out));
        }
    }
    let mut preds = BTreeSet::new();
    let mut funcs = BTreeSet::new();
    for c in clauses {
        for l in &c.literals {
            if !l.atom.is_equality() {
                preds.insert((l.atom.predicate.clone(), l.atom.args.len()));
            }
            l.atom.args.iter().for_each(|a| functions(a, &mut funcs));
        }
    }
    let v = |s: &str| Term::var(s);
    let eq = |positive: bool, a: Term, b: Term| Literal { positive, atom: Atom { predicate: EQUALITY.into(), args: vec![a, b] } };
    let ax = |lits: Vec<Literal>| Clause::new(lits, Origin::EqualityAxiom);
    let mut out = vec![
        ax(vec![eq(true, v("X"), v("X"))]),
        ax(vec![eq(false, v("X"), v("Y")), eq(true, v("Y"), v("X"))]),
        ax(vec![eq(false, v("X"), v("Y")), eq(false, v("Y"), v("Z")), eq(true, v("X"), v("Z"))]),
    ];
    let args_with = |arity: usize, pos: usize, at: &str| -> Vec<Term> {
        (0..arity).map(|i| if i == pos { v(at) } else { Term::Var(format!("A{i}")) }).collect()
    };
    for (f, arity) in funcs.iter().filter(|(_, n)| *n <= 3) {
        for pos in 0..*arity {
            out.push(ax(vec![
                eq(false, v("X"), v("Y")),
                eq(true, Term::App(f.clone(), args_with(*arity, pos, "X")), Term::App(f.clone(), args_with(*arity, pos, "Y"))),
            ]));
        }
    }
    for (p, arity) in preds.iter().filter(|(_, n)| (1..=3).contains(n)) {
        for pos in 0..*arity {
            out.push(ax(vec![
                eq(false, v("X"), v("Y")),
                Literal::neg(p.clone(), args_with(*arity, pos, "X")),
                Literal::pos(p.clone(), args_with(*arity, pos, "Y")),
            ]));
        }
    }
    out
}
