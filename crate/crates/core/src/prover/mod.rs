//! Bounded resolution refutation: an Otter-style given-clause loop with binary
//! resolution, eager factoring of the given clause, and forward subsumption.
//!
//! Clause selection takes the passive clause with the fewest symbols, oldest
//! first on ties, so two runs on the same input are identical as long as the
//! wall-clock limit is not what stops them.

mod ground;
mod saturate;
mod term;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clausify::{Atom, Clause, Origin};
use crate::syntax::Term;
use term::{Bindings, Interner, VarId};

/// Resource limits for one refutation attempt. All fields must be positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_seconds: f64,
    pub max_kept_clauses: usize,
    pub max_iterations: usize,
    pub max_term_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_seconds: 5.0, max_kept_clauses: 20_000, max_iterations: 100_000, max_term_depth: 12 }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.max_seconds > 0.0) {
            return Err("max_seconds must be positive".into());
        }
        if self.max_kept_clauses == 0 || self.max_iterations == 0 || self.max_term_depth == 0 {
            return Err("clause, iteration and depth limits must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub budget: Budget,
    pub forward_subsumption: bool,
    pub backward_subsumption: bool,
    /// Function-free clause sets with at most this many ground instances are
    /// refuted ground, where saturation always terminates. Zero disables.
    #[serde(default)]
    pub max_ground_instances: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self { budget: Budget::default(), forward_subsumption: true, backward_subsumption: false, max_ground_instances: 2000 }
    }
}

impl From<Budget> for ProverConfig {
    fn from(budget: Budget) -> Self {
        Self { budget, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefutationStatus {
    /// The empty clause was derived.
    Refuted,
    /// No inference remains and no limit was hit.
    Saturated,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofRule {
    Input(Origin),
    Resolve(usize, usize),
    Factor(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofStep {
    pub id: usize,
    pub clause: Clause,
    pub rule: ProofRule,
}

/// Derivation of the empty clause; steps are in creation order and only those
/// the empty clause depends on are listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub steps: Vec<ProofStep>,
}

impl fmt::Display for ProofTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let rule = match s.rule {
                ProofRule::Input(Origin::Premise(i)) => format!("premise {}", i + 1),
                ProofRule::Input(Origin::Conclusion) => "conclusion".to_string(),
                ProofRule::Input(Origin::NegatedConclusion) => "negated conclusion".to_string(),
                ProofRule::Input(Origin::EqualityAxiom) => "equality axiom".to_string(),
                ProofRule::Resolve(a, b) => format!("resolve {a},{b}"),
                ProofRule::Factor(a) => format!("factor {a}"),
            };
            writeln!(f, "{:>4} {}.  [{}]", s.id, s.clause, rule)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationOutcome {
    pub status: RefutationStatus,
    pub kept_clause_count: usize,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    /// Present exactly when the status is `Refuted`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<ProofTrace>,
}

impl RefutationOutcome {
    pub fn refuted(&self) -> bool {
        self.status == RefutationStatus::Refuted
    }
}

/// Searches for a refutation of `clauses` within `budget`.
pub fn refute(clauses: &[Clause], budget: &Budget) -> RefutationOutcome {
    refute_with(clauses, &ProverConfig::from(*budget))
}

pub use ground::herbrand_instances;

pub fn refute_with(clauses: &[Clause], cfg: &ProverConfig) -> RefutationOutcome {
    match ground::herbrand_instances(clauses, cfg.max_ground_instances) {
        Some(ground) => saturate::run(&ground, cfg),
        None => saturate::run(clauses, cfg),
    }
}

/// An idempotent variable-to-term mapping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    pub bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.apply(t)).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

fn unify_lists(xs: &[Term], ys: &[Term]) -> Option<Substitution> {
    let mut interner = Interner::default();
    let mut vars: HashMap<String, VarId> = HashMap::new();
    let xs: Vec<_> = xs.iter().map(|t| interner.term(t, &mut vars)).collect();
    let ys: Vec<_> = ys.iter().map(|t| interner.term(t, &mut vars)).collect();
    let mut binds = Bindings::with_capacity(vars.len());
    if !binds.unify_args(&xs, &ys) {
        return None;
    }
    let names: HashMap<VarId, String> = vars.into_iter().map(|(n, v)| (v, n)).collect();
    let name = |v: VarId| names[&v].clone();
    let bindings = binds
        .bound_vars()
        .map(|v| (name(v), interner.to_term(&binds.resolve(&term::PTerm::Var(v)), &name)))
        .collect();
    Some(Substitution { bindings })
}

/// Most general unifier of two terms, with occurs check. Variables are
/// identified by name across both sides.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    unify_lists(std::slice::from_ref(s), std::slice::from_ref(t))
}

/// Most general unifier of two atoms with the same predicate and arity.
pub fn unify_atoms(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    unify_lists(&a.args, &b.args)
}
