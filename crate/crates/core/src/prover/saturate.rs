use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::term::{max_var_of, Bindings, Interner, PClause, PLit, Sym};
use super::{ProofRule, ProofStep, ProofTrace, ProverConfig, RefutationOutcome, RefutationStatus};
use crate::clausify::{Clause, Origin};

#[derive(Clone, Debug)]
enum Rule {
    Input(Origin),
    Resolve(usize, usize),
    Factor(usize),
}

struct Stored {
    clause: PClause,
    rule: Rule,
    alive: bool,
}

struct Saturation<'a> {
    cfg: &'a ProverConfig,
    interner: Interner,
    arena: Vec<Stored>,
    active: Vec<usize>,
    /// Active clauses keyed by the sign and predicate of each literal.
    active_index: HashMap<(Sym, bool), Vec<usize>>,
    passive: BinaryHeap<Reverse<(usize, usize)>>,
    /// Kept clauses with a ground literal, keyed by the first such literal.
    /// A subsumer's ground literal must occur verbatim in the subsumed clause.
    ground_index: HashMap<PLit, Vec<usize>>,
    /// Other kept clauses keyed by the sign and predicate of their first
    /// literal.
    index: HashMap<(Sym, bool), Vec<usize>>,
    kept: usize,
    depth_pruned: bool,
    empty: Option<usize>,
}

pub(super) fn run(clauses: &[Clause], cfg: &ProverConfig) -> RefutationOutcome {
    let start = Instant::now();
    let mut s = Saturation {
        cfg,
        interner: Interner::default(),
        arena: Vec::new(),
        active: Vec::new(),
        active_index: HashMap::new(),
        passive: BinaryHeap::new(),
        ground_index: HashMap::new(),
        index: HashMap::new(),
        kept: 0,
        depth_pruned: false,
        empty: None,
    };
    for c in clauses {
        let lits = s.interner.clause(c);
        s.add(lits, Rule::Input(c.origin));
        if s.empty.is_some() {
            return s.finish(RefutationStatus::Refuted, 0, start);
        }
    }

    let budget = &cfg.budget;
    let mut iterations = 0;
    loop {
        if iterations >= budget.max_iterations {
            return s.finish(RefutationStatus::BudgetExhausted, iterations, start);
        }
        let Some(given) = s.next_given() else {
            let status = if s.depth_pruned { RefutationStatus::BudgetExhausted } else { RefutationStatus::Saturated };
            return s.finish(status, iterations, start);
        };
        iterations += 1;

        for (lits, rule) in s.factors(given) {
            s.add(lits, rule);
        }
        s.activate(given);
        let partners = s.partners(given);
        for partner in partners {
            if !s.arena[given].alive {
                break;
            }
            if !s.arena[partner].alive {
                continue;
            }
            for (lits, rule) in s.resolvents(given, partner) {
                s.add(lits, rule);
                if s.empty.is_some() {
                    break;
                }
            }
            if s.empty.is_some() {
                break;
            }
        }
        if s.empty.is_some() {
            return s.finish(RefutationStatus::Refuted, iterations, start);
        }
        if s.kept > budget.max_kept_clauses {
            return s.finish(RefutationStatus::BudgetExhausted, iterations, start);
        }
        if start.elapsed().as_secs_f64() > budget.max_seconds {
            return s.finish(RefutationStatus::BudgetExhausted, iterations, start);
        }
    }
}

impl Saturation<'_> {
    fn next_given(&mut self) -> Option<usize> {
        while let Some(Reverse((_, id))) = self.passive.pop() {
            if self.arena[id].alive {
                return Some(id);
            }
        }
        None
    }

    fn add(&mut self, lits: Vec<PLit>, rule: Rule) {
        let Some(clause) = PClause::normalized(lits) else { return };
        let clause = condense(clause);
        if clause.max_depth() > self.cfg.budget.max_term_depth {
            self.depth_pruned = true;
            return;
        }
        if clause.is_empty() {
            self.arena.push(Stored { clause, rule, alive: true });
            self.empty = Some(self.arena.len() - 1);
            return;
        }
        if self.cfg.forward_subsumption && self.is_subsumed(&clause) {
            return;
        }
        if self.cfg.backward_subsumption {
            self.remove_subsumed_by(&clause);
        }
        let id = self.arena.len();
        match clause.lits.iter().find(|l| l.is_ground()) {
            Some(l) => self.ground_index.entry(l.clone()).or_default().push(id),
            None => self.index.entry((clause.lits[0].pred, clause.lits[0].positive)).or_default().push(id),
        }
        self.passive.push(Reverse((clause.weight, id)));
        self.arena.push(Stored { clause, rule, alive: true });
        self.kept += 1;
    }

    fn activate(&mut self, id: usize) {
        self.active.push(id);
        let mut keys: Vec<(Sym, bool)> = self.arena[id].clause.lits.iter().map(|l| (l.pred, l.positive)).collect();
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            self.active_index.entry(k).or_default().push(id);
        }
    }

    /// Active clauses with a literal complementary in sign and predicate to
    /// one of `given`'s, by clause id.
    fn partners(&self, given: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self.arena[given]
            .clause
            .lits
            .iter()
            .filter_map(|l| self.active_index.get(&(l.pred, !l.positive)))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn is_subsumed(&self, clause: &PClause) -> bool {
        let subsumed_by = |ids: Option<&Vec<usize>>| {
            ids.is_some_and(|ids| ids.iter().any(|&id| self.arena[id].alive && self.arena[id].clause.subsumes(clause)))
        };
        let mut seen: Vec<(Sym, bool)> = Vec::with_capacity(clause.lits.len());
        for l in &clause.lits {
            if l.is_ground() && subsumed_by(self.ground_index.get(l)) {
                return true;
            }
            let key = (l.pred, l.positive);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            if subsumed_by(self.index.get(&key)) {
                return true;
            }
        }
        false
    }

    fn remove_subsumed_by(&mut self, clause: &PClause) {
        for id in 0..self.arena.len() {
            if self.arena[id].alive && !self.arena[id].clause.is_empty() && clause.subsumes(&self.arena[id].clause) {
                self.arena[id].alive = false;
                self.kept -= 1;
            }
        }
        let arena = &self.arena;
        self.active.retain(|&id| arena[id].alive);
    }

    fn factors(&self, id: usize) -> Vec<(Vec<PLit>, Rule)> {
        let lits = &self.arena[id].clause.lits;
        let vars = self.arena[id].clause.var_count as usize;
        let mut out = Vec::new();
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                let (a, b) = (&lits[i], &lits[j]);
                if a.positive != b.positive || a.pred != b.pred {
                    continue;
                }
                let mut binds = Bindings::with_capacity(vars);
                if binds.unify_args(&a.args, &b.args) {
                    let factor = lits
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, l)| apply(l, &binds))
                        .collect();
                    out.push((factor, Rule::Factor(id)));
                }
            }
        }
        out
    }

    fn resolvents(&self, given: usize, partner: usize) -> Vec<(Vec<PLit>, Rule)> {
        let g = &self.arena[given].clause;
        let offset = max_var_of(&g.lits).map_or(0, |m| m + 1);
        let p = self.arena[partner].clause.shifted(offset);
        let capacity = offset as usize + self.arena[partner].clause.var_count as usize;
        let mut out = Vec::new();
        for (i, a) in g.lits.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                if a.positive == b.positive || a.pred != b.pred {
                    continue;
                }
                let mut binds = Bindings::with_capacity(capacity);
                if !binds.unify_args(&a.args, &b.args) {
                    continue;
                }
                let resolvent = g
                    .lits
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, l)| apply(l, &binds))
                    .chain(p.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| apply(l, &binds)))
                    .collect();
                out.push((resolvent, Rule::Resolve(given, partner)));
            }
        }
        out
    }

    fn finish(&self, status: RefutationStatus, iterations: usize, start: Instant) -> RefutationOutcome {
        let proof = match (status, self.empty) {
            (RefutationStatus::Refuted, Some(id)) => Some(self.trace(id)),
            _ => None,
        };
        RefutationOutcome {
            status,
            kept_clause_count: self.kept,
            iterations,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            proof,
        }
    }

    fn trace(&self, empty: usize) -> ProofTrace {
        let mut needed = vec![false; self.arena.len()];
        let mut stack = vec![empty];
        while let Some(id) = stack.pop() {
            if needed[id] {
                continue;
            }
            needed[id] = true;
            match self.arena[id].rule {
                Rule::Input(_) => {}
                Rule::Factor(a) => stack.push(a),
                Rule::Resolve(a, b) => stack.extend([a, b]),
            }
        }
        let steps = (0..self.arena.len())
            .filter(|&id| needed[id])
            .map(|id| {
                let stored = &self.arena[id];
                let literals = stored.clause.lits.iter().map(|l| self.interner.to_literal(l)).collect();
                ProofStep {
                    id,
                    clause: Clause::new(literals, origin_of(&self.arena, id)),
                    rule: match stored.rule {
                        Rule::Input(o) => ProofRule::Input(o),
                        Rule::Factor(a) => ProofRule::Factor(a),
                        Rule::Resolve(a, b) => ProofRule::Resolve(a, b),
                    },
                }
            })
            .collect();
        ProofTrace { steps }
    }
}

/// Derived clauses inherit the origin of their leftmost input ancestor.
fn origin_of(arena: &[Stored], mut id: usize) -> Origin {
    loop {
        match arena[id].rule {
            Rule::Input(o) => return o,
            Rule::Factor(a) | Rule::Resolve(a, _) => id = a,
        }
    }
}

/// Replaces a clause by a shorter factor of itself that subsumes it, for
/// example `P(x) | P(y) | Q` by `P(x) | Q`. Without this, self-resolution
/// can grow clauses with redundant variants forever.
fn condense(mut clause: PClause) -> PClause {
    'retry: loop {
        if clause.var_count == 0 {
            return clause;
        }
        let lits = &clause.lits;
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                let (a, b) = (&lits[i], &lits[j]);
                if a.positive != b.positive || a.pred != b.pred {
                    continue;
                }
                let mut binds = Bindings::with_capacity(clause.var_count as usize);
                if !binds.unify_args(&a.args, &b.args) {
                    continue;
                }
                let factor = lits.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| apply(l, &binds)).collect();
                if let Some(f) = PClause::normalized(factor) {
                    if f.lits.len() < clause.lits.len() && f.subsumes(&clause) {
                        clause = f;
                        continue 'retry;
                    }
                }
            }
        }
        return clause;
    }
}

fn apply(l: &PLit, b: &Bindings) -> PLit {
    PLit { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| b.resolve(a)).collect() }
}
