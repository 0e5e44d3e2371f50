//! Interned terms and clauses used inside the saturation loop.

use std::collections::HashMap;

use crate::clausify::{clause_var_name, Atom, Clause, Literal};
use crate::syntax::Term;

pub(crate) type Sym = u32;
pub(crate) type VarId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum PTerm {
    Var(VarId),
    /// Function application; constants have no arguments.
    Fn(Sym, Vec<PTerm>),
}

impl PTerm {
    pub fn depth(&self) -> usize {
        match self {
            PTerm::Var(_) => 1,
            PTerm::Fn(_, args) => 1 + args.iter().map(PTerm::depth).max().unwrap_or(0),
        }
    }

    fn symbols(&self) -> usize {
        match self {
            PTerm::Var(_) => 1,
            PTerm::Fn(_, args) => 1 + args.iter().map(PTerm::symbols).sum::<usize>(),
        }
    }

    fn max_var(&self) -> Option<VarId> {
        match self {
            PTerm::Var(v) => Some(*v),
            PTerm::Fn(_, args) => args.iter().filter_map(PTerm::max_var).max(),
        }
    }

    fn shift(&self, by: VarId) -> PTerm {
        match self {
            PTerm::Var(v) => PTerm::Var(v + by),
            PTerm::Fn(f, args) => PTerm::Fn(*f, args.iter().map(|a| a.shift(by)).collect()),
        }
    }

    fn occurs(&self, v: VarId, b: &Bindings) -> bool {
        match self {
            PTerm::Var(w) => match b.get(*w) {
                Some(t) => t.occurs(v, b),
                None => *w == v,
            },
            PTerm::Fn(_, args) => args.iter().any(|a| a.occurs(v, b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct PLit {
    pub positive: bool,
    pub pred: Sym,
    pub args: Vec<PTerm>,
}

impl PLit {
    /// Bit used by the subsumption prefilter.
    pub fn signature_bit(&self) -> u64 {
        let h = (self.pred as u64).wrapping_mul(2654435761).wrapping_add(self.positive as u64);
        1u64 << (h % 64)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| a.max_var().is_none())
    }

    /// Bit for a ground literal, including its arguments; zero otherwise.
    pub fn ground_bit(&self) -> u64 {
        if !self.is_ground() {
            return 0;
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        std::hash::Hash::hash(self, &mut h);
        1u64 << (std::hash::Hasher::finish(&h) % 64)
    }
}

/// Triangular substitution: bindings may refer to other bound variables.
#[derive(Clone, Debug, Default)]
pub(crate) struct Bindings {
    slots: Vec<Option<PTerm>>,
}

impl Bindings {
    pub fn with_capacity(n: usize) -> Self {
        Self { slots: vec![None; n] }
    }

    pub fn get(&self, v: VarId) -> Option<&PTerm> {
        self.slots.get(v as usize).and_then(Option::as_ref)
    }

    fn bind(&mut self, v: VarId, t: PTerm) {
        let i = v as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        self.slots[i] = Some(t);
    }

    fn walk<'a>(&'a self, mut t: &'a PTerm) -> &'a PTerm {
        while let PTerm::Var(v) = t {
            match self.get(*v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Applies the substitution fully.
    pub fn resolve(&self, t: &PTerm) -> PTerm {
        match self.walk(t) {
            PTerm::Var(v) => PTerm::Var(*v),
            PTerm::Fn(f, args) => PTerm::Fn(*f, args.iter().map(|a| self.resolve(a)).collect()),
        }
    }

    pub fn bound_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.slots.iter().enumerate().filter(|(_, s)| s.is_some()).map(|(i, _)| i as VarId)
    }

    /// Most general unifier with occurs check. On failure the bindings may be
    /// partially extended and should be discarded.
    pub fn unify(&mut self, a: &PTerm, b: &PTerm) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (PTerm::Var(x), PTerm::Var(y)) if x == y => true,
            (PTerm::Var(x), t) | (t, PTerm::Var(x)) => {
                if t.occurs(*x, self) {
                    return false;
                }
                self.bind(*x, t.clone());
                true
            }
            (PTerm::Fn(f, xs), PTerm::Fn(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    pub fn unify_args(&mut self, xs: &[PTerm], ys: &[PTerm]) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
    }
}

/// One-way matching: binds variables of `pattern` only; variables of
/// `target` are treated as rigid.
pub(crate) fn match_term(pattern: &PTerm, target: &PTerm, b: &mut Vec<Option<PTerm>>, trail: &mut Vec<usize>) -> bool {
    match pattern {
        PTerm::Var(v) => {
            let i = *v as usize;
            if i >= b.len() {
                b.resize(i + 1, None);
            }
            match &b[i] {
                Some(bound) => bound == target,
                None => {
                    b[i] = Some(target.clone());
                    trail.push(i);
                    true
                }
            }
        }
        PTerm::Fn(f, xs) => match target {
            PTerm::Fn(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_term(x, y, b, trail))
            }
            _ => false,
        },
    }
}

#[derive(Clone, Debug)]
pub(crate) struct PClause {
    pub lits: Vec<PLit>,
    pub weight: usize,
    pub signature: u64,
    /// Union of `ground_bit` over the literals. A ground literal only matches
    /// itself, so a subsumer's ground bits are a subset of the target's.
    pub ground_signature: u64,
    pub var_count: VarId,
}

impl PClause {
    /// Builds a clause: drops repeated literals, rejects tautologies, and
    /// renumbers variables from zero in order of first occurrence.
    pub fn normalized(lits: Vec<PLit>) -> Option<PClause> {
        let mut out: Vec<PLit> = Vec::with_capacity(lits.len());
        for l in lits {
            if out.iter().any(|o| o.pred == l.pred && o.positive != l.positive && o.args == l.args) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        let mut map: HashMap<VarId, VarId> = HashMap::new();
        fn renum(t: &PTerm, map: &mut HashMap<VarId, VarId>) -> PTerm {
            match t {
                PTerm::Var(v) => {
                    let n = map.len() as VarId;
                    PTerm::Var(*map.entry(*v).or_insert(n))
                }
                PTerm::Fn(f, args) => PTerm::Fn(*f, args.iter().map(|a| renum(a, map)).collect()),
            }
        }
        let lits: Vec<PLit> = out
            .into_iter()
            .map(|l| PLit { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| renum(a, &mut map)).collect() })
            .collect();
        let weight = lits.iter().map(|l| 1 + l.args.iter().map(PTerm::symbols).sum::<usize>()).sum();
        let signature = lits.iter().fold(0, |acc, l| acc | l.signature_bit());
        let ground_signature = lits.iter().fold(0, |acc, l| acc | l.ground_bit());
        Some(PClause { lits, weight, signature, ground_signature, var_count: map.len() as VarId })
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.lits.iter().flat_map(|l| &l.args).map(PTerm::depth).max().unwrap_or(0)
    }

    /// Copy with every variable shifted by `by`.
    pub fn shifted(&self, by: VarId) -> Vec<PLit> {
        self.lits
            .iter()
            .map(|l| PLit { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| a.shift(by)).collect() })
            .collect()
    }

    /// True iff some substitution maps every literal of `self` onto a
    /// literal of `other`.
    pub fn subsumes(&self, other: &PClause) -> bool {
        if self.lits.len() > other.lits.len()
            || self.signature & !other.signature != 0
            || self.ground_signature & !other.ground_signature != 0
        {
            return false;
        }
        if self.var_count == 0 {
            return self.lits.iter().all(|l| other.lits.contains(l));
        }
        let mut b = vec![None; self.var_count as usize];
        subsume_from(&self.lits, 0, &other.lits, &mut b, &mut Vec::new())
    }
}

fn subsume_from(pat: &[PLit], i: usize, target: &[PLit], b: &mut Vec<Option<PTerm>>, trail: &mut Vec<usize>) -> bool {
    let Some(l) = pat.get(i) else { return true };
    for t in target {
        if t.positive != l.positive || t.pred != l.pred || t.args.len() != l.args.len() {
            continue;
        }
        let mark = trail.len();
        if l.args.iter().zip(&t.args).all(|(x, y)| match_term(x, y, b, trail)) && subsume_from(pat, i + 1, target, b, trail) {
            return true;
        }
        for v in trail.drain(mark..) {
            b[v] = None;
        }
    }
    false
}

pub(crate) fn max_var_of(lits: &[PLit]) -> Option<VarId> {
    lits.iter().flat_map(|l| &l.args).filter_map(PTerm::max_var).max()
}

/// Symbol and variable interning between the string-based clause types and
/// the prover's representation.
#[derive(Clone, Debug, Default)]
pub(crate) struct Interner {
    ids: HashMap<String, Sym>,
    names: Vec<String>,
}

impl Interner {
    pub fn sym(&mut self, name: &str) -> Sym {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as Sym;
        self.ids.insert(name.to_string(), id);
        self.names.push(name.to_string());
        id
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s as usize]
    }

    pub fn term(&mut self, t: &Term, vars: &mut HashMap<String, VarId>) -> PTerm {
        match t {
            Term::Var(v) => {
                let n = vars.len() as VarId;
                PTerm::Var(*vars.entry(v.clone()).or_insert(n))
            }
            Term::Const(c) => PTerm::Fn(self.sym(c), Vec::new()),
            Term::App(f, args) => {
                let f = self.sym(f);
                PTerm::Fn(f, args.iter().map(|a| self.term(a, vars)).collect())
            }
        }
    }

    pub fn literal(&mut self, l: &Literal, vars: &mut HashMap<String, VarId>) -> PLit {
        PLit {
            positive: l.positive,
            pred: self.sym(&l.atom.predicate),
            args: l.atom.args.iter().map(|a| self.term(a, vars)).collect(),
        }
    }

    pub fn clause(&mut self, c: &Clause) -> Vec<PLit> {
        let mut vars = HashMap::new();
        c.literals.iter().map(|l| self.literal(l, &mut vars)).collect()
    }

    /// Converts back, naming variables with `var_name`.
    pub fn to_term(&self, t: &PTerm, var_name: &dyn Fn(VarId) -> String) -> Term {
        match t {
            PTerm::Var(v) => Term::Var(var_name(*v)),
            PTerm::Fn(f, args) if args.is_empty() => Term::Const(self.name(*f).to_string()),
            PTerm::Fn(f, args) => {
                Term::App(self.name(*f).to_string(), args.iter().map(|a| self.to_term(a, var_name)).collect())
            }
        }
    }

    pub fn to_literal(&self, l: &PLit) -> Literal {
        let name = |v: VarId| clause_var_name(v as usize);
        Literal {
            positive: l.positive,
            atom: Atom {
                predicate: self.name(l.pred).to_string(),
                args: l.args.iter().map(|a| self.to_term(a, &name)).collect(),
            },
        }
    }
}
