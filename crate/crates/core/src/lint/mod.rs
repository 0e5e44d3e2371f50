//! Predicate-consistency diagnostics for generated FOL stories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::story::{CandidateRecord, FolStory, Label};
use crate::oracle::ErrorReason;
use crate::syntax::{parse_formula, Formula, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolKind {
    Predicate,
    Function,
    Constant,
}

/// One (name, kind, arity) combination and the formulas using it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureRow {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
    pub sites: Vec<usize>,
}

/// Symbol census over premises and conclusion (conclusion index last), sorted
/// by kind, name and arity.
pub fn signatures(story: &FolStory) -> Vec<SignatureRow> {
    let mut table: BTreeMap<(SymbolKind, String, usize), BTreeSet<usize>> = BTreeMap::new();
    for (i, f) in story.formulas().enumerate() {
        let mut add = |kind, name: &str, arity| {
            table.entry((kind, name.to_string(), arity)).or_default().insert(i);
        };
        f.visit_atoms(&mut |a| {
            let terms: Vec<&Term> = match a {
                Formula::Pred(p, args) => {
                    add(SymbolKind::Predicate, p, args.len());
                    args.iter().collect()
                }
                Formula::Eq(l, r) => vec![l, r],
                _ => Vec::new(),
            };
            for t in terms {
                term_symbols(t, &mut add);
            }
        });
    }
    table
        .into_iter()
        .map(|((kind, name, arity), sites)| SignatureRow { name, kind, arity, sites: sites.into_iter().collect() })
        .collect()
}

fn term_symbols(t: &Term, add: &mut impl FnMut(SymbolKind, &str, usize)) {
    match t {
        Term::Var(_) => {}
        Term::Const(c) => add(SymbolKind::Constant, c, 0),
        Term::App(f, args) => {
            add(SymbolKind::Function, f, args.len());
            for a in args {
                term_symbols(a, add);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticKind {
    ArityMismatch,
    NearDuplicatePredicate,
    ConclusionVocabularyDisjoint,
    UnusedPremisePredicate,
    FreeVariableClosed,
    SyntaxError,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub formula_indices: Vec<usize>,
    pub symbols: Vec<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.formula_indices.iter().map(usize::to_string).collect();
        write!(f, "{:?} [formulas {}]: {}", self.kind, idx.join(","), self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintOptions {
    pub max_edit_distance: usize,
    pub max_prefix_suffix: usize,
    /// Names shorter than this are exempt from the edit-distance rule, which
    /// would otherwise pair every one- or two-letter predicate.
    pub min_edit_length: usize,
}

impl Default for LintOptions {
    fn default() -> Self {
        Self { max_edit_distance: 2, max_prefix_suffix: 6, min_edit_length: 4 }
    }
}

pub fn lint(story: &FolStory) -> Vec<Diagnostic> {
    lint_with(story, &LintOptions::default())
}

pub fn lint_with(story: &FolStory, opts: &LintOptions) -> Vec<Diagnostic> {
    let rows = signatures(story);
    let preds: Vec<&SignatureRow> = rows.iter().filter(|r| r.kind == SymbolKind::Predicate).collect();
    let mut out = Vec::new();

    let mut by_name: BTreeMap<&str, Vec<&SignatureRow>> = BTreeMap::new();
    for r in &preds {
        by_name.entry(&r.name).or_default().push(r);
    }
    for (name, rs) in &by_name {
        if rs.len() > 1 {
            let arities: Vec<String> = rs.iter().map(|r| r.arity.to_string()).collect();
            out.push(Diagnostic {
                kind: DiagnosticKind::ArityMismatch,
                formula_indices: union_sites(rs.iter().copied()),
                symbols: vec![name.to_string()],
                message: format!("`{name}` is used with arities {}", arities.join(" and ")),
            });
        }
    }

    let names: Vec<&str> = by_name.keys().copied().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            if let Some(why) = near_duplicate(a, b, opts) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::NearDuplicatePredicate,
                    formula_indices: union_sites(by_name[a].iter().chain(&by_name[b]).copied()),
                    symbols: vec![a.to_string(), b.to_string()],
                    message: format!("`{a}` and `{b}` look like the same predicate ({why})"),
                });
            }
        }
    }

    let ci = story.conclusion_index();
    let preds_of = |f: &Formula| -> BTreeSet<String> { f.predicates().into_iter().map(|(n, _)| n).collect() };
    let concl = preds_of(&story.conclusion);
    let premise_sets: Vec<BTreeSet<String>> = story.premises.iter().map(preds_of).collect();
    let premise_vocab: BTreeSet<&String> = premise_sets.iter().flatten().collect();
    if !concl.is_empty() && concl.iter().all(|p| !premise_vocab.contains(p)) {
        out.push(Diagnostic {
            kind: DiagnosticKind::ConclusionVocabularyDisjoint,
            formula_indices: vec![ci],
            symbols: concl.iter().cloned().collect(),
            message: "no conclusion predicate occurs in any premise".into(),
        });
    } else {
        let mut reached = concl.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for set in &premise_sets {
                if set.iter().any(|p| reached.contains(p)) {
                    for p in set {
                        changed |= reached.insert(p.clone());
                    }
                }
            }
        }
        for name in premise_vocab.iter().filter(|p| !reached.contains(**p)) {
            let sites = premise_sets.iter().enumerate().filter(|(_, s)| s.contains(*name)).map(|(i, _)| i).collect();
            out.push(Diagnostic {
                kind: DiagnosticKind::UnusedPremisePredicate,
                formula_indices: sites,
                symbols: vec![name.to_string()],
                message: format!("`{name}` is not connected to the conclusion's predicates"),
            });
        }
    }

    for (i, f) in story.formulas().enumerate() {
        let free = f.free_vars();
        if !free.is_empty() {
            out.push(Diagnostic {
                kind: DiagnosticKind::FreeVariableClosed,
                formula_indices: vec![i],
                symbols: Vec::new(),
                message: format!("free variable(s) {} universally closed", free.join(", ")),
            });
        }
    }
    out
}

/// Lints formula text (premises, then the conclusion last); a line that does
/// not parse yields a single `SyntaxError`.
pub fn lint_source<S: AsRef<str>>(lines: &[S], opts: &LintOptions) -> Vec<Diagnostic> {
    for (i, line) in lines.iter().enumerate() {
        if let Err(diags) = parse_formula(line.as_ref()) {
            let first = diags.first().map(|d| d.to_string()).unwrap_or_default();
            return vec![Diagnostic {
                kind: DiagnosticKind::SyntaxError,
                formula_indices: vec![i],
                symbols: Vec::new(),
                message: first,
            }];
        }
    }
    match lines.split_last() {
        Some((c, ps)) => match FolStory::parse(ps, c.as_ref()) {
            Ok(story) => lint_with(&story, opts),
            Err(e) => vec![Diagnostic {
                kind: DiagnosticKind::SyntaxError,
                formula_indices: Vec::new(),
                symbols: Vec::new(),
                message: e.to_string(),
            }],
        },
        None => Vec::new(),
    }
}

fn union_sites<'a>(rows: impl Iterator<Item = &'a SignatureRow>) -> Vec<usize> {
    rows.flat_map(|r| r.sites.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn near_duplicate(a: &str, b: &str, opts: &LintOptions) -> Option<String> {
    let (short, long) = if a.chars().count() <= b.chars().count() { (a, b) } else { (b, a) };
    if let Some(suffix) = long.strip_prefix(short) {
        let n = suffix.chars().count();
        if n > 0 && n <= opts.max_prefix_suffix {
            return Some(format!("prefix with {n}-character suffix"));
        }
    }
    if short.chars().count() >= opts.min_edit_length {
        let d = strsim::levenshtein(a, b);
        if d <= opts.max_edit_distance {
            return Some(format!("edit distance {d}"));
        }
    }
    None
}

/// Automated proxy for the failure taxonomy over mismatching candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureHistogram {
    #[serde(rename = "L3_syntax")]
    pub l3_syntax: usize,
    pub consistency_suspect: usize,
    pub other_logic: usize,
}

impl FailureHistogram {
    pub fn total(&self) -> usize {
        self.l3_syntax + self.consistency_suspect + self.other_logic
    }
}

/// Buckets every labeled candidate whose label differs from `gold`. Parse
/// failures are syntax errors; other mismatches are consistency suspects when
/// lint reports anything, and residual logic failures otherwise.
pub fn tag_failures<'a>(items: impl IntoIterator<Item = (&'a CandidateRecord, Label)>) -> FailureHistogram {
    let mut h = FailureHistogram::default();
    for (c, gold) in items {
        let Some(label) = &c.label else { continue };
        if label.label == gold {
            continue;
        }
        if label.error_reason == Some(ErrorReason::Parse) {
            h.l3_syntax += 1;
        } else if c.story().is_some_and(|s| !lint(s).is_empty()) {
            h.consistency_suspect += 1;
        } else {
            h.other_logic += 1;
        }
    }
    h
}
