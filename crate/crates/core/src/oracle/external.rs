//! Prover9 input emission and cross-checking against an external binary.

use std::collections::{BTreeSet, HashMap};
use std::env;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{classify, LabelResult};
use crate::clausify::close_free;
use crate::prover::Budget;
use crate::story::{FolStory, Label};
use crate::syntax::{expand_xor, Formula, Term};

/// Which side to put in the goal list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Goal {
    Conclusion,
    Negation,
}

/// Prover9 input proving the conclusion from the premises. Free variables are
/// closed, exclusive-or is expanded, and constants whose names Prover9 would
/// read as variables are renamed.
pub fn emit_external(story: &FolStory, max_seconds: Option<u64>) -> String {
    emit(story, Goal::Conclusion, max_seconds)
}

fn emit(story: &FolStory, goal: Goal, max_seconds: Option<u64>) -> String {
    let renames = constant_renames(story);
    let mut out = String::new();
    if let Some(s) = max_seconds {
        out.push_str(&format!("assign(max_seconds, {s}).\n\n"));
    }
    out.push_str("formulas(assumptions).\n");
    for p in &story.premises {
        out.push_str(&format!("  {}.\n", p9_formula(&prepare(p), &renames)));
    }
    out.push_str("end_of_list.\n\nformulas(goals).\n");
    let c = prepare(&story.conclusion);
    let c = match goal {
        Goal::Conclusion => c,
        Goal::Negation => Formula::not(c),
    };
    out.push_str(&format!("  {}.\nend_of_list.\n", p9_formula(&c, &renames)));
    out
}

fn prepare(f: &Formula) -> Formula {
    expand_xor(&close_free(f))
}

fn constant_renames(story: &FolStory) -> HashMap<String, String> {
    let taken = story.symbol_names();
    let mut consts = BTreeSet::new();
    for f in story.formulas() {
        f.visit_atoms(&mut |a| {
            let args: Vec<&Term> = match a {
                Formula::Pred(_, args) => args.iter().collect(),
                Formula::Eq(l, r) => vec![l, r],
                _ => Vec::new(),
            };
            for t in args {
                collect_consts(t, &mut consts);
            }
        });
    }
    let mut renames = HashMap::new();
    let mut used = taken.clone();
    for c in consts {
        if c.starts_with(|ch: char| ('u'..='z').contains(&ch)) {
            let mut name = format!("c_{c}");
            while used.contains(&name) {
                name.insert(0, 'c');
            }
            used.insert(name.clone());
            renames.insert(c, name);
        }
    }
    renames
}

fn collect_consts(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(_) => {}
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_consts(a, out)),
    }
}

fn p9_term(t: &Term, renames: &HashMap<String, String>) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => renames.get(c).cloned().unwrap_or_else(|| c.clone()),
        Term::App(f, args) => {
            let args: Vec<String> = args.iter().map(|a| p9_term(a, renames)).collect();
            format!("{f}({})", args.join(", "))
        }
    }
}

fn p9_formula(f: &Formula, r: &HashMap<String, String>) -> String {
    match f {
        Formula::Pred(p, args) if args.is_empty() => p.clone(),
        Formula::Pred(p, args) => {
            let args: Vec<String> = args.iter().map(|a| p9_term(a, r)).collect();
            format!("{p}({})", args.join(", "))
        }
        Formula::Eq(a, b) => format!("({} = {})", p9_term(a, r), p9_term(b, r)),
        Formula::Not(g) => match g.as_ref() {
            Formula::Pred(..) => format!("-{}", p9_formula(g, r)),
            _ => format!("-({})", p9_formula(g, r)),
        },
        Formula::And(a, b) => format!("({} & {})", p9_formula(a, r), p9_formula(b, r)),
        Formula::Or(a, b) => format!("({} | {})", p9_formula(a, r), p9_formula(b, r)),
        Formula::Implies(a, b) => format!("({} -> {})", p9_formula(a, r), p9_formula(b, r)),
        Formula::Iff(a, b) => format!("({} <-> {})", p9_formula(a, r), p9_formula(b, r)),
        Formula::Xor(..) => p9_formula(&expand_xor(f), r),
        Formula::ForAll(v, body) => format!("(all {v} {})", p9_formula(body, r)),
        Formula::Exists(v, body) => format!("(exists {v} {})", p9_formula(body, r)),
    }
}

/// Outcome of one external run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExternalVerdict {
    Proved,
    Failed,
    Timeout,
    Crashed(String),
}

impl ExternalVerdict {
    fn proved(&self) -> bool {
        matches!(self, ExternalVerdict::Proved)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckOptions {
    pub binary: PathBuf,
    pub workers: usize,
    pub budget: Budget,
}

impl Default for CrossCheckOptions {
    fn default() -> Self {
        Self { binary: PathBuf::from("prover9"), workers: 4, budget: Budget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub index: usize,
    pub internal: Label,
    pub external: Label,
    pub goal: ExternalVerdict,
    pub negated_goal: ExternalVerdict,
    pub agree: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    /// Set when the external binary could not be used at all.
    pub skipped: Option<String>,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn agreements(&self) -> usize {
        self.rows.iter().filter(|r| r.agree).count()
    }

    pub fn agreement_rate(&self) -> Option<f64> {
        (!self.rows.is_empty()).then(|| self.agreements() as f64 / self.rows.len() as f64)
    }
}

/// Resolves `binary` against `PATH` when it has no directory component.
pub fn find_binary(binary: &Path) -> Option<PathBuf> {
    if binary.components().count() > 1 {
        return binary.is_file().then(|| binary.to_path_buf());
    }
    env::split_paths(&env::var_os("PATH")?).map(|d| d.join(binary)).find(|p| p.is_file())
}

/// Labels every story internally and with the external prover, which is run
/// twice per story (goal and negated goal) with the budget's time limit.
pub fn cross_check(stories: &[FolStory], opts: &CrossCheckOptions) -> CrossCheckReport {
    if stories.is_empty() {
        return CrossCheckReport::default();
    }
    let Some(binary) = find_binary(&opts.binary) else {
        return CrossCheckReport {
            skipped: Some(format!("external prover `{}` not found", opts.binary.display())),
            rows: Vec::new(),
        };
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => return CrossCheckReport { skipped: Some(e.to_string()), rows: Vec::new() },
    };
    let seconds = opts.budget.max_seconds.ceil().max(1.0) as u64;
    let rows = pool.install(|| {
        stories
            .par_iter()
            .enumerate()
            .map(|(index, story)| {
                let internal: LabelResult = classify(story, &opts.budget);
                let goal = run_external(&binary, &emit(story, Goal::Conclusion, Some(seconds)), seconds);
                let negated_goal = run_external(&binary, &emit(story, Goal::Negation, Some(seconds)), seconds);
                let external = match (goal.proved(), negated_goal.proved()) {
                    (true, true) => Label::Error,
                    (true, false) => Label::True,
                    (false, true) => Label::False,
                    (false, false) => Label::Uncertain,
                };
                CrossCheckRow { index, internal: internal.label, external, agree: internal.label == external, goal, negated_goal }
            })
            .collect()
    });
    CrossCheckReport { skipped: None, rows }
}

fn run_external(binary: &Path, input: &str, seconds: u64) -> ExternalVerdict {
    let mut child = match Command::new(binary)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return ExternalVerdict::Crashed(e.to_string()),
    };
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    if let Some(mut stdin) = child.stdin.take() {
        let _ = stdin.write_all(input.as_bytes());
    }
    // Grace period on top of the prover's own limit.
    let limit = Duration::from_secs(seconds + 5);
    let status = match child.wait_timeout(limit) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return ExternalVerdict::Timeout;
        }
        Err(e) => return ExternalVerdict::Crashed(e.to_string()),
    };
    let out = reader.join().unwrap_or_default();
    if out.contains("THEOREM PROVED") {
        ExternalVerdict::Proved
    } else if out.contains("SEARCH FAILED") {
        ExternalVerdict::Failed
    } else if out.contains("max_seconds") || out.contains("MAX_SECONDS") {
        ExternalVerdict::Timeout
    } else {
        ExternalVerdict::Crashed(format!("unrecognised output (exit {status})"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_prover9_lists() {
        let story = FolStory::parse(&["all x. (Man(x) -> Mortal(x))", "Man(socrates)"], "Mortal(socrates)").unwrap();
        let text = emit_external(&story, None);
        assert_eq!(
            text,
            "formulas(assumptions).\n  (all x (Man(x) -> Mortal(x))).\n  Man(socrates).\nend_of_list.\n\n\
             formulas(goals).\n  Mortal(socrates).\nend_of_list.\n"
        );
    }

    #[test]
    fn renames_variable_like_constants_and_closes_free_variables() {
        let story = FolStory::parse(&["Wooden(wood)", "P(x) ⊕ Q(x)"], "Wooden(wood)").unwrap();
        let text = emit_external(&story, Some(3));
        assert!(text.starts_with("assign(max_seconds, 3).\n"));
        assert!(text.contains("Wooden(c_wood)"));
        assert!(text.contains("(all x ((P(x) & -Q(x)) | (-P(x) & Q(x))))"));
    }

    #[test]
    fn missing_binary_skips() {
        let story = FolStory::parse(&["P(a)"], "P(a)").unwrap();
        let opts = CrossCheckOptions { binary: PathBuf::from("definitely-not-a-prover-binary"), ..Default::default() };
        let report = cross_check(&[story], &opts);
        assert!(report.skipped.is_some());
        assert!(report.rows.is_empty());
        assert!(cross_check(&[], &opts).skipped.is_none());
    }
}
