use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_formula, render, Dialect, Formula, ParseDiagnostic, Term};

/// Logical status of a conclusion given its premises. `Error` is only ever a
/// prediction; gold labels are one of the other three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Uncertain,
    Error,
}

impl Label {
    pub const GOLD: [Label; 3] = [Label::True, Label::False, Label::Uncertain];

    pub fn is_gold(self) -> bool {
        self != Label::Error
    }

    /// Swaps True and False.
    pub fn flip(self) -> Label {
        match self {
            Label::True => Label::False,
            Label::False => Label::True,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "True",
            Label::False => "False",
            Label::Uncertain => "Uncertain",
            Label::Error => "Error",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    /// Case-insensitive; `Unknown` is accepted for `Uncertain`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(Label::True),
            "false" => Ok(Label::False),
            "uncertain" | "unknown" => Ok(Label::Uncertain),
            "error" => Ok(Label::Error),
            other => Err(format!("unrecognized label `{other}`")),
        }
    }
}

/// A natural-language story: premises, one conclusion, and its gold label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlStory {
    pub id: String,
    pub premises: Vec<String>,
    pub conclusion: String,
    pub gold_label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_fol: Option<FolStory>,
}

/// A FOL story: premise formulas plus exactly one conclusion formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FolStory {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    /// Source text per formula, premises first, when the story was parsed.
    #[serde(default)]
    pub raw_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoryError {
    #[error("a story needs at least one premise")]
    NoPremises,
    #[error("formula {index} does not parse: {}", first_message(.diagnostics))]
    Parse { index: usize, text: String, diagnostics: Vec<ParseDiagnostic> },
}

fn first_message(diags: &[ParseDiagnostic]) -> String {
    diags.first().map(|d| d.to_string()).unwrap_or_default()
}

impl FolStory {
    pub fn new(premises: Vec<Formula>, conclusion: Formula) -> Result<Self, StoryError> {
        if premises.is_empty() {
            return Err(StoryError::NoPremises);
        }
        Ok(Self { premises, conclusion, raw_lines: Vec::new() })
    }

    /// Parses premise and conclusion text. The first failing line is reported
    /// with its index (premises first, conclusion last).
    pub fn parse<S: AsRef<str>>(premises: &[S], conclusion: &str) -> Result<Self, StoryError> {
        if premises.is_empty() {
            return Err(StoryError::NoPremises);
        }
        let mut parsed = Vec::with_capacity(premises.len());
        let mut raw = Vec::with_capacity(premises.len() + 1);
        for (index, text) in premises.iter().map(AsRef::as_ref).chain([conclusion]).enumerate() {
            let f = parse_formula(text).map_err(|diagnostics| StoryError::Parse {
                index,
                text: text.to_string(),
                diagnostics,
            })?;
            parsed.push(f);
            raw.push(text.to_string());
        }
        let conclusion = parsed.pop().expect("conclusion parsed");
        Ok(Self { premises: parsed, conclusion, raw_lines: raw })
    }

    /// Text of every formula, premises first: the original lines when they
    /// are known, otherwise the ASCII rendering.
    pub fn lines(&self) -> Vec<String> {
        if self.raw_lines.len() == self.premises.len() + 1 {
            return self.raw_lines.clone();
        }
        self.formulas().map(|f| render(f, Dialect::Ascii)).collect()
    }

    /// Premises followed by the conclusion.
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.premises.iter().chain(std::iter::once(&self.conclusion))
    }

    pub fn conclusion_index(&self) -> usize {
        self.premises.len()
    }

    /// Same premises, different conclusion.
    pub fn with_conclusion(&self, conclusion: Formula) -> Self {
        Self { premises: self.premises.clone(), conclusion, raw_lines: Vec::new() }
    }

    /// Every predicate, function and constant name used anywhere in the story.
    pub fn symbol_names(&self) -> BTreeSet<String> {
        fn term_names(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Var(_) => {}
                Term::Const(n) => {
                    out.insert(n.clone());
                }
                Term::App(n, args) => {
                    out.insert(n.clone());
                    args.iter().for_each(|a| term_names(a, out));
                }
            }
        }
        let mut out = BTreeSet::new();
        for f in self.formulas() {
            f.visit_atoms(&mut |a| match a {
                Formula::Pred(n, args) => {
                    out.insert(n.clone());
                    args.iter().for_each(|t| term_names(t, &mut out));
                }
                Formula::Eq(l, r) => {
                    term_names(l, &mut out);
                    term_names(r, &mut out);
                }
                _ => {}
            });
        }
        out
    }
}

/// Settings under which one candidate completion was sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub model_name: String,
    pub shots: usize,
    pub temperature: f64,
    pub sample_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}
