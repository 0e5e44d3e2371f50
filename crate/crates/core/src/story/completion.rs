//! Extraction of a FOL story from a model completion.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::FolStory;
use crate::oracle::ErrorReason;
use crate::syntax::{parse_formula, ParseDiagnostic};

const OPEN: &str = "<EVALUATE>";
const CLOSE: &[&str] = &["</EVALUATE>", "<\\EVALUATE>"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompletionWarning {
    /// The region ran to the end of the text.
    MissingCloseTag,
    /// Premise formula count differs from the source story.
    Alignment { expected: usize, found: usize },
}

impl fmt::Display for CompletionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompletionWarning::MissingCloseTag => write!(f, "missing </EVALUATE>; read to end of text"),
            CompletionWarning::Alignment { expected, found } => {
                write!(f, "expected {expected} premise formulas, found {found}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedCompletion {
    pub story: FolStory,
    /// `TEXT:` lines in order of appearance.
    pub texts: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<CompletionWarning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionFailure {
    pub reason: ErrorReason,
    pub message: String,
    /// Index among the `FOL:` lines of the offending formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl CompletionFailure {
    pub fn new(reason: ErrorReason, message: impl Into<String>) -> Self {
        Self { reason, message: message.into(), formula_index: None, diagnostics: Vec::new() }
    }
}

impl fmt::Display for CompletionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.reason, self.message)
    }
}

/// Reads the first `<EVALUATE>` region. `FOL:` lines are premises in order
/// with the last one taken as the conclusion; lines without a prefix continue
/// the previous entry.
pub fn parse_completion(text: &str, expected_premises: Option<usize>) -> Result<ParsedCompletion, CompletionFailure> {
    let Some(start) = text.find(OPEN) else {
        return Err(CompletionFailure::new(ErrorReason::Parse, "no <EVALUATE> region"));
    };
    let body = &text[start + OPEN.len()..];
    let mut warnings = Vec::new();
    let end = CLOSE.iter().filter_map(|c| body.find(c)).min();
    let region = match end {
        Some(e) => &body[..e],
        None => {
            warnings.push(CompletionWarning::MissingCloseTag);
            body
        }
    };

    enum Last {
        None,
        Text,
        Fol,
    }
    let mut texts: Vec<String> = Vec::new();
    let mut fols: Vec<String> = Vec::new();
    let mut last = Last::None;
    for line in region.lines().map(str::trim) {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("TEXT:") {
            texts.push(rest.trim().to_string());
            last = Last::Text;
        } else if let Some(rest) = line.strip_prefix("FOL:") {
            fols.push(rest.trim().to_string());
            last = Last::Fol;
        } else {
            let target = match last {
                Last::Text => texts.last_mut(),
                Last::Fol => fols.last_mut(),
                Last::None => None,
            };
            if let Some(t) = target {
                t.push(' ');
                t.push_str(line);
            }
        }
    }

    if fols.is_empty() {
        return Err(CompletionFailure::new(ErrorReason::Parse, "no FOL: lines in <EVALUATE> region"));
    }
    let mut formulas = Vec::with_capacity(fols.len());
    for (i, line) in fols.iter().enumerate() {
        match parse_formula(line) {
            Ok(f) => formulas.push(f),
            Err(diagnostics) => {
                let first = diagnostics.first().map(|d| d.to_string()).unwrap_or_default();
                return Err(CompletionFailure {
                    reason: ErrorReason::Parse,
                    message: format!("FOL line {} `{line}`: {first}", i + 1),
                    formula_index: Some(i),
                    diagnostics,
                });
            }
        }
    }
    let conclusion = formulas.pop().expect("at least one formula");
    if formulas.is_empty() {
        return Err(CompletionFailure::new(ErrorReason::Alignment, "only a conclusion formula, no premises"));
    }
    if let Some(expected) = expected_premises {
        if expected != formulas.len() {
            warnings.push(CompletionWarning::Alignment { expected, found: formulas.len() });
        }
    }
    Ok(ParsedCompletion {
        story: FolStory { premises: formulas, conclusion, raw_lines: fols },
        texts,
        warnings,
    })
}
