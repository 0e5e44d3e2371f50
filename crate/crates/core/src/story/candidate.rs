//! Sampled completions and their interchange lines.

use serde::{Deserialize, Serialize};

use super::completion::{parse_completion, CompletionFailure, ParsedCompletion};
use super::corpus::LineDiagnostic;
use super::model::{FolStory, GenerationMeta};
use crate::oracle::{classify_with, ErrorReason, LabelOptions, LabelResult};

/// One generated translation of a story.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub story_id: String,
    pub meta: GenerationMeta,
    pub raw_completion: String,
    pub parsed: Result<ParsedCompletion, CompletionFailure>,
    /// `None` until labeled.
    pub label: Option<LabelResult>,
}

impl CandidateRecord {
    pub fn new(story_id: impl Into<String>, meta: GenerationMeta, raw_completion: impl Into<String>, expected_premises: Option<usize>) -> Self {
        let raw_completion = raw_completion.into();
        let parsed = parse_completion(&raw_completion, expected_premises);
        Self { story_id: story_id.into(), meta, raw_completion, parsed, label: None }
    }

    /// A record for a sample that never produced a completion.
    pub fn generation_failure(story_id: impl Into<String>, meta: GenerationMeta, message: impl Into<String>) -> Self {
        Self {
            story_id: story_id.into(),
            meta,
            raw_completion: String::new(),
            parsed: Err(CompletionFailure::new(ErrorReason::Generation, message)),
            label: None,
        }
    }

    /// Re-parses the completion against a known premise count.
    pub fn realign(&mut self, expected_premises: usize) {
        if !matches!(&self.parsed, Err(f) if f.reason == ErrorReason::Generation) {
            self.parsed = parse_completion(&self.raw_completion, Some(expected_premises));
            self.label = None;
        }
    }

    pub fn story(&self) -> Option<&FolStory> {
        self.parsed.as_ref().ok().map(|p| &p.story)
    }

    /// Labels the parsed story; failed parses become `Error` with the
    /// failure's reason.
    pub fn compute_label(&self, opts: &LabelOptions) -> LabelResult {
        match &self.parsed {
            Ok(p) => classify_with(&p.story, opts).without_proofs(),
            Err(f) => LabelResult::error(f.reason, f.message.clone()),
        }
    }

    pub fn to_line(&self) -> CandidateLine {
        CandidateLine {
            story_id: self.story_id.clone(),
            model: self.meta.model_name.clone(),
            shots: self.meta.shots,
            temperature: self.meta.temperature,
            sample_index: self.meta.sample_index,
            completion: self.raw_completion.clone(),
            error: match &self.parsed {
                Err(f) if f.reason == ErrorReason::Generation => Some(f.message.clone()),
                _ => None,
            },
        }
    }
}

/// Candidate interchange record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateLine {
    pub story_id: String,
    pub model: String,
    pub shots: usize,
    pub temperature: f64,
    pub sample_index: usize,
    pub completion: String,
    /// Set when generation failed; `completion` is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CandidateLine {
    pub fn into_record(self, expected_premises: Option<usize>) -> CandidateRecord {
        let meta = GenerationMeta {
            model_name: self.model,
            shots: self.shots,
            temperature: self.temperature,
            sample_index: self.sample_index,
            timestamp: None,
        };
        match self.error {
            Some(e) => CandidateRecord::generation_failure(self.story_id, meta, e),
            None => CandidateRecord::new(self.story_id, meta, self.completion, expected_premises),
        }
    }
}

/// Reads candidate lines; malformed lines are skipped with a diagnostic.
pub fn parse_candidates(text: &str) -> (Vec<CandidateRecord>, Vec<LineDiagnostic>) {
    let mut records = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CandidateLine>(line) {
            Ok(c) => records.push(c.into_record(None)),
            Err(e) => diags.push(LineDiagnostic { line: i + 1, message: e.to_string(), skipped: true }),
        }
    }
    (records, diags)
}
