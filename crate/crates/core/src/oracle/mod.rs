//! Logical label of a FOL story by two refutation attempts:
//! `premises ∪ {¬C}` (entailment) and `premises ∪ {C}` (contradiction).

mod external;

use serde::{Deserialize, Serialize};

use crate::clausify::{to_clauses, ClausifyError, ClausifyOptions};
use crate::prover::{refute_with, Budget, ProverConfig, RefutationOutcome, RefutationStatus};
use crate::story::{FolStory, Label};

pub use external::{
    cross_check, emit_external, find_binary, CrossCheckOptions, CrossCheckReport, CrossCheckRow, ExternalVerdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorReason {
    Parse,
    Alignment,
    ClauseExplosion,
    InconsistentPremises,
    /// No completion was obtained from the generator.
    Generation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelResult {
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_reason: Option<ErrorReason>,
    /// Some refutation attempt stopped on a resource limit.
    pub budget_limited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entail_outcome: Option<RefutationOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contradict_outcome: Option<RefutationOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl LabelResult {
    /// An `Error` label produced before any proving.
    pub fn error(reason: ErrorReason, message: impl Into<String>) -> Self {
        Self {
            label: Label::Error,
            error_reason: Some(reason),
            budget_limited: false,
            entail_outcome: None,
            contradict_outcome: None,
            message: Some(message.into()),
        }
    }

    /// Drops proof traces, keeping only the statistics.
    pub fn without_proofs(mut self) -> Self {
        for o in [&mut self.entail_outcome, &mut self.contradict_outcome].into_iter().flatten() {
            o.proof = None;
        }
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LabelOptions {
    pub prover: ProverConfig,
    pub clausify: ClausifyOptions,
}

impl From<Budget> for LabelOptions {
    fn from(budget: Budget) -> Self {
        Self { prover: ProverConfig::from(budget), clausify: ClausifyOptions::default() }
    }
}

/// Labels a story under the default prover settings and `budget`.
pub fn classify(story: &FolStory, budget: &Budget) -> LabelResult {
    classify_with(story, &LabelOptions::from(*budget))
}

/// Both refutation directions always run, so inconsistent premises are
/// detected even when the conclusion is entailed.
pub fn classify_with(story: &FolStory, opts: &LabelOptions) -> LabelResult {
    let clauses = match to_clauses(story, &opts.clausify) {
        Ok(c) => c,
        Err(e @ ClausifyError::ClauseExplosion { .. }) => {
            return LabelResult::error(ErrorReason::ClauseExplosion, e.to_string());
        }
    };
    let entail = refute_with(&clauses.entailment_problem(), &opts.prover);
    let contradict = refute_with(&clauses.contradiction_problem(), &opts.prover);
    let budget_limited = [&entail, &contradict].iter().any(|o| o.status == RefutationStatus::BudgetExhausted);
    let (label, error_reason, message) = match (entail.refuted(), contradict.refuted()) {
        (true, true) => (
            Label::Error,
            Some(ErrorReason::InconsistentPremises),
            Some("premises refute both the conclusion and its negation".to_string()),
        ),
        (true, false) => (Label::True, None, None),
        (false, true) => (Label::False, None, None),
        (false, false) => (Label::Uncertain, None, None),
    };
    LabelResult {
        label,
        error_reason,
        budget_limited,
        entail_outcome: Some(entail),
        contradict_outcome: Some(contradict),
        message,
    }
}

/// Parses premise and conclusion text and labels the result; parse failures
/// become `Error(Parse)` without proving.
pub fn classify_text<S: AsRef<str>>(premises: &[S], conclusion: &str, opts: &LabelOptions) -> LabelResult {
    match FolStory::parse(premises, conclusion) {
        Ok(story) => classify_with(&story, opts),
        Err(e) => LabelResult::error(ErrorReason::Parse, e.to_string()),
    }
}
