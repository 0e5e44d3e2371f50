//! Story data model, corpus ingestion, few-shot prompts and completion parsing.

mod candidate;
mod completion;
mod corpus;
mod model;
mod prompt;

pub use candidate::{parse_candidates, CandidateLine, CandidateRecord};
pub use completion::{parse_completion, CompletionFailure, CompletionWarning, ParsedCompletion};
pub use corpus::{bundled_exemplars, load_corpus, parse_corpus, Corpus, CorpusRecord, LineDiagnostic};
pub use model::{FolStory, GenerationMeta, Label, NlStory, StoryError};
pub use prompt::{build_prompt, evaluate_block, PromptError, HEADER};
