//! Few-shot prompt construction with HTML-style section tags.

use std::fmt::Write;

use thiserror::Error;

use super::model::{FolStory, NlStory};

pub const HEADER: &str = "You are an expert in working with first-order logic (FOL) problems.";

const INSTRUCTIONS: &[&str] = &[
    HEADER,
    "You will be given a context with a set of premise sentences and a single conclusion sentence.",
    "Your task is to translate each of the premise sentences and the conclusion sentence into FOL expressions,",
    "so that the expressions can be evaluated by a theorem solver to determine whether the conclusion follows from the premise sentences.",
    "Expressions should adhere to the format of the Python NLTK package logic module.",
];

const AFTER_EXAMPLES: &[&str] = &[
    "Notice the output inside the <EVALUATE> and </EVALUATE> block. We have taken each sentence from our premise and conclusion and",
    "converted it to the corresponding FOL expression. The lines starting with TEXT: copy the original sentence from our context. The lines starting",
    "with FOL: show the corresponding FOL form.",
];

const QUERY_FEW_SHOT: &str =
    "Can you now generate the FOL expressions for the following example, maintaining the format shown earlier. Do not generate any explanations.";

const QUERY_ZERO_SHOT: &str = "Generate the FOL expressions for the following example. Inside the <EVALUATE> block, alternate lines starting with TEXT: (the original sentence) and FOL: (its FOL form), ending with the conclusion, then close the block with </EVALUATE>. Do not generate any explanations.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("{requested} examples requested but only {available} available")]
    NotEnoughExemplars { requested: usize, available: usize },
    #[error("exemplar `{id}` has {sentences} premise sentences but {formulas} premise formulas")]
    ExemplarMismatch { id: String, sentences: usize, formulas: usize },
}

/// Builds the prompt for `story` using the first `n` exemplars. The result
/// ends with an opened `<EVALUATE>` tag.
pub fn build_prompt(story: &NlStory, exemplars: &[(NlStory, FolStory)], n: usize) -> Result<String, PromptError> {
    if n > exemplars.len() {
        return Err(PromptError::NotEnoughExemplars { requested: n, available: exemplars.len() });
    }
    let mut out = String::new();
    for line in INSTRUCTIONS {
        out.push_str(line);
        out.push('\n');
    }
    if n > 0 {
        out.push_str("Here are some examples of the task:\n");
        for (i, (nl, fol)) in exemplars[..n].iter().enumerate() {
            if nl.premises.len() != fol.premises.len() {
                return Err(PromptError::ExemplarMismatch {
                    id: nl.id.clone(),
                    sentences: nl.premises.len(),
                    formulas: fol.premises.len(),
                });
            }
            let _ = writeln!(out, "\nExample {}:", i + 1);
            push_context(&mut out, nl);
            let texts: Vec<&str> = nl.premises.iter().chain([&nl.conclusion]).map(String::as_str).collect();
            out.push_str(&evaluate_block(&texts, &fol.lines()));
        }
        out.push('\n');
        for line in AFTER_EXAMPLES {
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(QUERY_FEW_SHOT);
    } else {
        out.push('\n');
        out.push_str(QUERY_ZERO_SHOT);
    }
    out.push('\n');
    push_context(&mut out, story);
    out.push_str("<EVALUATE>\n");
    Ok(out)
}

fn push_context(out: &mut String, story: &NlStory) {
    out.push_str("<PREMISES>\n");
    for p in &story.premises {
        out.push_str(p);
        out.push('\n');
    }
    out.push_str("</PREMISES>\n<CONCLUSION>\n");
    out.push_str(&story.conclusion);
    out.push_str("\n</CONCLUSION>\n");
}

/// A closed `<EVALUATE>` block pairing each sentence with its formula text.
/// Formula lines beyond the sentences are written without a `TEXT:` line.
pub fn evaluate_block<S: AsRef<str>>(texts: &[&str], fols: &[S]) -> String {
    let mut out = String::from("<EVALUATE>\n");
    for (i, fol) in fols.iter().enumerate() {
        if let Some(t) = texts.get(i) {
            let _ = writeln!(out, "TEXT:\t{t}");
        }
        let _ = writeln!(out, "FOL:\t{}", fol.as_ref());
    }
    out.push_str("</EVALUATE>\n");
    out
}
