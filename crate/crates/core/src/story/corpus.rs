//! Line-delimited corpus records.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::model::{FolStory, Label, NlStory};

/// One corpus line as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    #[serde(default, deserialize_with = "id_string")]
    pub id: Option<String>,
    #[serde(deserialize_with = "lines")]
    pub premises: Vec<String>,
    pub conclusion: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premises_fol: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion_fol: Option<String>,
}

impl CorpusRecord {
    pub fn from_story(story: &NlStory) -> Self {
        let raw = story.gold_fol.as_ref().map(FolStory::lines);
        Self {
            id: Some(story.id.clone()),
            premises: story.premises.clone(),
            conclusion: story.conclusion.clone(),
            label: story.gold_label.to_string(),
            conclusion_fol: raw.as_ref().and_then(|r| r.last().cloned()),
            premises_fol: raw.map(|mut r| {
                r.pop();
                r
            }),
        }
    }
}

fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match serde_json::Value::deserialize(d)? {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => Some(s),
        other => Some(other.to_string()),
    })
}

/// Accepts either a list of sentences or one newline-separated string.
fn lines<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Lines {
        List(Vec<String>),
        Text(String),
    }
    Ok(match Lines::deserialize(d)? {
        Lines::List(v) => v,
        Lines::Text(s) => s.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect(),
    })
}

/// Problem with one input line. `skipped` lines contribute no record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
    pub skipped: bool,
}

impl fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = if self.skipped { "skipped" } else { "warning" };
        write!(f, "line {}: {what}: {}", self.line, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub stories: Vec<NlStory>,
    pub diagnostics: Vec<LineDiagnostic>,
}

impl Corpus {
    pub fn skipped(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.skipped).count()
    }

    pub fn get(&self, id: &str) -> Option<&NlStory> {
        self.stories.iter().find(|s| s.id == id)
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> io::Result<Corpus> {
    Ok(parse_corpus(&fs::read_to_string(path)?))
}

/// Parses corpus text. Malformed lines are skipped with a diagnostic; a gold
/// FOL annotation that fails to parse is dropped with a warning.
pub fn parse_corpus(text: &str) -> Corpus {
    let mut corpus = Corpus::default();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let skip = |message: String| LineDiagnostic { line: n, message, skipped: true };
        let rec: CorpusRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                corpus.diagnostics.push(skip(e.to_string()));
                continue;
            }
        };
        let label = match rec.label.parse::<Label>() {
            Ok(l) if l.is_gold() => l,
            _ => {
                corpus.diagnostics.push(skip(format!("unknown label `{}`", rec.label)));
                continue;
            }
        };
        if rec.premises.is_empty() {
            corpus.diagnostics.push(skip("no premises".into()));
            continue;
        }
        if rec.conclusion.trim().is_empty() {
            corpus.diagnostics.push(skip("empty conclusion".into()));
            continue;
        }
        let gold_fol = match (&rec.premises_fol, &rec.conclusion_fol) {
            (Some(p), Some(c)) => match FolStory::parse(p, c) {
                Ok(s) => Some(s),
                Err(e) => {
                    corpus.diagnostics.push(LineDiagnostic {
                        line: n,
                        message: format!("gold FOL ignored: {e}"),
                        skipped: false,
                    });
                    None
                }
            },
            _ => None,
        };
        corpus.stories.push(NlStory {
            id: rec.id.unwrap_or_else(|| format!("line-{n}")),
            premises: rec.premises,
            conclusion: rec.conclusion,
            gold_label: label,
            gold_fol,
        });
    }
    corpus
}

/// The two worked examples bundled with the crate, with their gold FOL.
pub fn bundled_exemplars() -> Vec<(NlStory, FolStory)> {
    parse_corpus(include_str!("../../data/exemplars.jsonl"))
        .stories
        .into_iter()
        .map(|s| {
            let fol = s.gold_fol.clone().expect("bundled exemplars carry FOL");
            (s, fol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_string_premises_and_numeric_ids() {
        let c = parse_corpus(r#"{"id": 7, "premises": "A.\nB.", "conclusion": "C.", "label": "UNKNOWN"}"#);
        assert_eq!(c.stories[0].id, "7");
        assert_eq!(c.stories[0].premises, vec!["A.", "B."]);
        assert_eq!(c.stories[0].gold_label, Label::Uncertain);
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let text = concat!(
            r#"{"id": "a", "premises": ["A."], "label": "True"}"#,
            "\n\nnot json\n",
            r#"{"id": "b", "premises": ["A."], "conclusion": "B.", "label": "Error"}"#,
            "\n",
            r#"{"id": "c", "premises": ["A."], "conclusion": "B.", "label": "False", "premises_fol": ["P(a"], "conclusion_fol": "Q(a)"}"#,
        );
        let c = parse_corpus(text);
        assert_eq!(c.skipped(), 3);
        assert_eq!(c.stories.len(), 1);
        assert!(c.stories[0].gold_fol.is_none());
        assert_eq!(c.diagnostics.iter().map(|d| d.line).collect::<Vec<_>>(), vec![1, 3, 4, 5]);
    }

    #[test]
    fn bundled_exemplars_parse() {
        let ex = bundled_exemplars();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[0].1.premises.len(), 6);
        assert_eq!(ex[1].1.premises.len(), 5);
    }

    #[test]
    fn record_round_trip() {
        let (story, _) = bundled_exemplars().remove(1);
        let line = serde_json::to_string(&CorpusRecord::from_story(&story)).unwrap();
        assert_eq!(parse_corpus(&line).stories, vec![story]);
    }
}
