use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use logicpo_core::story::{parse_completion, CandidateLine, CandidateRecord, CorpusRecord, FolStory};

/// Reads a FOL story from one of three layouts: one formula per line with
/// the conclusion last (`#` starts a comment line), a JSON corpus record with
/// `premises_fol` and `conclusion_fol`, or an `<EVALUATE>` block.
pub fn load_story(path: &Path) -> Result<FolStory> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_story_text(&text).with_context(|| format!("story file {}", path.display()))
}

pub fn parse_story_text(text: &str) -> Result<FolStory> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let rec: CorpusRecord = serde_json::from_str(trimmed.lines().next().unwrap_or_default())
            .or_else(|_| serde_json::from_str(trimmed))
            .context("invalid JSON story record")?;
        let (Some(p), Some(c)) = (rec.premises_fol, rec.conclusion_fol) else {
            bail!("JSON story record lacks premises_fol/conclusion_fol");
        };
        return Ok(FolStory::parse(&p, &c)?);
    }
    if text.contains("<EVALUATE>") {
        return parse_completion(text, None).map(|p| p.story).map_err(|f| anyhow!("{f}"));
    }
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let Some((conclusion, premises)) = lines.split_last() else {
        bail!("story file has no formulas");
    };
    Ok(FolStory::parse(premises, conclusion)?)
}

/// Candidate file lines are either labeled records (as written by `ingest`)
/// or plain interchange lines.
pub fn load_candidates(path: &Path) -> Result<Vec<CandidateRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rec) = serde_json::from_str::<CandidateRecord>(line) {
            out.push(rec);
            continue;
        }
        match serde_json::from_str::<CandidateLine>(line) {
            Ok(c) => out.push(c.into_record(None)),
            Err(e) => log::warn!("{}:{}: skipped: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}
