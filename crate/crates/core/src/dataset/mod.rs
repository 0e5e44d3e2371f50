//! Label-filtered SFT instances and chosen/rejected preference pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::oracle::{ErrorReason, LabelOptions};
use crate::prover::Budget;
use crate::story::{build_prompt, evaluate_block, CandidateRecord, FolStory, Label, NlStory, PromptError};
use crate::syntax::{render, Dialect};

/// Labels every candidate in place, in parallel.
pub fn label_all(candidates: &mut [CandidateRecord], opts: &LabelOptions) {
    candidates.par_iter_mut().for_each(|c| c.label = Some(c.compute_label(opts)));
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Every chosen sample against every rejected sample.
    All,
    /// Random pairing without replacement, up to the smaller pool.
    #[default]
    Sampled,
}

impl std::str::FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Pairing::All),
            "sampled" => Ok(Pairing::Sampled),
            other => Err(format!("unknown pairing `{other}` (expected all or sampled)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Targets {
    pub sft: Option<usize>,
    pub pref: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub seed: u64,
    pub pairing: Pairing,
    pub targets: Targets,
    /// Exemplars included in stored prompts; zero keeps the bare instruction
    /// and query.
    pub prompt_shots: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { seed: 0, pairing: Pairing::Sampled, targets: Targets::default(), prompt_shots: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftInstance {
    pub story_id: String,
    pub prompt: String,
    pub completion: String,
    pub label_of_completion: Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefPair {
    pub story_id: String,
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub chosen_label: Label,
    pub rejected_label: Label,
}

/// Counts per gold label of the story.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    #[serde(rename = "True")]
    pub true_: usize,
    #[serde(rename = "False")]
    pub false_: usize,
    #[serde(rename = "Uncertain")]
    pub uncertain: usize,
    pub total: usize,
}

impl LabelCounts {
    pub fn add(&mut self, l: Label) {
        match l {
            Label::True => self.true_ += 1,
            Label::False => self.false_ += 1,
            Label::Uncertain => self.uncertain += 1,
            Label::Error => {}
        }
        self.total += 1;
    }

    pub fn get(&self, l: Label) -> usize {
        match l {
            Label::True => self.true_,
            Label::False => self.false_,
            Label::Uncertain => self.uncertain,
            Label::Error => 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub corpus: LabelCounts,
    pub sft: LabelCounts,
    pub pref: LabelCounts,
    pub candidates: usize,
    pub unlabeled_candidates: usize,
    pub unknown_story_candidates: usize,
    pub stories_without_match: usize,
}

impl DatasetStats {
    /// Plain-text table of counts per gold label.
    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>8} {:>8} {:>8}\n", "Label", "Corpus", "SFT", "Pref");
        for (name, l) in [("True", Label::True), ("False", Label::False), ("Uncertain", Label::Uncertain)] {
            out.push_str(&format!("{name:<10} {:>8} {:>8} {:>8}\n", self.corpus.get(l), self.sft.get(l), self.pref.get(l)));
        }
        out.push_str(&format!("{:<10} {:>8} {:>8} {:>8}\n", "Total", self.corpus.total, self.sft.total, self.pref.total));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub sft: Vec<SftInstance>,
    pub pref: Vec<PrefPair>,
    pub stats: DatasetStats,
}

/// Text of a candidate as stored in the dataset and its dedupe key. Parsed
/// candidates are rendered as an EVALUATE block; unparseable ones keep their
/// raw completion.
fn candidate_text(c: &CandidateRecord, story: &NlStory) -> Option<(String, String)> {
    match &c.parsed {
        Ok(p) => {
            let lines: Vec<String> = p.story.formulas().map(|f| render(f, Dialect::Ascii)).collect();
            let key = lines.join("\n");
            let texts: Vec<&str> = if story.premises.len() == p.story.premises.len() {
                story.premises.iter().chain([&story.conclusion]).map(String::as_str).collect()
            } else {
                p.texts.iter().map(String::as_str).collect()
            };
            Some((key, evaluate_block(&texts, &lines)))
        }
        Err(f) if f.reason == ErrorReason::Generation => None,
        Err(_) => {
            let raw = c.raw_completion.trim();
            (!raw.is_empty()).then(|| (format!("raw:{raw}"), raw.to_string()))
        }
    }
}

/// Story-local generator so results do not depend on corpus order.
fn story_rng(seed: u64, story_id: &str, salt: &str) -> ChaCha8Rng {
    let digest = Sha256::new().chain_update(seed.to_le_bytes()).chain_update(story_id).chain_update(salt).finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

/// Splits labeled candidates into SFT instances and preference pairs.
/// Candidates without a label or without a matching corpus story are counted
/// and ignored.
pub fn build(
    corpus: &[NlStory],
    candidates: &[CandidateRecord],
    exemplars: &[(NlStory, FolStory)],
    cfg: &BuildConfig,
) -> Result<Dataset, PromptError> {
    let mut stats = DatasetStats { candidates: candidates.len(), ..Default::default() };
    let stories: BTreeMap<&str, &NlStory> = corpus.iter().map(|s| (s.id.as_str(), s)).collect();
    for s in corpus {
        stats.corpus.add(s.gold_label);
    }

    let mut by_story: BTreeMap<&str, Vec<&CandidateRecord>> = BTreeMap::new();
    for c in candidates {
        if !stories.contains_key(c.story_id.as_str()) {
            stats.unknown_story_candidates += 1;
        } else if c.label.is_none() {
            stats.unlabeled_candidates += 1;
        } else {
            by_story.entry(&c.story_id).or_default().push(c);
        }
    }

    let mut sft = Vec::new();
    let mut pref = Vec::new();
    for (id, story) in &stories {
        let mut pool = by_story.remove(id).unwrap_or_default();
        pool.sort_by(|a, b| {
            (&a.meta.model_name, a.meta.shots, a.meta.sample_index, &a.raw_completion)
                .cmp(&(&b.meta.model_name, b.meta.shots, b.meta.sample_index, &b.raw_completion))
                .then(a.meta.temperature.total_cmp(&b.meta.temperature))
        });
        let gold = story.gold_label;
        let mut chosen: Vec<(String, String)> = Vec::new();
        let mut rejected: Vec<(String, String, Label)> = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &pool {
            let label = c.label.as_ref().expect("filtered above").label;
            if label != gold {
                continue;
            }
            if let Some((key, text)) = candidate_text(c, story) {
                if seen.insert(key.clone()) {
                    chosen.push((key, text));
                }
            }
        }
        for c in &pool {
            let label = c.label.as_ref().expect("filtered above").label;
            if label == gold {
                continue;
            }
            if let Some((key, text)) = candidate_text(c, story) {
                if seen.insert(key.clone()) {
                    rejected.push((key, text, label));
                }
            }
        }
        if chosen.is_empty() {
            log::info!("story {id}: no candidate matches the gold label {gold}");
            stats.stories_without_match += 1;
            continue;
        }
        let prompt = build_prompt(story, exemplars, cfg.prompt_shots)?;
        for (_, text) in &chosen {
            sft.push(SftInstance {
                story_id: id.to_string(),
                prompt: prompt.clone(),
                completion: text.clone(),
                label_of_completion: gold,
            });
        }
        let pairs: Vec<(usize, usize)> = match cfg.pairing {
            Pairing::All => (0..chosen.len()).flat_map(|i| (0..rejected.len()).map(move |j| (i, j))).collect(),
            Pairing::Sampled => {
                let mut rng = story_rng(cfg.seed, id, "pairing");
                let mut ci: Vec<usize> = (0..chosen.len()).collect();
                let mut ri: Vec<usize> = (0..rejected.len()).collect();
                ci.shuffle(&mut rng);
                ri.shuffle(&mut rng);
                ci.into_iter().zip(ri).collect()
            }
        };
        for (i, j) in pairs {
            pref.push(PrefPair {
                story_id: id.to_string(),
                prompt: prompt.clone(),
                chosen: chosen[i].1.clone(),
                rejected: rejected[j].1.clone(),
                chosen_label: gold,
                rejected_label: rejected[j].2,
            });
        }
    }

    let gold_of = |id: &str| stories[id].gold_label;
    if let Some(t) = cfg.targets.sft {
        sft = stratified(sft, t, cfg.seed, "sft", |s| gold_of(&s.story_id));
    }
    if let Some(t) = cfg.targets.pref {
        pref = stratified(pref, t, cfg.seed, "pref", |p| gold_of(&p.story_id));
    }
    sft.sort_by_cached_key(|s| (s.story_id.clone(), content_hash(&[&s.completion])));
    pref.sort_by_cached_key(|p| (p.story_id.clone(), content_hash(&[&p.chosen, &p.rejected])));
    for s in &sft {
        stats.sft.add(gold_of(&s.story_id));
    }
    for p in &pref {
        stats.pref.add(gold_of(&p.story_id));
    }
    Ok(Dataset { sft, pref, stats })
}

/// Subsamples to `target` items keeping each gold label's share (largest
/// remainder rounding). Returns the input when it is already small enough.
fn stratified<T>(items: Vec<T>, target: usize, seed: u64, salt: &str, gold: impl Fn(&T) -> Label) -> Vec<T> {
    if items.len() <= target {
        return items;
    }
    let total = items.len();
    let mut groups: BTreeMap<Label, Vec<T>> = BTreeMap::new();
    for it in items {
        groups.entry(gold(&it)).or_default().push(it);
    }
    let mut quotas: Vec<(Label, usize, f64)> = groups
        .iter()
        .map(|(l, g)| {
            let exact = target as f64 * g.len() as f64 / total as f64;
            (*l, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut left = target - quotas.iter().map(|q| q.1).sum::<usize>();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.total_cmp(&quotas[a].2).then(a.cmp(&b)));
    for i in order {
        if left == 0 {
            break;
        }
        quotas[i].1 += 1;
        left -= 1;
    }
    let mut out = Vec::with_capacity(target);
    for (label, quota, _) in quotas {
        let mut g = groups.remove(&label).unwrap_or_default();
        let mut rng = story_rng(seed, label.as_str(), salt);
        g.shuffle(&mut rng);
        g.truncate(quota);
        out.extend(g);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub seed: u64,
    pub pairing: Pairing,
    pub targets: Targets,
    pub prompt_shots: usize,
    pub budget: Budget,
    pub stats: DatasetStats,
}

#[derive(Serialize)]
struct SftLine<'a> {
    prompt: &'a str,
    completion: &'a str,
}

#[derive(Serialize)]
struct PrefLine<'a> {
    prompt: &'a str,
    chosen: &'a str,
    rejected: &'a str,
}

/// Writes `sft.jsonl`, `pref.jsonl`, `stats.json` and `build_manifest.json`.
/// Each file is written to a temporary name and renamed into place.
pub fn emit(dataset: &Dataset, out_dir: &Path, manifest: &BuildManifest) -> io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut sft = String::new();
    for s in &dataset.sft {
        sft.push_str(&serde_json::to_string(&SftLine { prompt: &s.prompt, completion: &s.completion })?);
        sft.push('\n');
    }
    let mut pref = String::new();
    for p in &dataset.pref {
        pref.push_str(&serde_json::to_string(&PrefLine { prompt: &p.prompt, chosen: &p.chosen, rejected: &p.rejected })?);
        pref.push('\n');
    }
    write_atomic(&out_dir.join("sft.jsonl"), sft.as_bytes())?;
    write_atomic(&out_dir.join("pref.jsonl"), pref.as_bytes())?;
    write_atomic(&out_dir.join("stats.json"), (serde_json::to_string_pretty(&dataset.stats)? + "\n").as_bytes())?;
    write_atomic(&out_dir.join("build_manifest.json"), (serde_json::to_string_pretty(manifest)? + "\n").as_bytes())?;
    Ok(())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::story::GenerationMeta;

    fn story(id: &str, gold: Label) -> NlStory {
        NlStory { id: id.into(), premises: vec!["p".into()], conclusion: "c".into(), gold_label: gold, gold_fol: None }
    }

    fn cand(id: &str, i: usize, fols: &[&str]) -> CandidateRecord {
        let meta = GenerationMeta { model_name: "m".into(), shots: 2, temperature: 0.6, sample_index: i, timestamp: None };
        CandidateRecord::new(id, meta, evaluate_block(&[], fols), Some(1))
    }

    fn labeled(mut cs: Vec<CandidateRecord>) -> Vec<CandidateRecord> {
        label_all(&mut cs, &LabelOptions::default());
        cs
    }

    #[test]
    fn minimal_pools() {
        let cs = labeled(vec![cand("s", 0, &["P(a)", "P(a)"]), cand("s", 1, &["P(a)", "-P(a)"])]);
        let d = build(&[story("s", Label::True)], &cs, &[], &BuildConfig::default()).unwrap();
        assert_eq!((d.sft.len(), d.pref.len()), (1, 1));
        assert_eq!(d.pref[0].rejected_label, Label::False);

        let cs = labeled(vec![
            cand("s", 0, &["P(a)", "P(a)"]),
            cand("s", 1, &["P(a) & Q(a)", "P(a)"]),
            cand("s", 2, &["P(a)", "-P(a)"]),
        ]);
        let d = build(&[story("s", Label::True)], &cs, &[], &BuildConfig::default()).unwrap();
        assert_eq!((d.sft.len(), d.pref.len()), (2, 1));
        let all = BuildConfig { pairing: Pairing::All, ..Default::default() };
        assert_eq!(build(&[story("s", Label::True)], &cs, &[], &all).unwrap().pref.len(), 2);
    }

    #[test]
    fn duplicates_and_unmatched_stories() {
        let cs = labeled(vec![cand("s", 0, &["P(a)", "P(a)"]), cand("s", 1, &["P(a)", "P(a)"]), cand("t", 0, &["P(a)", "Q(a)"])]);
        let d = build(&[story("s", Label::True), story("t", Label::False)], &cs, &[], &BuildConfig::default()).unwrap();
        assert_eq!(d.sft.len(), 1);
        assert_eq!(d.stats.stories_without_match, 1);
        assert_eq!(d.stats.corpus.total, 2);
    }

    #[test]
    fn stratified_keeps_proportions() {
        let items: Vec<Label> = [vec![Label::True; 6], vec![Label::False; 3], vec![Label::Uncertain; 1]].concat();
        let out = stratified(items, 5, 1, "x", |l| *l);
        let count = |l| out.iter().filter(|x| **x == l).count();
        assert_eq!((count(Label::True), count(Label::False), count(Label::Uncertain)), (3, 2, 0));
    }
}
