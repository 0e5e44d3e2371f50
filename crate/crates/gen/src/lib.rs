//! Candidate FOL translations sampled from chat-completion endpoints.

mod cache;
mod plan;

use std::env;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use logicpo_core::story::{build_prompt, parse_candidates, CandidateRecord, FolStory, GenerationMeta, LineDiagnostic, NlStory, PromptError};

pub use cache::{cache_key, Cache, CacheEntry};
pub use plan::{GenConfig, PlanCell, RetryPolicy};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("story `{story}`: {source}")]
    Prompt { story: String, source: PromptError },
    #[error("http client: {0}")]
    Client(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenStats {
    /// HTTP requests sent, retries included.
    pub requests: usize,
    pub cache_hits: usize,
    pub failures: usize,
}

#[derive(Debug, Default)]
pub struct GenerateOutput {
    pub records: Vec<CandidateRecord>,
    pub stats: GenStats,
}

struct Job {
    story_id: String,
    expected: usize,
    meta: GenerationMeta,
    prompt: String,
    key: String,
}

/// One record per (story, model, temperature, shots, sample index), in that
/// order. Cached completions are never requested again; requests that keep
/// failing produce `Generation` failure records.
pub fn generate(
    stories: &[NlStory],
    exemplars: &[(NlStory, FolStory)],
    config: &GenConfig,
    cache: Option<&Cache>,
) -> Result<GenerateOutput, GenError> {
    config.validate().map_err(GenError::Config)?;
    let plan = config.plan();
    let mut jobs = Vec::new();
    for story in stories {
        for cell in &plan {
            let prompt = build_prompt(story, exemplars, cell.shots)
                .map_err(|source| GenError::Prompt { story: story.id.clone(), source })?;
            for sample_index in 0..cell.samples {
                jobs.push(Job {
                    story_id: story.id.clone(),
                    expected: story.premises.len(),
                    meta: GenerationMeta {
                        model_name: cell.model.clone(),
                        shots: cell.shots,
                        temperature: cell.temperature,
                        sample_index,
                        timestamp: None,
                    },
                    key: cache_key(&prompt, &cell.model, cell.temperature, sample_index),
                    prompt: prompt.clone(),
                });
            }
        }
    }

    let mut stats = GenStats::default();
    let mut results: Vec<Option<Result<String, String>>> = jobs
        .iter()
        .map(|j| cache.and_then(|c| c.get(&j.key)).map(|e| Ok(e.completion)))
        .collect();
    stats.cache_hits = results.iter().filter(|r| r.is_some()).count();
    let pending: Vec<usize> = (0..jobs.len()).filter(|&i| results[i].is_none()).collect();

    if !pending.is_empty() {
        let client = Client::new(config)?;
        let next = AtomicUsize::new(0);
        let sent = AtomicUsize::new(0);
        let workers = config.max_in_flight.min(pending.len());
        thread::scope(|s| {
            let (tx, rx) = mpsc::channel();
            for _ in 0..workers {
                let tx = tx.clone();
                let (client, next, sent, pending, jobs) = (&client, &next, &sent, &pending, &jobs);
                s.spawn(move || loop {
                    let n = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&i) = pending.get(n) else { break };
                    let job = &jobs[i];
                    let r = client.complete_with_retry(&job.prompt, &job.meta, sent);
                    if tx.send((i, r)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // Single writer: only this loop touches the cache.
            for (i, r) in rx {
                if let (Ok(text), Some(c)) = (&r, cache) {
                    let job = &jobs[i];
                    let entry = CacheEntry {
                        model: job.meta.model_name.clone(),
                        temperature: job.meta.temperature,
                        sample_index: job.meta.sample_index,
                        completion: text.clone(),
                    };
                    if let Err(e) = c.put(&job.key, &entry) {
                        log::warn!("cache write failed for {}: {e}", job.key);
                    }
                }
                results[i] = Some(r);
            }
        });
        stats.requests = sent.load(Ordering::SeqCst);
    }

    let records = jobs
        .into_iter()
        .zip(results)
        .map(|(job, r)| match r.expect("every job resolved") {
            Ok(text) => CandidateRecord::new(job.story_id, job.meta, text, Some(job.expected)),
            Err(msg) => {
                stats.failures += 1;
                CandidateRecord::generation_failure(job.story_id, job.meta, format!("NetworkError: {msg}"))
            }
        })
        .collect();
    Ok(GenerateOutput { records, stats })
}

/// Loads previously generated candidates (interchange lines) with no label.
pub fn ingest_offline(path: impl AsRef<Path>) -> io::Result<(Vec<CandidateRecord>, Vec<LineDiagnostic>)> {
    Ok(parse_candidates(&fs::read_to_string(path)?))
}

struct Client {
    http: reqwest::blocking::Client,
    endpoint: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    max_tokens: Option<u32>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

impl Client {
    fn new(config: &GenConfig) -> Result<Self, GenError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout_secs))
            .build()
            .map_err(|e| GenError::Client(e.to_string()))?;
        let api_key = config.api_key_env.as_ref().and_then(|v| env::var(v).ok()).filter(|k| !k.is_empty());
        Ok(Self {
            http,
            endpoint: config.endpoint.clone(),
            api_key,
            retry: config.retry,
            max_tokens: config.max_tokens,
        })
    }

    fn complete_with_retry(&self, prompt: &str, meta: &GenerationMeta, sent: &AtomicUsize) -> Result<String, String> {
        let mut last = String::new();
        for attempt in 1..=self.retry.max_attempts {
            if attempt > 1 {
                thread::sleep(Duration::from_millis(self.retry.delay_ms(attempt - 1)));
            }
            sent.fetch_add(1, Ordering::SeqCst);
            match self.complete(prompt, meta) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::debug!("attempt {attempt} for {} failed: {e}", meta.model_name);
                    last = e;
                }
            }
        }
        Err(format!("{} attempts failed; last error: {last}", self.retry.max_attempts))
    }

    fn complete(&self, prompt: &str, meta: &GenerationMeta) -> Result<String, String> {
        let mut body = serde_json::json!({
            "model": meta.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": meta.temperature,
            "n": 1,
        });
        if let Some(m) = self.max_tokens {
            body["max_tokens"] = m.into();
        }
        let mut req = self.http.post(&self.endpoint).json(&body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        let text = resp.text().map_err(|e| e.to_string())?;
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let parsed: ChatResponse = serde_json::from_str(&text).map_err(|e| format!("malformed response body: {e}"))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| "response has no choices".to_string())
    }
}
