use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: usize,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, backoff_base_ms: 250 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based): base, 2·base, 4·base, ...
    pub fn delay_ms(&self, attempt: usize) -> u64 {
        self.backoff_base_ms.saturating_mul(1u64 << (attempt.saturating_sub(1)).min(16))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    /// Environment variable holding the API key. The key itself is never
    /// stored in configuration.
    pub api_key_env: Option<String>,
    pub models: Vec<String>,
    pub temperatures: Vec<f64>,
    pub shots: Vec<usize>,
    /// Total samples per story, spread over the model × temperature × shots
    /// grid. Ignored when `samples_per_combination` is set.
    pub samples_per_story: usize,
    pub samples_per_combination: Option<usize>,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub request_timeout_secs: u64,
    pub max_tokens: Option<u32>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            models: Vec::new(),
            temperatures: vec![0.25, 0.6],
            shots: vec![2, 4, 8],
            samples_per_story: 30,
            samples_per_combination: None,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            request_timeout_secs: 120,
            max_tokens: None,
        }
    }
}

/// One cell of the sampling grid and how many samples it gets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanCell {
    pub model: String,
    pub temperature: f64,
    pub shots: usize,
    pub samples: usize,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.models.is_empty() {
            return Err("at least one model is required".into());
        }
        if self.temperatures.is_empty() || self.shots.is_empty() {
            return Err("temperatures and shot counts must be non-empty".into());
        }
        if let Some(t) = self.temperatures.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(format!("temperature {t} must be a finite value ≥ 0"));
        }
        if self.shots.contains(&0) {
            return Err("shot counts must be ≥ 1".into());
        }
        if self.samples_per_combination == Some(0) || self.samples_per_story == 0 {
            return Err("sample counts must be ≥ 1".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be ≥ 1".into());
        }
        if self.retry.max_attempts == 0 {
            return Err("retry.max_attempts must be ≥ 1".into());
        }
        Ok(())
    }

    /// Sampling grid in model, temperature, shots order. The per-story total
    /// is split evenly; leftover samples go one each to the first cells.
    pub fn plan(&self) -> Vec<PlanCell> {
        let mut cells = Vec::new();
        for m in &self.models {
            for &t in &self.temperatures {
                for &s in &self.shots {
                    cells.push(PlanCell { model: m.clone(), temperature: t, shots: s, samples: 0 });
                }
            }
        }
        let n = cells.len();
        for (i, c) in cells.iter_mut().enumerate() {
            c.samples = match self.samples_per_combination {
                Some(k) => k,
                None => self.samples_per_story / n + usize::from(i < self.samples_per_story % n),
            };
        }
        cells
    }
}
