use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};

use logicpo_core::lint::{lint_source, Diagnostic, LintOptions};
use logicpo_core::oracle::{classify_text, ErrorReason, LabelOptions};
use logicpo_core::prover::RefutationOutcome;
use logicpo_core::story::Label;

#[derive(Debug, Deserialize)]
pub struct ClassifyRequest {
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Debug, Serialize)]
pub struct ProofStats {
    pub status: String,
    pub kept_clauses: usize,
    pub iterations: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct ClassifyResponse {
    pub label: Label,
    pub error_reason: Option<ErrorReason>,
    pub budget_limited: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub entailment: Option<ProofStats>,
    pub contradiction: Option<ProofStats>,
}

fn stats(o: &Option<RefutationOutcome>) -> Option<ProofStats> {
    o.as_ref().map(|o| ProofStats {
        status: format!("{:?}", o.status),
        kept_clauses: o.kept_clause_count,
        iterations: o.iterations,
        elapsed_seconds: o.elapsed_seconds,
    })
}

pub fn answer(req: &ClassifyRequest, opts: &LabelOptions) -> ClassifyResponse {
    let r = classify_text(&req.premises, &req.conclusion, opts);
    let mut lines = req.premises.clone();
    lines.push(req.conclusion.clone());
    ClassifyResponse {
        label: r.label,
        error_reason: r.error_reason,
        budget_limited: r.budget_limited,
        diagnostics: lint_source(&lines, &LintOptions::default()),
        entailment: stats(&r.entail_outcome),
        contradiction: stats(&r.contradict_outcome),
    }
}

/// Serves `POST /classify` and `GET /health` until the process is stopped.
pub fn run(addr: &str, opts: LabelOptions, workers: usize) -> Result<()> {
    let server = tiny_http::Server::http(addr).map_err(|e| anyhow!("binding {addr}: {e}"))?;
    log::info!("listening on {addr}");
    let json = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
    std::thread::scope(|s| {
        for _ in 0..workers.max(1) {
            let (server, json) = (&server, json.clone());
            s.spawn(move || {
                while let Ok(mut req) = server.recv() {
                    let (code, body) = handle(&mut req, &opts);
                    let resp = tiny_http::Response::from_string(body).with_status_code(code).with_header(json.clone());
                    if let Err(e) = req.respond(resp) {
                        log::warn!("response failed: {e}");
                    }
                }
            });
        }
    });
    Ok(())
}

fn handle(req: &mut tiny_http::Request, opts: &LabelOptions) -> (u16, String) {
    use tiny_http::Method;
    let error = |code: u16, msg: &str| (code, serde_json::json!({ "error": msg }).to_string());
    match (req.method(), req.url()) {
        (Method::Get, "/health") => (200, "{\"status\":\"ok\"}".into()),
        (Method::Post, "/classify") => {
            let mut body = String::new();
            if req.as_reader().read_to_string(&mut body).is_err() {
                return error(400, "unreadable body");
            }
            match serde_json::from_str::<ClassifyRequest>(&body) {
                Ok(r) if r.premises.is_empty() => error(400, "at least one premise is required"),
                Ok(r) => (200, serde_json::to_string(&answer(&r, opts)).expect("serializable")),
                Err(e) => error(400, &e.to_string()),
            }
        }
        _ => error(404, "not found"),
    }
}
