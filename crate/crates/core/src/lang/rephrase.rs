//! Rephrase/summary client interface, guards, stub and HTTP transport.
//!
//! Wire contract: a single POST endpoint taking
//! `{"kind": ..., "prompt": ..., "text": ...}` and returning `{"text": ...}`.
//! Client failures never abort a corpus run: the original text is kept and
//! the record is flagged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompts::instruction_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RephraseKind {
    ReferralSimple,
    ReferralSubjectLocked,
    ReferralEnriched,
    SceneSummary,
    CaptionSummary,
}

impl RephraseKind {
    pub fn wire_name(&self) -> &'static str {
        match self {
            RephraseKind::ReferralSimple => "referral-simple",
            RephraseKind::ReferralSubjectLocked => "referral-subject-locked",
            RephraseKind::ReferralEnriched => "referral-enriched",
            RephraseKind::SceneSummary => "scene-summary",
            RephraseKind::CaptionSummary => "caption-summary",
        }
    }

    pub fn is_referral(&self) -> bool {
        matches!(
            self,
            RephraseKind::ReferralSimple
                | RephraseKind::ReferralSubjectLocked
                | RephraseKind::ReferralEnriched
        )
    }
}

/// One client request; `kind` determines which payload fields are meaningful.
#[derive(Debug, Clone)]
pub struct RephraseRequest {
    pub kind: RephraseKind,
    /// Full instantiated prompt (instruction plus payload lines).
    pub prompt: String,
    pub text: String,
    pub target_label: Option<String>,
    pub anchor_labels: Vec<String>,
}

impl RephraseRequest {
    pub fn referral(
        kind: RephraseKind,
        text: impl Into<String>,
        target_label: impl Into<String>,
        anchor_labels: Vec<String>,
    ) -> Self {
        let text = text.into();
        let target_label = target_label.into();
        let mut prompt = format!("{}\ncaption: {}", instruction_for(kind), text);
        if kind != RephraseKind::ReferralSimple {
            prompt.push_str(&format!("\ntarget-object: {target_label}"));
        }
        if kind == RephraseKind::ReferralSubjectLocked && !anchor_labels.is_empty() {
            prompt.push_str(&format!("\nanchor-object(s): {}", anchor_labels.join(", ")));
        }
        RephraseRequest {
            kind,
            prompt,
            text,
            target_label: Some(target_label),
            anchor_labels,
        }
    }

    pub fn scene_summary(payload_json: impl Into<String>) -> Self {
        let payload = payload_json.into();
        RephraseRequest {
            kind: RephraseKind::SceneSummary,
            prompt: format!("{}\nscene graph: {}", instruction_for(RephraseKind::SceneSummary), payload),
            text: payload,
            target_label: None,
            anchor_labels: Vec::new(),
        }
    }

    pub fn caption_summary(texts: &[String], target_label: impl Into<String>) -> Self {
        let target_label = target_label.into();
        let joined = texts.join("\n");
        RephraseRequest {
            kind: RephraseKind::CaptionSummary,
            prompt: format!(
                "{}\ncaption: {}\ntarget-object: {}",
                instruction_for(RephraseKind::CaptionSummary),
                joined,
                target_label
            ),
            text: joined,
            target_label: Some(target_label),
            anchor_labels: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// A text-rewriting endpoint (LLM service or deterministic stub).
pub trait RephraseClient: Send + Sync {
    fn rephrase(&self, req: &RephraseRequest) -> Result<String, ClientError>;
}

/// Deterministic built-in client: identity for referrals, canned derivations
/// for the summary kinds.
#[derive(Debug, Clone, Default)]
pub struct StubRephraser;

impl RephraseClient for StubRephraser {
    fn rephrase(&self, req: &RephraseRequest) -> Result<String, ClientError> {
        match req.kind {
            RephraseKind::SceneSummary => Ok(deterministic_scene_summary(&req.text)),
            RephraseKind::CaptionSummary => Ok(req.text.split('\n').collect::<Vec<_>>().join(" ")),
            _ => Ok(req.text.clone()),
        }
    }
}

/// One-sentence scene summary derived from the prompt payload, used by the
/// stub client and as the fallback when a live client fails.
pub fn deterministic_scene_summary(payload_json: &str) -> String {
    #[derive(Deserialize)]
    struct Payload {
        scene_type: String,
        object_count: std::collections::BTreeMap<String, usize>,
    }
    let Ok(payload) = serde_json::from_str::<Payload>(payload_json) else {
        return "A room with several objects.".to_string();
    };
    let total: usize = payload.object_count.values().sum();
    let mut labels: Vec<(&String, &usize)> = payload.object_count.iter().collect();
    labels.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    let named: Vec<&str> = labels.iter().take(3).map(|(l, _)| l.as_str()).collect();
    match named.len() {
        0 => format!("An empty {}.", payload.scene_type),
        1 => format!("A {} with {} objects, mainly {}.", payload.scene_type, total, named[0]),
        n => format!(
            "A {} with {} objects, including {} and {}.",
            payload.scene_type,
            total,
            named[..n - 1].join(", "),
            named[n - 1]
        ),
    }
}

/// HTTP transport for the wire contract.
pub struct HttpRephraser {
    url: String,
    agent: ureq::Agent,
}

impl HttpRephraser {
    pub fn new(url: impl Into<String>) -> Self {
        HttpRephraser { url: url.into(), agent: ureq::Agent::new_with_defaults() }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    kind: &'a str,
    prompt: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

impl RephraseClient for HttpRephraser {
    fn rephrase(&self, req: &RephraseRequest) -> Result<String, ClientError> {
        let body = WireRequest {
            kind: req.kind.wire_name(),
            prompt: &req.prompt,
            text: &req.text,
        };
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(&body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let parsed: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Malformed(e.to_string()))?;
        Ok(parsed.text)
    }
}

/// Result of [`rephrase`]: the text to keep plus an optional status flag.
#[derive(Debug, Clone, PartialEq)]
pub struct RephraseOutcome {
    pub text: String,
    pub flag: Option<&'static str>,
}

/// Split off the first sentence; returns (sentence, had_more).
fn first_sentence(text: &str) -> (String, bool) {
    for (idx, ch) in text.char_indices() {
        if matches!(ch, '.' | '!' | '?') {
            let first = text[..=idx].to_string();
            let rest = &text[idx + ch.len_utf8()..];
            return (first, !rest.trim().is_empty());
        }
    }
    (text.to_string(), false)
}

/// Run one request through a client with the output guards applied:
/// referral outputs are trimmed to one sentence and must still mention the
/// target label, otherwise the original text is kept and flagged. Client
/// errors keep the original text with a `rephrase-failed` flag; a corpus run
/// never aborts on rephrasing.
pub fn rephrase(req: &RephraseRequest, client: &dyn RephraseClient) -> RephraseOutcome {
    let response = match client.rephrase(req) {
        Ok(text) => text,
        Err(_) => {
            return RephraseOutcome { text: req.text.clone(), flag: Some("rephrase-failed") };
        }
    };
    let response = response.trim();
    if response.is_empty() {
        return RephraseOutcome { text: req.text.clone(), flag: Some("rephrase-failed") };
    }
    if !req.kind.is_referral() {
        return RephraseOutcome { text: response.to_string(), flag: None };
    }
    let (sentence, had_more) = first_sentence(response);
    if let Some(label) = &req.target_label {
        if !sentence.to_lowercase().contains(&label.to_lowercase()) {
            return RephraseOutcome { text: req.text.clone(), flag: Some("rephrase-rejected") };
        }
    }
    RephraseOutcome {
        text: sentence,
        flag: had_more.then_some("rephrase-trimmed"),
    }
}
