//! Captioner, scorer and summarizer client interfaces with deterministic
//! stubs and HTTP transports.
//!
//! Wire contract: one POST endpoint per role taking
//! `{"task", "image_crop_ref"|"texts", ...}` and returning `{"text"}` or
//! `{"score"}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::project::PixelRect;
use crate::lang::{rephrase, ClientError, RephraseRequest, StubRephraser};
use crate::seed::derive_seed;

#[derive(Debug, Clone)]
pub struct CaptionRequest<'a> {
    pub image_ref: &'a str,
    pub crop: PixelRect,
    pub object_label: &'a str,
    pub view_id: usize,
}

#[derive(Debug, Clone)]
pub struct ScoreRequest<'a> {
    pub text: &'a str,
    pub image_ref: &'a str,
    pub crop: PixelRect,
    pub view_id: usize,
}

pub trait CaptionClient: Send + Sync {
    fn caption(&self, req: &CaptionRequest) -> Result<String, ClientError>;
}

pub trait ScoreClient: Send + Sync {
    fn score(&self, req: &ScoreRequest) -> Result<f64, ClientError>;
}

pub trait SummaryClient: Send + Sync {
    fn summarize(&self, texts: &[String], target_label: &str) -> Result<String, ClientError>;
}

/// Canned captioner: per-view overrides, else "a {label}".
#[derive(Debug, Clone, Default)]
pub struct StubCaptioner {
    pub canned: BTreeMap<usize, String>,
}

impl CaptionClient for StubCaptioner {
    fn caption(&self, req: &CaptionRequest) -> Result<String, ClientError> {
        if let Some(text) = self.canned.get(&req.view_id) {
            return Ok(text.clone());
        }
        Ok(format!("a {}", req.object_label))
    }
}

/// Deterministic scorer: per-view overrides, else a hash-derived pseudo
/// similarity in [0.5, 1.0).
#[derive(Debug, Clone, Default)]
pub struct StubScorer {
    pub canned: BTreeMap<usize, f64>,
}

impl ScoreClient for StubScorer {
    fn score(&self, req: &ScoreRequest) -> Result<f64, ClientError> {
        if let Some(&score) = self.canned.get(&req.view_id) {
            return Ok(score);
        }
        let h = derive_seed(req.view_id as u64, &["stub-score", req.text, req.image_ref]);
        Ok(0.5 + (h % 10_000) as f64 / 20_000.0)
    }
}

/// Summarizer backed by the deterministic rephrase stub (joins candidates).
#[derive(Debug, Clone, Default)]
pub struct StubSummarizer;

impl SummaryClient for StubSummarizer {
    fn summarize(&self, texts: &[String], target_label: &str) -> Result<String, ClientError> {
        let req = RephraseRequest::caption_summary(texts, target_label);
        Ok(rephrase(&req, &StubRephraser).text)
    }
}

#[derive(Serialize)]
struct CaptionWire<'a> {
    task: &'a str,
    image_crop_ref: String,
    object_label: &'a str,
    view_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    texts: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_label: Option<&'a str>,
}

#[derive(Deserialize)]
struct TextResponse {
    text: String,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

fn crop_ref(image_ref: &str, crop: PixelRect) -> String {
    format!("{image_ref}#{},{},{},{}", crop.x0, crop.y0, crop.x1, crop.y1)
}

/// HTTP captioner/scorer/summarizer speaking the wire contract above.
pub struct HttpVisionClient {
    url: String,
    agent: ureq::Agent,
}

impl HttpVisionClient {
    pub fn new(url: impl Into<String>) -> Self {
        HttpVisionClient { url: url.into(), agent: ureq::Agent::new_with_defaults() }
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, body: &impl Serialize) -> Result<T, ClientError> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        response
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Malformed(e.to_string()))
    }
}

impl CaptionClient for HttpVisionClient {
    fn caption(&self, req: &CaptionRequest) -> Result<String, ClientError> {
        let body = CaptionWire {
            task: "caption",
            image_crop_ref: crop_ref(req.image_ref, req.crop),
            object_label: req.object_label,
            view_id: req.view_id,
            text: None,
            texts: None,
            target_label: None,
        };
        self.post::<TextResponse>(&body).map(|r| r.text)
    }
}

impl ScoreClient for HttpVisionClient {
    fn score(&self, req: &ScoreRequest) -> Result<f64, ClientError> {
        let body = CaptionWire {
            task: "score",
            image_crop_ref: crop_ref(req.image_ref, req.crop),
            object_label: "",
            view_id: req.view_id,
            text: Some(req.text),
            texts: None,
            target_label: None,
        };
        self.post::<ScoreResponse>(&body).map(|r| r.score)
    }
}

impl SummaryClient for HttpVisionClient {
    fn summarize(&self, texts: &[String], target_label: &str) -> Result<String, ClientError> {
        let body = CaptionWire {
            task: "summarize",
            image_crop_ref: String::new(),
            object_label: "",
            view_id: 0,
            text: None,
            texts: Some(texts),
            target_label: Some(target_label),
        };
        self.post::<TextResponse>(&body).map(|r| r.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> PixelRect {
        PixelRect { x0: 0, y0: 0, x1: 10, y1: 10 }
    }

    #[test]
    fn stub_captioner_uses_label_and_overrides() {
        let mut stub = StubCaptioner::default();
        stub.canned.insert(2, "a red cup".into());
        let base = CaptionRequest { image_ref: "img", crop: rect(), object_label: "cup", view_id: 0 };
        assert_eq!(stub.caption(&base).unwrap(), "a cup");
        let view2 = CaptionRequest { view_id: 2, ..base };
        assert_eq!(stub.caption(&view2).unwrap(), "a red cup");
    }

    #[test]
    fn stub_scorer_is_deterministic_and_in_range() {
        let stub = StubScorer::default();
        let req = ScoreRequest { text: "a cup", image_ref: "img", crop: rect(), view_id: 3 };
        let a = stub.score(&req).unwrap();
        let b = stub.score(&req).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn stub_summarizer_joins_texts() {
        let out = StubSummarizer
            .summarize(&["a red cup".into(), "a small cup".into()], "cup")
            .unwrap();
        assert!(out.contains("a red cup") && out.contains("a small cup"));
    }
}
