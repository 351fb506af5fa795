//! Disambiguation scorers.
//!
//! The remote scorer talks to a masked-language-model service:
//!
//! ```text
//! POST /v1/score   {"template": "a {SLOT} in a field", "candidates": ["horse", ...]}
//!               -> {"scores": [-1.7, ...], "model_id": "bert-large-uncased"}
//! GET  /v1/health  -> {"status": "ok", "model_id": "..."}
//! ```
//!
//! Each score is the mean per-token log-probability of the candidate filled
//! into the slot. Templates are sent verbatim (no article agreement fix-up).

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DisambiguationRequest;
use crate::wordnet::SynsetId;

/// Placeholder marking the ambiguous phrase in a template.
pub const SLOT: &str = "{SLOT}";

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("scorer transport error: {0}")]
    Transport(String),
    #[error("scorer returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed scorer response: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    Request(String),
}

/// Scores the candidates of a disambiguation request; higher is better.
///
/// Implementations must return one finite score per candidate and be
/// deterministic for identical requests.
pub trait DisambiguationScorer: Send + Sync {
    fn score(&self, request: &DisambiguationRequest) -> Result<Vec<f64>, ScorerError>;

    fn name(&self) -> &str;
}

/// Prefers the most frequent WordNet sense.
#[derive(Debug, Clone, Copy, Default)]
pub struct FallbackScorer;

impl DisambiguationScorer for FallbackScorer {
    fn score(&self, request: &DisambiguationRequest) -> Result<Vec<f64>, ScorerError> {
        Ok(request
            .candidates
            .iter()
            .map(|c| -f64::from(c.sense_rank))
            .collect())
    }

    fn name(&self) -> &str {
        "fallback"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub synset: SynsetId,
    /// Why the fallback was used instead of the configured scorer.
    pub degraded: Option<String>,
}

/// Picks the best-scoring candidate, breaking ties by lower sense rank. A
/// failing scorer is replaced by [`FallbackScorer`] and the failure
/// reported in [`Resolution::degraded`].
pub fn resolve(request: &DisambiguationRequest, scorer: &dyn DisambiguationScorer) -> Resolution {
    let checked = scorer.score(request).and_then(|scores| {
        if scores.len() != request.candidates.len() {
            Err(ScorerError::Protocol(format!(
                "{} scores for {} candidates",
                scores.len(),
                request.candidates.len()
            )))
        } else if scores.iter().any(|s| !s.is_finite()) {
            Err(ScorerError::Protocol("non-finite score".into()))
        } else {
            Ok(scores)
        }
    });
    let (scores, degraded) = match checked {
        Ok(s) => (s, None),
        Err(e) => (
            FallbackScorer.score(request).expect("fallback never fails"),
            Some(format!("{}: {e}", scorer.name())),
        ),
    };
    let best = request
        .candidates
        .iter()
        .zip(&scores)
        .reduce(|best, next| {
            let better = next.1 > best.1 || (next.1 == best.1 && next.0.sense_rank < best.0.sense_rank);
            if better {
                next
            } else {
                best
            }
        })
        .expect("requests carry candidates");
    Resolution {
        synset: best.0.synset.clone(),
        degraded,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub template: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
    pub model_id: String,
}

/// HTTP client for the scoring service.
pub struct RemoteScorer {
    base_url: String,
    agent: ureq::Agent,
}

impl RemoteScorer {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent: config.into(),
        }
    }

    pub fn score_request(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        let mut response = self
            .agent
            .post(&format!("{}/v1/score", self.base_url))
            .send_json(request)
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        if status != 200 {
            return Err(ScorerError::Status { status, body });
        }
        serde_json::from_str(&body).map_err(|e| ScorerError::Protocol(e.to_string()))
    }

    /// Model id reported by `GET /v1/health`, or an error while the service
    /// is not ready.
    pub fn health(&self) -> Result<String, ScorerError> {
        #[derive(Deserialize)]
        struct Health {
            model_id: String,
        }
        let mut response = self
            .agent
            .get(&format!("{}/v1/health", self.base_url))
            .call()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        if status != 200 {
            return Err(ScorerError::Status { status, body });
        }
        let health: Health = serde_json::from_str(&body).map_err(|e| ScorerError::Protocol(e.to_string()))?;
        Ok(health.model_id)
    }
}

impl DisambiguationScorer for RemoteScorer {
    fn score(&self, request: &DisambiguationRequest) -> Result<Vec<f64>, ScorerError> {
        let template = request
            .template()
            .map_err(|e| ScorerError::Request(e.to_string()))?;
        let wire = ScoreRequest {
            template,
            candidates: request.candidates.iter().map(|c| c.phrase.clone()).collect(),
        };
        Ok(self.score_request(&wire)?.scores)
    }

    fn name(&self) -> &str {
        "remote"
    }
}
