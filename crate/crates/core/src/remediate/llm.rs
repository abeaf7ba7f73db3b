use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::Knob;
use super::plan::{plan_action_rule, InterventionAction, InterventionState, MAX_CHANGES};

/// Environment variable holding the planner's bearer token.
pub const TOKEN_ENV: &str = "RFTFM_PLANNER_TOKEN";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// A chat-completion endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerEndpoint {
    /// Base URL; requests go to `<base_url>/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub token: Option<String>,
    pub timeout: Duration,
}

impl PlannerEndpoint {
    /// Reads the token from [`TOKEN_ENV`].
    pub fn from_env(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        PlannerEndpoint {
            base_url: base_url.into(),
            model: model.into(),
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum TransportError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("authentication failed: {0}")]
    Auth(String),
}

/// Sends one chat request and returns the assistant's reply text.
pub trait ChatTransport {
    fn complete(
        &self,
        endpoint: &PlannerEndpoint,
        request: &ChatRequest,
    ) -> Result<String, TransportError>;
}

/// Blocking HTTP transport.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl ChatTransport for HttpTransport {
    fn complete(
        &self,
        endpoint: &PlannerEndpoint,
        request: &ChatRequest,
    ) -> Result<String, TransportError> {
        let token = endpoint
            .token
            .as_deref()
            .ok_or_else(|| TransportError::Auth(format!("{TOKEN_ENV} is not set")))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(endpoint.timeout)
            .build()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let resp = client
            .post(endpoint.url())
            .bearer_auth(token)
            .json(request)
            .send()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(TransportError::Auth(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(TransportError::Unreachable(format!("HTTP {status}")));
        }
        let body: Value = resp
            .json()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        Ok(body["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string())
    }
}

/// A planned action and whether it came from the rule fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmPlan {
    pub action: InterventionAction,
    pub fallback: bool,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PlannerError {
    #[error("planner endpoint unreachable: {message}")]
    EndpointUnreachable {
        message: String,
        fallback: InterventionAction,
    },
    #[error("planner authentication failed: {message}")]
    AuthFailure {
        message: String,
        fallback: InterventionAction,
    },
}

impl PlannerError {
    /// The rule-based action recorded before the error surfaced.
    pub fn fallback(&self) -> &InterventionAction {
        match self {
            PlannerError::EndpointUnreachable { fallback, .. }
            | PlannerError::AuthFailure { fallback, .. } => fallback,
        }
    }
}

fn knob_schema() -> Value {
    let knobs: serde_json::Map<String, Value> = Knob::ALL
        .iter()
        .map(|k| {
            let (lo, hi) = k.bounds();
            let kind = if k.is_discrete() { "integer" } else { "real" };
            (
                k.name().to_string(),
                json!({"min": lo, "max": hi, "type": kind, "baseline": k.baseline()}),
            )
        })
        .collect();
    Value::Object(knobs)
}

pub fn build_request(model: &str, state: &InterventionState) -> ChatRequest {
    let system = format!(
        "You repair reinforcement fine-tuning runs. Reply with one JSON object mapping at most {MAX_CHANGES} \
         knob names to new values and nothing else. Knobs: {}",
        knob_schema()
    );
    let user = serde_json::to_string(state).unwrap_or_default();
    ChatRequest {
        model: model.to_string(),
        messages: vec![
            ChatMessage {
                role: "system".into(),
                content: system,
            },
            ChatMessage {
                role: "user".into(),
                content: user,
            },
        ],
        temperature: 0.0,
    }
}

/// Extracts an action from reply text: the first `{` to the last `}` must
/// parse as an object of numbers. Unknown knobs are dropped, values are
/// clamped (discrete knobs rounded) and only the first three are kept.
/// `None` when nothing usable remains.
pub fn parse_reply(text: &str) -> Option<InterventionAction> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    let obj: serde_json::Map<String, Value> = serde_json::from_str(&text[start..=end]).ok()?;
    let mut changes = Vec::new();
    for (name, v) in obj {
        let Ok(k) = name.parse::<Knob>() else {
            continue;
        };
        let x = v.as_f64().filter(|x| x.is_finite())?;
        changes.push((k, k.clamp(x)));
        if changes.len() == MAX_CHANGES {
            break;
        }
    }
    if changes.is_empty() {
        return None;
    }
    Some(InterventionAction::from_knobs(&changes, "planner reply"))
}

/// Asks the endpoint for an action, falling back to the rule planner when
/// the reply cannot be used.
pub fn plan_action_llm(
    transport: &dyn ChatTransport,
    endpoint: &PlannerEndpoint,
    state: &InterventionState,
) -> Result<LlmPlan, PlannerError> {
    let fallback = plan_action_rule(state);
    let request = build_request(&endpoint.model, state);
    match transport.complete(endpoint, &request) {
        Ok(text) => Ok(match parse_reply(&text) {
            Some(action) => LlmPlan {
                action,
                fallback: false,
            },
            None => {
                log::warn!("planner reply unusable, using rule remedy: {text:?}");
                LlmPlan {
                    action: fallback,
                    fallback: true,
                }
            }
        }),
        Err(TransportError::Auth(message)) => Err(PlannerError::AuthFailure { message, fallback }),
        Err(TransportError::Unreachable(message)) => {
            Err(PlannerError::EndpointUnreachable { message, fallback })
        }
    }
}
