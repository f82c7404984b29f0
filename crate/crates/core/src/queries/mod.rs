//! Typed user-input primitives, answer sources and conditional query trees.

mod sources;
mod tree;

pub use sources::{AutoSource, InteractiveSource, RecordingSource, ScriptedSource};
pub use tree::{run_query_tree, Answers, QueryTree};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builders::Hyperparameter;
use crate::engine::Value;

pub const EXIT: &str = "exit";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("run aborted at query `{0}`")]
    QueryAborted(String),
    #[error("no answer available for query `{0}`")]
    NoAnswerAvailable(String),
    #[error("invalid scripted answer for `{query_id}`: {message}")]
    InvalidScriptedAnswer { query_id: String, message: String },
    #[error("invalid query tree: {0}")]
    InvalidTree(String),
    #[error("answer channel closed: {0}")]
    Disconnected(String),
}

/// Bound on a float query; `inclusive: false` makes it strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatBound {
    pub value: f64,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryKind {
    MultiChoice {
        options: Vec<String>,
        /// Indices shown but not selectable, such as token-gated providers.
        locked: Vec<usize>,
    },
    Str,
    Path {
        must_exist: bool,
    },
    Int {
        min: Option<i64>,
        max: Option<i64>,
    },
    Float {
        min: Option<FloatBound>,
        max: Option<FloatBound>,
    },
    HyperParam(Hyperparameter),
    /// Abort or retry after a failure.
    Abort,
}

impl QueryKind {
    pub fn name(&self) -> &'static str {
        match self {
            QueryKind::MultiChoice { .. } => "multi_choice",
            QueryKind::Str => "string",
            QueryKind::Path { .. } => "path",
            QueryKind::Int { .. } => "int",
            QueryKind::Float { .. } => "float",
            QueryKind::HyperParam(_) => "hyperparam",
            QueryKind::Abort => "abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub id: String,
    pub prompt: String,
    pub default: Option<Value>,
    pub kind: QueryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerOrigin {
    User,
    Default,
    Scripted,
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub query_id: String,
    pub value: Value,
    pub source: AnswerOrigin,
}

/// Serializable rendering of a pending query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub id: String,
    pub prompt: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub options: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub locked: Vec<usize>,
    pub default: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub description: Option<String>,
}

pub const ABORT_OPTIONS: [&str; 2] = ["abort", "retry"];

impl Query {
    pub fn new(id: impl Into<String>, prompt: impl Into<String>, kind: QueryKind) -> Self {
        Self {
            id: id.into(),
            prompt: prompt.into(),
            default: None,
            kind,
        }
    }

    pub fn with_default(mut self, default: impl Into<Value>) -> Self {
        self.default = Some(default.into());
        self
    }

    pub fn multi_choice(id: &str, prompt: &str, options: &[&str]) -> Self {
        Self::new(
            id,
            prompt,
            QueryKind::MultiChoice {
                options: options.iter().map(|s| s.to_string()).collect(),
                locked: Vec::new(),
            },
        )
    }

    pub fn int(id: &str, prompt: &str, min: Option<i64>, max: Option<i64>) -> Self {
        Self::new(id, prompt, QueryKind::Int { min, max })
    }

    pub fn path(id: &str, prompt: &str, must_exist: bool) -> Self {
        Self::new(id, prompt, QueryKind::Path { must_exist })
    }

    /// Query for one hyperparameter, defaulting to its declared default.
    pub fn hyperparameter(id: &str, hp: &Hyperparameter) -> Self {
        let prompt = match &hp.description {
            Some(d) => format!("{} ({d})?", hp.name),
            None => format!("{}?", hp.name),
        };
        Self {
            id: id.to_string(),
            prompt,
            default: hp.default.clone(),
            kind: QueryKind::HyperParam(hp.clone()),
        }
    }

    pub fn abort_or_retry(id: &str, message: &str) -> Self {
        Self::new(id, format!("{message}. Abort or retry?"), QueryKind::Abort).with_default("abort")
    }

    pub fn view(&self) -> QueryView {
        let (options, locked) = match &self.kind {
            QueryKind::MultiChoice { options, locked } => (options.clone(), locked.clone()),
            QueryKind::Abort => (ABORT_OPTIONS.iter().map(|s| s.to_string()).collect(), Vec::new()),
            QueryKind::HyperParam(hp) => match &hp.ty {
                crate::builders::HyperType::Choice(opts) => (opts.clone(), Vec::new()),
                _ => (Vec::new(), Vec::new()),
            },
            _ => (Vec::new(), Vec::new()),
        };
        QueryView {
            id: self.id.clone(),
            prompt: self.prompt.clone(),
            kind: self.kind.name().to_string(),
            options,
            locked,
            default: self.default.as_ref().map(ToString::to_string),
            description: match &self.kind {
                QueryKind::HyperParam(hp) => hp.description.clone(),
                _ => None,
            },
        }
    }

    /// Terminal rendering: numbered options and the default in brackets.
    pub fn render_prompt(&self) -> String {
        let mut out = self.prompt.clone();
        let view = self.view();
        for (i, o) in view.options.iter().enumerate() {
            let lock = if view.locked.contains(&i) { " (locked)" } else { "" };
            out.push_str(&format!("\n  {}) {o}{lock}", i + 1));
        }
        if let Some(d) = &view.default {
            out.push_str(&format!("\n[{d}]"));
        }
        out.push_str("\n> ");
        out
    }
}

/// Parses and checks raw input; returns a violation message on failure.
pub fn validate(query: &Query, raw: &str) -> Result<Value, String> {
    let raw = raw.trim();
    match &query.kind {
        QueryKind::MultiChoice { options, locked } => choose(options, locked, raw),
        QueryKind::Abort => {
            let opts: Vec<String> = ABORT_OPTIONS.iter().map(|s| s.to_string()).collect();
            choose(&opts, &[], raw)
        }
        QueryKind::Str => {
            if raw.is_empty() {
                Err("a value is required".into())
            } else {
                Ok(Value::str(raw))
            }
        }
        QueryKind::Path { must_exist } => {
            if raw.is_empty() {
                Err("a path is required".into())
            } else if *must_exist && !Path::new(raw).is_file() {
                Err(format!("`{raw}` is not an existing file"))
            } else {
                Ok(Value::str(raw))
            }
        }
        QueryKind::Int { min, max } => {
            let v: i64 = raw.parse().map_err(|_| format!("`{raw}` is not an integer"))?;
            if let Some(m) = min.filter(|m| v < *m) {
                return Err(format!("must be >= {m}"));
            }
            if let Some(m) = max.filter(|m| v > *m) {
                return Err(format!("must be <= {m}"));
            }
            Ok(Value::Int(v))
        }
        QueryKind::Float { min, max } => {
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| format!("`{raw}` is not a number"))?;
            if let Some(b) = min {
                if v < b.value || (!b.inclusive && v == b.value) {
                    return Err(format!("must be {} {}", if b.inclusive { ">=" } else { ">" }, b.value));
                }
            }
            if let Some(b) = max {
                if v > b.value || (!b.inclusive && v == b.value) {
                    return Err(format!("must be {} {}", if b.inclusive { "<=" } else { "<" }, b.value));
                }
            }
            Ok(Value::Real(v))
        }
        QueryKind::HyperParam(hp) => hp.parse(raw),
    }
}

fn choose(options: &[String], locked: &[usize], raw: &str) -> Result<Value, String> {
    let index = match raw.parse::<usize>() {
        Ok(i) if (1..=options.len()).contains(&i) => Some(i - 1),
        _ => options.iter().position(|o| o == raw),
    };
    match index {
        Some(i) if locked.contains(&i) => Err(format!("option `{}` is locked", options[i])),
        Some(i) => Ok(Value::str(options[i].clone())),
        None => Err(format!("choose one of: {}", options.join(", "))),
    }
}

/// How one raw input resolves against a query.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Abort,
    Value(Value, AnswerOrigin),
    Violation(String),
}

/// Shared input handling: `exit` aborts, empty input takes the default.
pub fn resolve(query: &Query, raw: &str, origin: AnswerOrigin) -> Resolution {
    let trimmed = raw.trim();
    if trimmed.eq_ignore_ascii_case(EXIT) {
        return Resolution::Abort;
    }
    if trimmed.is_empty() {
        return match &query.default {
            Some(d) => Resolution::Value(d.clone(), AnswerOrigin::Default),
            None => Resolution::Violation("a value is required".into()),
        };
    }
    match validate(query, trimmed) {
        Ok(v) => Resolution::Value(v, origin),
        Err(msg) => Resolution::Violation(msg),
    }
}

/// Supplies answers to queries.
pub trait AnswerSource {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError>;
}

pub fn ask(query: &Query, source: &mut dyn AnswerSource) -> Result<Answer, QueryError> {
    source.answer(query)
}
