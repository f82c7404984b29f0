use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use indexmap::IndexMap;

use super::{resolve, Answer, AnswerOrigin, AnswerSource, Query, QueryError, Resolution};

/// Reads answers line by line, re-prompting until the input validates.
pub struct InteractiveSource<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> InteractiveSource<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self { input, output }
    }
}

impl<R: BufRead, W: Write> AnswerSource for InteractiveSource<R, W> {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError> {
        loop {
            let _ = write!(self.output, "{}", query.render_prompt());
            let _ = self.output.flush();
            let mut line = String::new();
            let read = self
                .input
                .read_line(&mut line)
                .map_err(|e| QueryError::Disconnected(e.to_string()))?;
            if read == 0 {
                return Err(QueryError::NoAnswerAvailable(query.id.clone()));
            }
            match resolve(query, &line, AnswerOrigin::User) {
                Resolution::Abort => return Err(QueryError::QueryAborted(query.id.clone())),
                Resolution::Value(value, source) => {
                    return Ok(Answer {
                        query_id: query.id.clone(),
                        value,
                        source,
                    })
                }
                Resolution::Violation(msg) => {
                    let _ = writeln!(self.output, "invalid input: {msg}");
                }
            }
        }
    }
}

/// Answers keyed by query id; a missing key falls back to the default.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    answers: BTreeMap<String, String>,
}

impl ScriptedSource {
    pub fn new(answers: BTreeMap<String, String>) -> Self {
        Self { answers }
    }

    /// Parses a `{query_id: raw_string}` JSON object. Numbers and booleans
    /// are accepted and converted to their text form.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = value.as_object().ok_or("answers file must be a JSON object")?;
        let mut answers = BTreeMap::new();
        for (k, v) in obj {
            let raw = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return Err(format!("answer for `{k}` must be a string, got {other}")),
            };
            answers.insert(k.clone(), raw);
        }
        Ok(Self { answers })
    }
}

impl AnswerSource for ScriptedSource {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError> {
        let raw = self.answers.get(&query.id).map_or("", String::as_str);
        match resolve(query, raw, AnswerOrigin::Scripted) {
            Resolution::Abort => Err(QueryError::QueryAborted(query.id.clone())),
            Resolution::Value(value, source) => Ok(Answer {
                query_id: query.id.clone(),
                value,
                source,
            }),
            Resolution::Violation(_) if raw.trim().is_empty() => Err(QueryError::NoAnswerAvailable(query.id.clone())),
            Resolution::Violation(message) => Err(QueryError::InvalidScriptedAnswer {
                query_id: query.id.clone(),
                message,
            }),
        }
    }
}

/// Accepts every default; fails on queries without one.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoSource;

impl AnswerSource for AutoSource {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError> {
        query
            .default
            .clone()
            .map(|value| Answer {
                query_id: query.id.clone(),
                value,
                source: AnswerOrigin::Auto,
            })
            .ok_or_else(|| QueryError::NoAnswerAvailable(query.id.clone()))
    }
}

/// Wraps a source and records every answer in order.
pub struct RecordingSource<'a> {
    inner: &'a mut dyn AnswerSource,
    pub answers: IndexMap<String, Answer>,
}

impl<'a> RecordingSource<'a> {
    pub fn new(inner: &'a mut dyn AnswerSource) -> Self {
        Self {
            inner,
            answers: IndexMap::new(),
        }
    }
}

impl AnswerSource for RecordingSource<'_> {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError> {
        let a = self.inner.answer(query)?;
        self.answers.insert(a.query_id.clone(), a.clone());
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Value;

    fn layers() -> Query {
        Query::int("qaoa.layers", "layers p?", Some(1), None).with_default(Value::Int(1))
    }

    #[test]
    fn interactive_default_and_retry() {
        let mut out = Vec::new();
        let mut src = InteractiveSource::new("\n".as_bytes(), &mut out);
        let a = src.answer(&layers()).unwrap();
        assert_eq!((a.value, a.source), (Value::Int(1), AnswerOrigin::Default));

        let mut out = Vec::new();
        let mut src = InteractiveSource::new("abc\n3\n".as_bytes(), &mut out);
        let a = src.answer(&layers()).unwrap();
        assert_eq!((a.value, a.source), (Value::Int(3), AnswerOrigin::User));
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.matches("invalid input").count(), 1);
    }

    #[test]
    fn interactive_exit_and_eof() {
        let mut out = Vec::new();
        let mut src = InteractiveSource::new("exit\n".as_bytes(), &mut out);
        assert_eq!(
            src.answer(&layers()).unwrap_err(),
            QueryError::QueryAborted("qaoa.layers".into())
        );
        let mut src = InteractiveSource::new("".as_bytes(), Vec::new());
        assert!(matches!(src.answer(&layers()), Err(QueryError::NoAnswerAvailable(_))));
    }

    #[test]
    fn scripted_semantics() {
        let mut src = ScriptedSource::from_json(r#"{"qaoa.layers": 3, "other": "x"}"#).unwrap();
        assert_eq!(src.answer(&layers()).unwrap().value, Value::Int(3));
        let mut src = ScriptedSource::default();
        let a = src.answer(&layers()).unwrap();
        assert_eq!((a.value, a.source), (Value::Int(1), AnswerOrigin::Default));
        assert!(matches!(
            src.answer(&Query::int("n", "n?", None, None)),
            Err(QueryError::NoAnswerAvailable(_))
        ));
        let mut src = ScriptedSource::from_json(r#"{"qaoa.layers": "0"}"#).unwrap();
        assert!(matches!(src.answer(&layers()), Err(QueryError::InvalidScriptedAnswer { .. })));
        let mut src = ScriptedSource::from_json(r#"{"qaoa.layers": "exit"}"#).unwrap();
        assert!(matches!(src.answer(&layers()), Err(QueryError::QueryAborted(_))));
        assert!(ScriptedSource::from_json("[1]").is_err());
    }

    #[test]
    fn auto_uses_defaults_only() {
        let a = AutoSource.answer(&layers()).unwrap();
        assert_eq!((a.value, a.source), (Value::Int(1), AnswerOrigin::Auto));
        assert!(AutoSource.answer(&Query::int("n", "n?", None, None)).is_err());
    }

    #[test]
    fn scripted_equals_interactive() {
        let qs = [
            Query::multi_choice("a", "a?", &["x", "y"]).with_default("x"),
            layers(),
        ];
        let mut scripted = ScriptedSource::from_json(r#"{"a":"2","qaoa.layers":"4"}"#).unwrap();
        let mut out = Vec::new();
        let mut typed = InteractiveSource::new("2\n4\n".as_bytes(), &mut out);
        for q in &qs {
            assert_eq!(scripted.answer(q).unwrap().value, typed.answer(q).unwrap().value);
        }
    }
}
