use std::path::PathBuf;
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use qdt_core::engine::{Automation, Config, EngineError, RunHooks};
use qdt_core::nodes;
use qdt_core::queries::{resolve, Answer, AnswerOrigin, AnswerSource, AutoSource, Query, QueryError, QueryView, Resolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    AwaitingAnswer,
    Running,
    Finished,
    Failed,
    Aborted,
}

/// Public view of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: SessionState,
    pub pending_query: Option<QueryView>,
    /// Why the last answer to the pending query was rejected.
    pub violation: Option<String>,
    pub path_so_far: Vec<String>,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub run_id: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub view: SessionView,
    /// Bumped on every change.
    pub version: u64,
    pub last_activity: Instant,
    /// Verbatim `result.json` once finished.
    pub result_json: Option<String>,
    pub run_dir: Option<PathBuf>,
    pub files: Vec<PathBuf>,
}

pub type Publisher = Arc<watch::Sender<Snapshot>>;

fn touch(s: &mut Snapshot, idle: Duration) {
    s.version += 1;
    s.last_activity = Instant::now();
    s.view.expires_at = Utc::now() + chrono::Duration::from_std(idle).unwrap_or(chrono::Duration::MAX);
}

pub fn new_snapshot(id: &str, idle: Duration) -> Snapshot {
    let now = Utc::now();
    Snapshot {
        view: SessionView {
            id: id.to_string(),
            state: SessionState::Running,
            pending_query: None,
            violation: None,
            path_so_far: Vec::new(),
            created_at: now,
            expires_at: now + chrono::Duration::from_std(idle).unwrap_or(chrono::Duration::MAX),
            run_id: None,
            error: None,
        },
        version: 0,
        last_activity: Instant::now(),
        result_json: None,
        run_dir: None,
        files: Vec::new(),
    }
}

/// Answer source fed through a per-session mailbox of `(query_id, raw)`.
pub struct RemoteSource {
    pub answers: Receiver<(String, String)>,
    pub publisher: Publisher,
    pub idle: Duration,
}

impl RemoteSource {
    fn publish(&self, state: SessionState, pending: Option<&Query>, violation: Option<String>) {
        self.publisher.send_modify(|s| {
            s.view.state = state;
            s.view.pending_query = pending.map(Query::view);
            s.view.violation = violation;
            touch(s, self.idle);
        });
    }
}

impl AnswerSource for RemoteSource {
    fn answer(&mut self, query: &Query) -> Result<Answer, QueryError> {
        let mut violation = None;
        loop {
            self.publish(SessionState::AwaitingAnswer, Some(query), violation.take());
            let (id, raw) = match self.answers.recv_timeout(self.idle) {
                Ok(a) => a,
                Err(RecvTimeoutError::Timeout) => return Err(QueryError::Disconnected("session idle timeout".into())),
                Err(RecvTimeoutError::Disconnected) => return Err(QueryError::Disconnected("session closed".into())),
            };
            if id != query.id {
                violation = Some(format!("pending query is `{}`, not `{id}`", query.id));
                continue;
            }
            match resolve(query, &raw, AnswerOrigin::User) {
                Resolution::Abort => return Err(QueryError::QueryAborted(query.id.clone())),
                Resolution::Value(value, source) => {
                    self.publish(SessionState::Running, None, None);
                    return Ok(Answer {
                        query_id: query.id.clone(),
                        value,
                        source,
                    });
                }
                Resolution::Violation(m) => violation = Some(m),
            }
        }
    }
}

/// Runs the catalog on the current thread, publishing progress.
pub fn run_engine(config: Config, mut remote: RemoteSource) {
    let publisher = remote.publisher.clone();
    let idle = remote.idle;
    let hooks = RunHooks {
        on_enter: Box::new(|id: &str| {
            publisher.send_modify(|s| {
                s.view.path_so_far.push(id.to_string());
                touch(s, idle);
            })
        }),
        ..RunHooks::default()
    };
    let outcome = if config.automation == Automation::Auto {
        nodes::run_with(&config, &mut AutoSource, hooks)
    } else {
        nodes::run_with(&config, &mut remote, hooks)
    };
    let result_json = outcome
        .as_ref()
        .ok()
        .map(|run| std::fs::read_to_string(run.run_dir.join("result.json")));
    publisher.send_modify(|s| {
        s.view.pending_query = None;
        s.view.violation = None;
        match (&outcome, result_json) {
            (Ok(run), Some(Ok(text))) => {
                s.view.state = SessionState::Finished;
                s.view.run_id = Some(run.result.run_id.clone());
                s.result_json = Some(text);
                s.run_dir = Some(run.run_dir.clone());
                s.files = run.files_written.clone();
            }
            (Ok(_), other) => {
                s.view.state = SessionState::Failed;
                s.view.error = Some(format!("cannot read result.json: {other:?}"));
            }
            (Err(EngineError::QueryAborted(_)), _) => s.view.state = SessionState::Aborted,
            (Err(e), _) => {
                s.view.state = SessionState::Failed;
                s.view.error = Some(e.to_string());
            }
        }
        touch(s, idle);
    });
}

#[cfg(test)]
mod tests {
    use std::sync::mpsc;

    use qdt_core::engine::Value;

    use super::*;

    fn remote(idle: Duration) -> (RemoteSource, mpsc::Sender<(String, String)>, watch::Receiver<Snapshot>) {
        let (tx, rx) = mpsc::channel();
        let (publisher, watcher) = watch::channel(new_snapshot("s", idle));
        let source = RemoteSource {
            answers: rx,
            publisher: Arc::new(publisher),
            idle,
        };
        (source, tx, watcher)
    }

    #[test]
    fn rejected_answers_are_republished_with_a_violation() {
        let (mut source, tx, watcher) = remote(Duration::from_secs(5));
        let query = Query::int("n", "How many?", Some(1), None);
        tx.send(("other".into(), "3".into())).unwrap();
        tx.send(("n".into(), "abc".into())).unwrap();
        tx.send(("n".into(), "0".into())).unwrap();
        tx.send(("n".into(), "4".into())).unwrap();
        let answer = source.answer(&query).unwrap();
        assert_eq!(answer.value, Value::Int(4));
        let snap = watcher.borrow();
        assert_eq!(snap.view.state, SessionState::Running);
        assert!(snap.view.pending_query.is_none());
        // one publish per attempt plus the final running state
        assert_eq!(snap.version, 5);
    }

    #[test]
    fn exit_aborts_and_silence_disconnects() {
        let (mut source, tx, _watcher) = remote(Duration::from_millis(20));
        let query = Query::int("n", "How many?", None, None);
        tx.send(("n".into(), "exit".into())).unwrap();
        assert_eq!(source.answer(&query).unwrap_err(), QueryError::QueryAborted("n".into()));
        assert!(matches!(source.answer(&query), Err(QueryError::Disconnected(_))));
    }

    #[test]
    fn pending_query_is_visible_while_waiting() {
        let (mut source, tx, watcher) = remote(Duration::from_secs(5));
        let query = Query::int("n", "How many?", None, None);
        let handle = std::thread::spawn(move || source.answer(&query).map(|a| a.value));
        let mut w = watcher.clone();
        let rt = tokio::runtime::Builder::new_current_thread().enable_time().build().unwrap();
        rt.block_on(w.wait_for(|s| s.view.state == SessionState::AwaitingAnswer)).unwrap();
        assert_eq!(watcher.borrow().view.pending_query.as_ref().map(|q| q.id.as_str()), Some("n"));
        tx.send(("n".into(), "2".into())).unwrap();
        assert_eq!(handle.join().unwrap().unwrap(), Value::Int(2));
    }
}
