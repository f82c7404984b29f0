//! Forward pass, backward pass and artifact persistence for one run of the
//! decision tree.

mod config;
mod value;

pub use config::{load_config, Automation, Config, ConfigError, SolverLimits};
pub use value::{Handle, Value};

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use crate::problems::{canonical_json, OptimizationProblem, ProblemClass, Solution};
use crate::queries::{Answers, AnswerSource, Query, QueryError, RecordingSource, ABORT_OPTIONS};
use crate::solvers::{HistoryEntry, SolverResult, SolverStats};

pub const DEFAULT_STEP_BUDGET: usize = 10_000;

/// Keys with a fixed meaning; nodes may add others freely.
pub const RESERVED_KEYS: [&str; 8] = [
    "problem_instance",
    "formulation",
    "encoding",
    "qubo",
    "ising",
    "num_qubits",
    "solver",
    "backend",
];

/// Ordered store shared by all nodes of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemData {
    entries: IndexMap<String, Value>,
}

impl ProblemData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Inserts or overwrites; keys are never removed.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn require(&self, key: &str) -> Result<&Value, NodeError> {
        self.get(key)
            .ok_or_else(|| NodeError::Failure(format!("problem data has no `{key}` entry")))
    }

    /// Debug form with handles replaced by placeholders.
    pub fn to_json(&self) -> Json {
        Json::Object(self.entries.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
    }
}

/// Node-local state produced by `execute` and read by `next_node` and
/// `interpret_result` of the same node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathInfo {
    entries: IndexMap<String, Value>,
}

impl PathInfo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(Value::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NodeError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("{0}")]
    Failure(String),
}

impl NodeError {
    pub fn failure(e: impl ToString) -> Self {
        NodeError::Failure(e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("node `{0}` was already executed in this run")]
    NodeRevisited(String),
    #[error("run aborted at query `{0}`")]
    QueryAborted(String),
    #[error("node `{node}` failed: {message}")]
    NodeFailure {
        node: String,
        message: String,
        /// Partial problem data written for debugging.
        debug_file: Option<PathBuf>,
    },
    #[error("node `{node}` removed problem data key `{key}`")]
    KeyRemoved { node: String, key: String },
    #[error("interpreting the result at node `{node}` failed: {message}")]
    InterpretFailure { node: String, message: String },
    #[error("step budget of {0} node executions exceeded")]
    StepBudgetExceeded(usize),
    #[error(transparent)]
    Query(QueryError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o failure: {0}")]
    Io(String),
}

pub enum Next {
    Node(Box<dyn Node>),
    Final,
}

/// What a node sees while executing.
pub struct ExecContext<'a> {
    pub config: &'a Config,
    /// Resolved run seed.
    pub seed: u64,
    source: &'a mut dyn AnswerSource,
    raw_result: Option<SolverResult>,
}

impl<'a> ExecContext<'a> {
    pub fn new(config: &'a Config, seed: u64, source: &'a mut dyn AnswerSource) -> Self {
        Self {
            config,
            seed,
            source,
            raw_result: None,
        }
    }

    pub fn ask(&mut self, query: &Query) -> Result<Value, NodeError> {
        Ok(self.source.answer(query)?.value)
    }

    /// Called by the final node with the solver's raw output.
    pub fn set_raw_result(&mut self, result: SolverResult) {
        self.raw_result = Some(result);
    }

    pub fn take_raw_result(&mut self) -> Option<SolverResult> {
        self.raw_result.take()
    }
}

pub trait Node {
    fn id(&self) -> &str;

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError>;

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError>;

    /// Identity unless overridden.
    fn interpret_result(
        &self,
        _result: &mut ResultRecord,
        _data: &ProblemData,
        _config: &Config,
        _info: &PathInfo,
    ) -> Result<(), NodeError> {
        Ok(())
    }
}

/// Contents of `result.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub timestamp: String,
    pub problem_class: Option<ProblemClass>,
    pub solution: Option<Solution>,
    /// Application-level objective.
    pub objective: Option<f64>,
    /// Solver energy on its input model, offset included.
    pub raw_energy: f64,
    pub solver_name: String,
    pub solver_stats: SolverStats,
    pub path: Vec<String>,
    pub best_bits: Option<Vec<u8>>,
    pub repaired: bool,
    pub counts: Option<BTreeMap<String, usize>>,
    pub history: Vec<HistoryEntry>,
    pub best_circuit: Option<String>,
    pub instance_metadata: Map<String, Json>,
    /// Node ids in the order their interpreters ran.
    pub trace: Vec<String>,
    #[serde(skip)]
    pub spins: Option<Vec<i8>>,
    #[serde(skip)]
    pub assignment: Option<Vec<usize>>,
    #[serde(skip)]
    pub raw: Option<SolverResult>,
}

impl ResultRecord {
    pub fn from_raw(raw: SolverResult) -> Self {
        Self {
            best_bits: Some(raw.best_bits.clone()),
            raw_energy: raw.best_energy,
            raw: Some(raw),
            ..Self::default()
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("result record serializes")
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub result: ResultRecord,
    pub path: Vec<String>,
    pub files_written: Vec<PathBuf>,
    pub run_dir: PathBuf,
    pub seed: u64,
    pub answers: Answers,
    pub problem_data: ProblemData,
}

/// Per-run hooks; `on_enter` sees each node id before it executes.
pub struct RunHooks<'a> {
    pub step_budget: usize,
    pub on_enter: Box<dyn FnMut(&str) + 'a>,
    /// Called with the committed data after each node executes.
    pub on_commit: Box<dyn FnMut(&str, &ProblemData) + 'a>,
}

impl Default for RunHooks<'_> {
    fn default() -> Self {
        Self {
            step_budget: DEFAULT_STEP_BUDGET,
            on_enter: Box::new(|_| {}),
            on_commit: Box::new(|_, _| {}),
        }
    }
}

pub fn new_run_id() -> String {
    let suffix: u16 = rand::thread_rng().gen();
    format!("{}-{suffix:04x}", chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ"))
}

pub fn run_tree(root: Box<dyn Node>, config: &Config, source: &mut dyn AnswerSource) -> Result<RunArtifacts, EngineError> {
    run_tree_with(root, config, source, RunHooks::default())
}

pub fn run_tree_with(
    root: Box<dyn Node>,
    config: &Config,
    source: &mut dyn AnswerSource,
    mut hooks: RunHooks<'_>,
) -> Result<RunArtifacts, EngineError> {
    config.validate()?;
    let seed = config.seed.unwrap_or_else(|| u64::from(rand::thread_rng().gen::<u32>()));
    let run_id = new_run_id();
    let run_dir = config.output_dir.join(&run_id);
    let mut recorder = RecordingSource::new(source);
    let mut data = ProblemData::new();
    let mut path: Vec<(Box<dyn Node>, PathInfo)> = Vec::new();
    let mut seen = HashSet::new();
    let mut steps = 0usize;
    let mut current = root;

    let raw = loop {
        let id = current.id().to_string();
        if !seen.insert(id.clone()) {
            return Err(EngineError::NodeRevisited(id));
        }
        (hooks.on_enter)(&id);
        let (info, raw) = loop {
            steps += 1;
            if steps > hooks.step_budget {
                return Err(EngineError::StepBudgetExceeded(hooks.step_budget));
            }
            let mut working = data.clone();
            let mut ctx = ExecContext::new(config, seed, &mut recorder);
            let outcome = current.execute(&mut working, &mut ctx);
            let raw = ctx.take_raw_result();
            match outcome {
                Ok(info) => {
                    if let Some(key) = data.keys().find(|k| !working.contains_key(k)) {
                        return Err(EngineError::KeyRemoved {
                            node: id,
                            key: key.to_string(),
                        });
                    }
                    data = working;
                    (hooks.on_commit)(&id, &data);
                    break (info, raw);
                }
                Err(NodeError::Query(QueryError::QueryAborted(q))) => return Err(EngineError::QueryAborted(q)),
                Err(NodeError::Query(e)) => return Err(EngineError::Query(e)),
                Err(NodeError::Failure(message)) => {
                    if config.automation == Automation::Interactive && ask_retry(&mut recorder, &id, &message)? {
                        continue;
                    }
                    let debug_file = write_debug_data(&run_dir, &data);
                    return Err(EngineError::NodeFailure {
                        node: id,
                        message,
                        debug_file,
                    });
                }
            }
        };
        let next = current.next_node(&info).map_err(|e| EngineError::NodeFailure {
            node: id.clone(),
            message: e.to_string(),
            debug_file: None,
        })?;
        path.push((current, info));
        match next {
            Next::Node(n) => current = n,
            Next::Final => {
                break raw.ok_or_else(|| EngineError::NodeFailure {
                    node: id,
                    message: "final node produced no result".into(),
                    debug_file: None,
                })?
            }
        }
    };

    let answers = recorder.answers;
    let mut result = backward_pass(&path, raw, &data, config)?;
    result.run_id = run_id;
    result.timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let files_written = persist_artifacts(&run_dir, &result, &data, config, seed, &answers)?;
    Ok(RunArtifacts {
        path: result.path.clone(),
        result,
        files_written,
        run_dir,
        seed,
        answers,
        problem_data: data,
    })
}

fn ask_retry(source: &mut dyn AnswerSource, node: &str, message: &str) -> Result<bool, EngineError> {
    let query = Query::abort_or_retry(
        "engine.abort_or_retry",
        &format!("node `{node}` failed: {message}"),
    );
    match source.answer(&query) {
        Ok(a) => Ok(a.value.as_str() == Some(ABORT_OPTIONS[1])),
        Err(QueryError::QueryAborted(q)) => Err(EngineError::QueryAborted(q)),
        Err(_) => Ok(false),
    }
}

fn write_debug_data(run_dir: &Path, data: &ProblemData) -> Option<PathBuf> {
    let file = run_dir.join("problem_data.json");
    fs::create_dir_all(run_dir).ok()?;
    fs::write(&file, canonical_json(&data.to_json())).ok()?;
    Some(file)
}

/// Interprets the raw result on each path node in reverse order.
pub fn backward_pass(
    path: &[(Box<dyn Node>, PathInfo)],
    raw: SolverResult,
    data: &ProblemData,
    config: &Config,
) -> Result<ResultRecord, EngineError> {
    let mut result = ResultRecord::from_raw(raw);
    result.path = path.iter().map(|(n, _)| n.id().to_string()).collect();
    for (node, info) in path.iter().rev() {
        node.interpret_result(&mut result, data, config, info)
            .map_err(|e| EngineError::InterpretFailure {
                node: node.id().to_string(),
                message: e.to_string(),
            })?;
        result.trace.push(node.id().to_string());
    }
    Ok(result)
}

/// Writes `result.json`, `run_config.json`, `problem_data.json` and, for
/// generated instances, `problem_instance.json`.
pub fn persist_artifacts(
    run_dir: &Path,
    result: &ResultRecord,
    data: &ProblemData,
    config: &Config,
    seed: u64,
    answers: &Answers,
) -> Result<Vec<PathBuf>, EngineError> {
    let io = |e: std::io::Error| EngineError::Io(e.to_string());
    fs::create_dir_all(run_dir).map_err(io)?;
    let mut written = Vec::new();
    let mut write = |name: &str, text: String| -> Result<(), EngineError> {
        let file = run_dir.join(name);
        fs::write(&file, text).map_err(io)?;
        written.push(file);
        Ok(())
    };
    write("result.json", result.to_json_string())?;
    let generated = data.get("instance_generated").and_then(Value::as_bool) == Some(true);
    if let (true, Some(Value::Instance(instance))) = (generated, data.get("problem_instance")) {
        write("problem_instance.json", canonical_json(&instance.to_record()))?;
    }
    let answer_map: Map<String, Json> = answers
        .iter()
        .map(|(k, a)| (k.clone(), Json::String(a.value.to_string())))
        .collect();
    let run_config = json!({
        "config": config.redacted_json(),
        "seed": seed,
        "answers": answer_map,
    });
    write("run_config.json", canonical_json(&run_config))?;
    write("problem_data.json", canonical_json(&data.to_json()))?;
    Ok(written)
}
