//! The node catalog.
//!
//! Forward routing:
//!
//! ```text
//! load_problem → formulation_select → [encoding_select] → algorithm_select
//!   brute force | tabu → solver_setup → algorithm_execute
//!   QAOA → ising_conversion → select_layers → load_or_generate_mixer
//!          → [select_mixer] → select_optimizer → solver_setup
//!          → backend_select → algorithm_execute
//!   VQE  → ising_conversion → select_ansatz → select_optimizer
//!          → solver_setup → backend_select → algorithm_execute
//! ```
//!
//! Scripted answers are keyed by the query ids listed in [`QUERY_IDS`].

mod algorithm;
mod execution;
mod problem;

pub use algorithm::{
    recommended_algorithm, AlgorithmSelect, IsingConversion, LoadOrGenerateMixer, SelectAnsatz, SelectLayers,
    SelectMixer, SelectOptimizer,
};
pub use execution::{AlgorithmExecute, BackendSelect, SolverSetup, HARDWARE_PROVIDERS, STATEVECTOR};
pub use problem::{EncodingSelect, FormulationSelect, LoadProblem, DISCRETE};

use crate::encodings::DecodingMap;
use crate::engine::{run_tree, run_tree_with, Config, EngineError, Node, NodeError, ProblemData, RunArtifacts, RunHooks, Value};
use crate::problems::ProblemInstance;
use crate::queries::{AnswerSource, Query, QueryKind};

const FORMULATION_CHOICE: &str = "formulation.choice";
const ENCODING_CHOICE: &str = "encoding.choice";

/// Every fixed query id; hyperparameter queries add `optimizer.<name>` and
/// `ansatz.<name>`.
pub const QUERY_IDS: [&str; 16] = [
    "load_problem.source",
    "load_problem.path",
    "load_problem.class",
    "load_problem.size",
    FORMULATION_CHOICE,
    ENCODING_CHOICE,
    "encoding.penalty",
    "algorithm.choice",
    "qaoa.layers",
    "mixer.source",
    "mixer.path",
    "mixer.template",
    "ansatz.choice",
    "optimizer.choice",
    "backend.choice",
    "engine.abort_or_retry",
];

pub fn root() -> Box<dyn Node> {
    Box::new(LoadProblem)
}

/// Runs the full catalog from its root.
pub fn run(config: &Config, source: &mut dyn AnswerSource) -> Result<RunArtifacts, EngineError> {
    run_tree(root(), config, source)
}

pub fn run_with(config: &Config, source: &mut dyn AnswerSource, hooks: RunHooks<'_>) -> Result<RunArtifacts, EngineError> {
    run_tree_with(root(), config, source, hooks)
}

fn choice_query(id: &str, prompt: &str, options: &[&str], locked: &[usize], default: &str) -> Query {
    Query::new(
        id,
        prompt,
        QueryKind::MultiChoice {
            options: options.iter().map(|s| s.to_string()).collect(),
            locked: locked.to_vec(),
        },
    )
    .with_default(default)
}

fn instance(data: &ProblemData) -> Result<&ProblemInstance, NodeError> {
    match data.require("problem_instance")? {
        Value::Instance(i) => Ok(i),
        other => Err(NodeError::failure(format!("problem_instance holds a {}", other.type_name()))),
    }
}

fn decoding_map(data: &ProblemData) -> Result<&DecodingMap, NodeError> {
    match data.require("decoding_map")? {
        Value::Decoding(m) => Ok(m),
        other => Err(NodeError::failure(format!("decoding_map holds a {}", other.type_name()))),
    }
}

fn int_entry(data: &ProblemData, key: &str) -> Result<usize, NodeError> {
    data.require(key)?
        .as_int()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| NodeError::failure(format!("`{key}` must be a non-negative integer")))
}
