//! Classical and variational solvers plus the derivative-free optimizers
//! used to train circuit parameters.

mod brute_force;
mod optimizers;
mod tabu;
mod variational;

pub use brute_force::brute_force;
pub use optimizers::{nelder_mead, spsa, NelderMeadOptions, Optimization, OptimizerSpec, SpsaOptions};
pub use tabu::{tabu_search, TabuOptions};
pub use variational::{best_basis_state, qaoa, vqe, VariationalOptions};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, CircuitError};
use crate::encodings::EncodingError;
use crate::engine::{ProblemData, Value};

pub const DEFAULT_BRUTE_FORCE_MAX_VARS: usize = 22;
pub const DEFAULT_SHOTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("{num_vars} variables exceed the brute-force limit of {limit}")]
    TooManyVariables { num_vars: usize, limit: usize },
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
    #[error("problem data lacks a `{0}` entry of the required type")]
    MissingInput(&'static str),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "brute force")]
    BruteForce,
    #[serde(rename = "tabu")]
    Tabu,
    #[serde(rename = "QAOA")]
    Qaoa,
    #[serde(rename = "VQE")]
    Vqe,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::BruteForce, SolverKind::Tabu, SolverKind::Qaoa, SolverKind::Vqe];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::BruteForce => "brute force",
            SolverKind::Tabu => "tabu",
            SolverKind::Qaoa => "QAOA",
            SolverKind::Vqe => "VQE",
        }
    }

    pub fn is_variational(self) -> bool {
        matches!(self, SolverKind::Qaoa | SolverKind::Vqe)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SolverError::InvalidParameter(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub parameters: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub circuit_evaluations: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub best_bits: Vec<u8>,
    /// Energy of `best_bits` on the solver's input model, offset included.
    pub best_energy: f64,
    pub counts: Option<BTreeMap<String, usize>>,
    pub best_circuit: Option<Circuit>,
    pub history: Vec<HistoryEntry>,
    pub stats: SolverStats,
}

impl SolverResult {
    /// Running minimum of the recorded evaluations.
    pub fn incumbent_curve(&self) -> Vec<f64> {
        self.history
            .iter()
            .scan(f64::INFINITY, |best, h| {
                *best = best.min(h.energy);
                Some(*best)
            })
            .collect()
    }
}

/// A fully configured solver, ready to run on problem data.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    BruteForce {
        max_vars: usize,
    },
    /// `None` selects [`TabuOptions::defaults_for`] the model size.
    Tabu(Option<TabuOptions>),
    Qaoa {
        mixer: Circuit,
        layers: usize,
        optimizer: OptimizerSpec,
        options: VariationalOptions,
    },
    Vqe {
        ansatz: Circuit,
        optimizer: OptimizerSpec,
        options: VariationalOptions,
    },
}

impl SolverSpec {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverSpec::BruteForce { .. } => SolverKind::BruteForce,
            SolverSpec::Tabu(_) => SolverKind::Tabu,
            SolverSpec::Qaoa { .. } => SolverKind::Qaoa,
            SolverSpec::Vqe { .. } => SolverKind::Vqe,
        }
    }

    pub fn solve(&self, data: &ProblemData, seed: u64) -> Result<SolverResult, SolverError> {
        let qubo = || match data.get("qubo") {
            Some(Value::Qubo(q)) => Ok(q),
            _ => Err(SolverError::MissingInput("qubo")),
        };
        let ising = || match data.get("ising") {
            Some(Value::Ising(i)) => Ok(i),
            _ => Err(SolverError::MissingInput("ising")),
        };
        match self {
            SolverSpec::BruteForce { max_vars } => brute_force(qubo()?, *max_vars),
            SolverSpec::Tabu(opts) => {
                let q = qubo()?;
                tabu_search(q, opts.unwrap_or_else(|| TabuOptions::defaults_for(q.num_vars())), seed)
            }
            SolverSpec::Qaoa {
                mixer,
                layers,
                optimizer,
                options,
            } => qaoa(ising()?, mixer, *layers, optimizer, seed, options),
            SolverSpec::Vqe {
                ansatz,
                optimizer,
                options,
            } => vqe(ising()?, ansatz, optimizer, seed, options),
        }
    }
}

/// Whether `data` holds the model `kind` consumes: a QUBO for the classical
/// solvers, an Ising model for the variational ones.
pub fn check_input(kind: SolverKind, data: &ProblemData) -> bool {
    match kind {
        SolverKind::BruteForce | SolverKind::Tabu => matches!(data.get("qubo"), Some(Value::Qubo(_))),
        SolverKind::Qaoa | SolverKind::Vqe => matches!(data.get("ising"), Some(Value::Ising(_))),
    }
}

/// Sort key ordering bit vectors as unsigned integers with bit 0 most
/// significant, so `[0, 1]` precedes `[1, 0]`.
pub(crate) fn bits_less(a: &[u8], b: &[u8]) -> bool {
    a < b
}

fn elapsed_ms(start: std::time::Instant) -> u64 {
    u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{qubo_to_ising, QuboModel};

    fn single_edge() -> QuboModel {
        let mut q = QuboModel::new(2);
        q.add_linear(0, -1.0);
        q.add_linear(1, -1.0);
        q.add_quadratic(0, 1, 2.0);
        q
    }

    #[test]
    fn check_input_by_model_type() {
        let mut data = ProblemData::new();
        assert!(SolverKind::ALL.iter().all(|k| !check_input(*k, &data)));
        data.insert("qubo", Value::Qubo(single_edge()));
        assert!(check_input(SolverKind::Tabu, &data));
        assert!(check_input(SolverKind::BruteForce, &data));
        assert!(!check_input(SolverKind::Qaoa, &data));
        data.insert("ising", Value::Ising(qubo_to_ising(&single_edge())));
        assert!(check_input(SolverKind::Vqe, &data));
        data.insert("qubo", Value::Int(1));
        assert!(!check_input(SolverKind::Tabu, &data));
    }

    #[test]
    fn spec_solves_from_problem_data() {
        let mut data = ProblemData::new();
        let spec = SolverSpec::BruteForce { max_vars: 22 };
        assert_eq!(spec.solve(&data, 0).unwrap_err(), SolverError::MissingInput("qubo"));
        data.insert("qubo", Value::Qubo(single_edge()));
        let r = spec.solve(&data, 0).unwrap();
        assert_eq!((r.best_bits, r.best_energy), (vec![0, 1], -1.0));
        assert_eq!(SolverSpec::Tabu(None).solve(&data, 3).unwrap().best_energy, -1.0);
        assert_eq!(spec.kind().to_string(), "brute force");
        assert_eq!("qaoa".parse::<SolverKind>().unwrap(), SolverKind::Qaoa);
    }
}
