//! Problem classes: random generation, JSON records, objective evaluation and
//! the two routes into a QUBO (direct formulation or a [`DiscreteProblem`]).

mod discrete;
mod maxcut;
mod tsp;

pub use discrete::{DiscreteError, DiscreteProblem, DiscreteVariable, ExactlyOne, Indicator, Term};
pub use maxcut::{Edge, MaxCutInstance};
pub use tsp::TspInstance;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::encodings::{DecodeError, DecodingMap, EncodingError, QuboModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unknown problem class `{0}`")]
    UnknownClass(String),
    #[error("problem size {size} below minimum {min}")]
    SizeTooSmall { size: usize, min: usize },
    #[error("invalid solution shape: {0}")]
    InvalidSolutionShape(String),
    #[error("encoding `{0}` is not supported by this problem class")]
    UnsupportedEncoding(String),
    #[error(transparent)]
    Undecodable(#[from] DecodeError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemClass {
    Tsp,
    #[serde(rename = "maxcut")]
    MaxCut,
}

impl ProblemClass {
    pub const ALL: [ProblemClass; 2] = [ProblemClass::Tsp, ProblemClass::MaxCut];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemClass::Tsp => "tsp",
            ProblemClass::MaxCut => "maxcut",
        }
    }

    pub fn min_size(self) -> usize {
        match self {
            ProblemClass::Tsp => 3,
            ProblemClass::MaxCut => 2,
        }
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemClass {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemClass::Tsp),
            "maxcut" => Ok(ProblemClass::MaxCut),
            other => Err(ProblemError::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Application-level answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solution {
    /// City permutation, starting at city 0 when produced by a decoder.
    Tour(Vec<usize>),
    /// One bit per node; nodes with equal bits are on the same side.
    Partition(Vec<u8>),
}

/// The problem-class contract shared by every supported class.
pub trait OptimizationProblem {
    fn class(&self) -> ProblemClass;

    /// Canonical JSON record; `from_record` inverts it.
    fn to_record(&self) -> Json;

    /// Application objective (tour length, cut weight).
    fn evaluate_objective(&self, solution: &Solution) -> Result<f64, ProblemError>;

    fn sense(&self) -> Sense;

    /// Encodings accepted by [`OptimizationProblem::formulate_problem`].
    fn direct_encodings(&self) -> &'static [&'static str];

    fn formulate_problem(&self, encoding: &str) -> Result<(QuboModel, DecodingMap), ProblemError>;

    fn to_discrete_problem(&self) -> DiscreteProblem;

    /// Maps a (feasible) discrete assignment back to a solution.
    fn solution_from_assignment(&self, assignment: &[usize]) -> Result<Solution, ProblemError>;

    /// Penalty weight recommended for exactly-one constraints.
    fn recommended_penalty(&self) -> f64;

    /// Free-form metadata carried alongside the instance.
    fn metadata(&self) -> &Map<String, Json>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    Tsp(TspInstance),
    MaxCut(MaxCutInstance),
}

impl ProblemInstance {
    fn inner(&self) -> &dyn OptimizationProblem {
        match self {
            ProblemInstance::Tsp(p) => p,
            ProblemInstance::MaxCut(p) => p,
        }
    }

    pub fn create_random(class: ProblemClass, size: usize, seed: u64) -> Result<Self, ProblemError> {
        match class {
            ProblemClass::Tsp => TspInstance::random(size, seed).map(ProblemInstance::Tsp),
            ProblemClass::MaxCut => MaxCutInstance::random(size, seed).map(ProblemInstance::MaxCut),
        }
    }

    /// Reads an instance record, dispatching on its `problem_class` field.
    pub fn from_record(record: &Json) -> Result<Self, ProblemError> {
        let class = record
            .get("problem_class")
            .ok_or_else(|| ProblemError::MissingField("problem_class".into()))?
            .as_str()
            .ok_or_else(|| ProblemError::InvalidValue("problem_class must be a string".into()))?
            .parse::<ProblemClass>()?;
        Self::from_record_as(class, record)
    }

    pub fn from_record_as(class: ProblemClass, record: &Json) -> Result<Self, ProblemError> {
        let map = record
            .as_object()
            .ok_or_else(|| ProblemError::InvalidValue("instance record must be a JSON object".into()))?;
        match class {
            ProblemClass::Tsp => TspInstance::from_record(map).map(ProblemInstance::Tsp),
            ProblemClass::MaxCut => MaxCutInstance::from_record(map).map(ProblemInstance::MaxCut),
        }
    }

    /// Decodes solver bits through the map produced by an encoder.
    pub fn decode_solution(&self, bits: &[u8], map: &DecodingMap) -> Result<(Solution, bool), ProblemError> {
        let decoded = map.decode(bits)?;
        Ok((self.solution_from_assignment(&decoded.assignment)?, decoded.repaired))
    }

    /// Number of nodes or cities.
    pub fn size(&self) -> usize {
        match self {
            ProblemInstance::Tsp(p) => p.num_cities(),
            ProblemInstance::MaxCut(p) => p.num_nodes(),
        }
    }
}

impl OptimizationProblem for ProblemInstance {
    fn class(&self) -> ProblemClass {
        self.inner().class()
    }
    fn to_record(&self) -> Json {
        self.inner().to_record()
    }
    fn evaluate_objective(&self, solution: &Solution) -> Result<f64, ProblemError> {
        self.inner().evaluate_objective(solution)
    }
    fn sense(&self) -> Sense {
        self.inner().sense()
    }
    fn direct_encodings(&self) -> &'static [&'static str] {
        self.inner().direct_encodings()
    }
    fn formulate_problem(&self, encoding: &str) -> Result<(QuboModel, DecodingMap), ProblemError> {
        self.inner().formulate_problem(encoding)
    }
    fn to_discrete_problem(&self) -> DiscreteProblem {
        self.inner().to_discrete_problem()
    }
    fn solution_from_assignment(&self, assignment: &[usize]) -> Result<Solution, ProblemError> {
        self.inner().solution_from_assignment(assignment)
    }
    fn recommended_penalty(&self) -> f64 {
        self.inner().recommended_penalty()
    }
    fn metadata(&self) -> &Map<String, Json> {
        self.inner().metadata()
    }
}

/// Serializes a record with sorted keys and shortest round-trip floats.
pub fn canonical_json(record: &Json) -> String {
    // serde_json's default map is ordered by key, so re-parsing sorts.
    let sorted: Json = serde_json::from_str(&record.to_string()).expect("valid JSON re-parses");
    serde_json::to_string_pretty(&sorted).expect("JSON values serialize")
}

pub(crate) fn json_number(v: &Json, what: &str) -> Result<f64, ProblemError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ProblemError::InvalidValue(format!("{what} must be a finite number")))
}

pub(crate) fn json_f64_matrix(v: &Json, what: &str) -> Result<Vec<Vec<f64>>, ProblemError> {
    let rows = v
        .as_array()
        .ok_or_else(|| ProblemError::ShapeMismatch(format!("{what} must be a list of rows")))?;
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| ProblemError::ShapeMismatch(format!("{what} rows must be lists")))?
                .iter()
                .map(|x| json_number(x, what))
                .collect()
        })
        .collect()
}

/// Keys of `map` not in `known`, kept so they survive a record round trip.
pub(crate) fn extra_fields(map: &Map<String, Json>, known: &[&str]) -> Map<String, Json> {
    map.iter()
        .filter(|(k, _)| !known.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}
