use std::fmt;

use indexmap::IndexMap;
use serde_json::{json, Value as Json};

use crate::circuits::Circuit;
use crate::encodings::{DecodingMap, IsingModel, QuboModel};
use crate::problems::{DiscreteProblem, OptimizationProblem, ProblemInstance};
use crate::solvers::{OptimizerSpec, SolverSpec};

/// Runtime objects that are carried through a run but not serialized.
#[derive(Debug, Clone, PartialEq)]
pub enum Handle {
    Circuit(Circuit),
    Optimizer(OptimizerSpec),
    Solver(SolverSpec),
}

impl Handle {
    /// One-line description used in place of the object in debug output.
    pub fn summary(&self) -> String {
        match self {
            Handle::Circuit(c) => c.summary(),
            Handle::Optimizer(o) => format!("optimizer({})", o.name()),
            Handle::Solver(s) => format!("solver({})", s.kind().name()),
        }
    }
}

/// A problem-data entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    Map(IndexMap<String, Value>),
    Matrix(Vec<Vec<f64>>),
    Bits(Vec<u8>),
    Instance(ProblemInstance),
    Discrete(DiscreteProblem),
    Qubo(QuboModel),
    Ising(IsingModel),
    Decoding(DecodingMap),
    Handle(Handle),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Integers widen to reals.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Real(_) => "float",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Map(_) => "map",
            Value::Matrix(_) => "matrix",
            Value::Bits(_) => "bits",
            Value::Instance(_) => "problem instance",
            Value::Discrete(_) => "discrete problem",
            Value::Qubo(_) => "qubo",
            Value::Ising(_) => "ising",
            Value::Decoding(_) => "decoding map",
            Value::Handle(_) => "handle",
        }
    }

    /// JSON form; handles become `{"__opaque__": "<summary>"}`.
    pub fn to_json(&self) -> Json {
        let ser = |v: Result<Json, serde_json::Error>| v.expect("model types serialize");
        match self {
            Value::Int(i) => json!(i),
            Value::Real(r) => json!(r),
            Value::Bool(b) => json!(b),
            Value::Str(s) => json!(s),
            Value::List(items) => Json::Array(items.iter().map(Value::to_json).collect()),
            Value::Map(m) => Json::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
            Value::Matrix(m) => json!(m),
            Value::Bits(b) => json!(b),
            Value::Instance(p) => p.to_record(),
            Value::Discrete(d) => ser(serde_json::to_value(d)),
            Value::Qubo(q) => ser(serde_json::to_value(q)),
            Value::Ising(i) => ser(serde_json::to_value(i)),
            Value::Decoding(d) => ser(serde_json::to_value(d)),
            Value::Handle(h) => json!({ "__opaque__": h.summary() }),
        }
    }
}

/// Short text used for prompts and recorded answers.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(items) => {
                let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", parts.join(","))
            }
            Value::Handle(h) => f.write_str(&h.summary()),
            other => write!(f, "{}", other.to_json()),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}
