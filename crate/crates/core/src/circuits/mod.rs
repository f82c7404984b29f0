//! Parameterized circuits, circuit templates, the OpenQASM 3 mixer subset and
//! an exact statevector simulator.
//!
//! Basis convention: qubit `i` is bit `i` of a basis-state index (qubit 0 is
//! the least significant bit). Bitstrings rendered as text list qubit 0 first.

mod qasm;
mod statevector;
mod templates;

pub use qasm::{parse_qasm3_mixer, render_qasm3, QasmError};
pub use statevector::{expectation, expectation_diagonal, sample, simulate, Statevector};
pub use templates::{build_ansatz, build_mixer, build_qaoa_circuit, Entangler, MixerTemplate};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndexOutOfRange { index: usize, num_qubits: usize },
    #[error("gate {0} expects {1} qubit operand(s)")]
    Arity(GateKind, usize),
    #[error("gate {0} acts twice on the same qubit")]
    RepeatedQubit(GateKind),
    #[error("gate {0} requires an angle")]
    MissingAngle(GateKind),
    #[error("gate {0} takes no angle")]
    UnexpectedAngle(GateKind),
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("{got} parameter values for {expected} parameters")]
    ParameterCount { expected: usize, got: usize },
    #[error("circuit has {num_qubits} qubits, simulator limit is {limit}")]
    TooManyQubits { num_qubits: usize, limit: usize },
    #[error("template needs at least {min} qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("size mismatch: circuit acts on {circuit} qubits, model has {model} spins")]
    SizeMismatch { circuit: usize, model: usize },
    #[error("invalid template argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    X,
    Rx,
    Ry,
    Rz,
    Rzz,
    RxxPlusRyy,
    Cx,
    Cz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rzz | GateKind::RxxPlusRyy | GateKind::Cx | GateKind::Cz => 2,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz | GateKind::RxxPlusRyy
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Rzz => "rzz",
            GateKind::RxxPlusRyy => "rxx_plus_ryy",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle: a literal, a symbol, or a literal multiple of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleExpr {
    Literal(f64),
    Symbol(String),
    Scaled { factor: f64, symbol: String },
}

impl AngleExpr {
    pub fn scaled(factor: f64, symbol: impl Into<String>) -> Self {
        AngleExpr::Scaled {
            factor,
            symbol: symbol.into(),
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            AngleExpr::Literal(_) => None,
            AngleExpr::Symbol(s) | AngleExpr::Scaled { symbol: s, .. } => Some(s),
        }
    }

    pub fn evaluate(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, CircuitError> {
        let lookup = |s: &str| {
            bindings
                .get(s)
                .copied()
                .ok_or_else(|| CircuitError::UnboundParameter(s.to_string()))
        };
        match self {
            AngleExpr::Literal(v) => Ok(*v),
            AngleExpr::Symbol(s) => lookup(s),
            AngleExpr::Scaled { factor, symbol } => Ok(factor * lookup(symbol)?),
        }
    }

    fn renamed(&self, rename: &impl Fn(&str) -> String) -> Self {
        match self {
            AngleExpr::Literal(v) => AngleExpr::Literal(*v),
            AngleExpr::Symbol(s) => AngleExpr::Symbol(rename(s)),
            AngleExpr::Scaled { factor, symbol } => AngleExpr::Scaled {
                factor: *factor,
                symbol: rename(symbol),
            },
        }
    }
}

impl fmt::Display for AngleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleExpr::Literal(v) => write!(f, "{v}"),
            AngleExpr::Symbol(s) => f.write_str(s),
            AngleExpr::Scaled { factor, symbol } => write!(f, "{factor}*{symbol}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<AngleExpr>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<AngleExpr>) -> Result<Self, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity(kind, kind.arity()));
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::RepeatedQubit(kind));
        }
        match (kind.is_rotation(), &angle) {
            (true, None) => Err(CircuitError::MissingAngle(kind)),
            (false, Some(_)) => Err(CircuitError::UnexpectedAngle(kind)),
            _ => Ok(Self { kind, qubits, angle }),
        }
    }

    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Result<Self, CircuitError> {
        Self::new(kind, qubits.to_vec(), None)
    }

    pub fn rotation(kind: GateKind, qubits: &[usize], angle: AngleExpr) -> Result<Self, CircuitError> {
        Self::new(kind, qubits.to_vec(), Some(angle))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(a) = &self.angle {
            write!(f, "({a})")?;
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| format!("q[{q}]")).collect();
        write!(f, " {}", qs.join(", "))
    }
}

/// Gate sequence on `num_qubits` qubits. `parameters` lists the symbols in
/// order of first use, so every parameter appears in at least one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    parameters: Vec<String>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut parameters: Vec<String> = Vec::new();
        for g in &gates {
            if let Some(&index) = g.qubits.iter().find(|&&q| q >= num_qubits) {
                return Err(CircuitError::QubitIndexOutOfRange { index, num_qubits });
            }
            if let Some(s) = g.angle.as_ref().and_then(AngleExpr::symbol) {
                if !parameters.iter().any(|p| p == s) {
                    parameters.push(s.to_string());
                }
            }
        }
        Ok(Self {
            num_qubits,
            gates,
            parameters,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn num_parameters(&self) -> usize {
        self.parameters.len()
    }

    /// Pairs parameter names with values in `parameters()` order.
    pub fn bind(&self, values: &[f64]) -> Result<BTreeMap<String, f64>, CircuitError> {
        if values.len() != self.parameters.len() {
            return Err(CircuitError::ParameterCount {
                expected: self.parameters.len(),
                got: values.len(),
            });
        }
        Ok(self.parameters.iter().cloned().zip(values.iter().copied()).collect())
    }

    /// Replaces every symbol with its bound value.
    pub fn assign(&self, bindings: &BTreeMap<String, f64>) -> Result<Circuit, CircuitError> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(Gate {
                    angle: g.angle.as_ref().map(|a| a.evaluate(bindings).map(AngleExpr::Literal)).transpose()?,
                    ..g.clone()
                })
            })
            .collect::<Result<Vec<_>, CircuitError>>()?;
        Circuit::new(self.num_qubits, gates)
    }

    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| Gate {
                angle: g.angle.as_ref().map(|a| a.renamed(&rename)),
                ..g.clone()
            })
            .collect();
        Circuit::new(self.num_qubits, gates).expect("renaming keeps qubit indices")
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// One-line description, e.g. `circuit(4 qubits, 12 gates)`.
    pub fn summary(&self) -> String {
        format!("circuit({} qubits, {} gates)", self.num_qubits, self.gates.len())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for g in &self.gates {
            writeln!(f, "  {g}")?;
        }
        Ok(())
    }
}
