//! QUBO and Ising models, encoders from [`DiscreteProblem`] and the
//! decoding maps that let the backward pass undo an encoding.
//!
//! [`DiscreteProblem`]: crate::problems::DiscreteProblem

mod binary;
mod ising;
mod one_hot;
mod qubo;

pub use binary::binary_encode;
pub use ising::{bits_to_spins, qubo_to_ising, spins_to_bits, IsingModel};
pub use one_hot::one_hot_encode;
pub use qubo::QuboModel;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodingError {
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("spins must be +1 or -1")]
    InvalidSpin,
    #[error("invalid coupling between {0} and {1}")]
    InvalidCoupling(usize, usize),
    #[error("penalty must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("binary encoding cannot express constraints spanning several variables")]
    UnsupportedConstraints,
    #[error("objective expands to degree {0} in the encoded bits, at most 2 supported")]
    DegreeOverflow(usize),
    #[error(transparent)]
    Discrete(#[from] crate::problems::DiscreteError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("bitstring has {got} bits, encoding uses {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("undecodable state: {0}")]
    UndecodableState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    Direct,
    OneHot,
    Binary,
}

/// Bits `start..start + width` encode one discrete variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRange {
    pub variable: String,
    pub start: usize,
    pub width: usize,
    pub domain_size: usize,
}

/// A variable eliminated before encoding, such as the pinned start city.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedAssignment {
    pub variable: String,
    pub value: usize,
}

/// A named constant folded into the model offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetContribution {
    pub label: String,
    pub value: f64,
}

impl OffsetContribution {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
        }
    }
}

/// How encoded bits map back to discrete variable values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingMap {
    pub scheme: EncodingScheme,
    pub ranges: Vec<BitRange>,
    pub fixed: Vec<FixedAssignment>,
    pub offset_contributions: Vec<OffsetContribution>,
    /// Decoded values must be pairwise distinct (all-different constraints).
    pub distinct_values: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub assignment: Vec<usize>,
    /// Set when a broken one-hot block had to be repaired.
    pub repaired: bool,
}

impl DecodingMap {
    pub fn num_bits(&self) -> usize {
        self.ranges.iter().map(|r| r.width).sum()
    }

    pub fn total_offset(&self) -> f64 {
        self.offset_contributions.iter().map(|c| c.value).sum()
    }

    /// Decodes bits into variable values.
    ///
    /// One-hot repair: a block with set bits keeps its lowest set bit whose
    /// value is still available; a block with none (or only taken values)
    /// gets the lowest available value. Binary codes beyond the domain clamp
    /// to its last value.
    pub fn decode(&self, bits: &[u8]) -> Result<Decoded, DecodeError> {
        let expected = self.num_bits();
        if bits.len() != expected {
            return Err(DecodeError::WidthMismatch {
                expected,
                got: bits.len(),
            });
        }
        let mut repaired = false;
        let max_domain = self.ranges.iter().map(|r| r.domain_size).max().unwrap_or(0);
        let mut used = vec![false; max_domain];
        let mut assignment: Vec<Option<usize>> = Vec::with_capacity(self.ranges.len());
        // First pass: blocks with set bits claim values.
        for range in &self.ranges {
            let block = &bits[range.start..range.start + range.width];
            let value = match self.scheme {
                EncodingScheme::Direct => Some(usize::from(block[0] != 0)),
                EncodingScheme::Binary => {
                    let code = block
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b != 0)
                        .fold(0usize, |acc, (j, _)| acc | (1 << j));
                    Some(code.min(range.domain_size - 1))
                }
                EncodingScheme::OneHot => {
                    let set: Vec<usize> = (0..range.width).filter(|&k| block[k] != 0).collect();
                    let pick = set.iter().copied().find(|&v| !self.distinct_values || !used[v]);
                    if set.len() != 1 || pick != set.first().copied() {
                        repaired = true;
                    }
                    pick
                }
            };
            if let (Some(v), true) = (value, self.distinct_values) {
                used[v] = true;
            }
            assignment.push(value);
        }
        // Second pass: unresolved blocks take the lowest available value.
        let assignment = assignment
            .into_iter()
            .zip(&self.ranges)
            .map(|(value, range)| match value {
                Some(v) => Ok(v),
                None => {
                    let v = (0..range.domain_size)
                        .find(|&v| !self.distinct_values || !used[v])
                        .ok_or_else(|| {
                            DecodeError::UndecodableState(format!("no value left for {}", range.variable))
                        })?;
                    if self.distinct_values {
                        used[v] = true;
                    }
                    Ok(v)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Decoded { assignment, repaired })
    }
}
