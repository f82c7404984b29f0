use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EncodingError, QuboModel};

/// Spin model `Σ hᵢzᵢ + Σ_{i<j} Jᵢⱼzᵢzⱼ + offset` over `z ∈ {−1, +1}ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsingRecord", into = "IsingRecord")]
pub struct IsingModel {
    h: Vec<f64>,
    j: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct IsingRecord {
    h: Vec<f64>,
    /// `[i, j, coupling]` triples with `i < j`.
    j: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl From<IsingModel> for IsingRecord {
    fn from(m: IsingModel) -> Self {
        Self {
            j: m.j.iter().map(|(&(a, b), &c)| (a, b, c)).collect(),
            h: m.h,
            offset: m.offset,
        }
    }
}

impl TryFrom<IsingRecord> for IsingModel {
    type Error = EncodingError;

    fn try_from(r: IsingRecord) -> Result<Self, Self::Error> {
        let mut m = IsingModel::new(r.h, r.offset);
        for (a, b, c) in r.j {
            m.add_coupling(a, b, c)?;
        }
        Ok(m)
    }
}

impl IsingModel {
    pub fn new(h: Vec<f64>, offset: f64) -> Self {
        Self {
            h,
            j: BTreeMap::new(),
            offset,
        }
    }

    pub fn add_coupling(&mut self, a: usize, b: usize, c: f64) -> Result<(), EncodingError> {
        let n = self.h.len();
        if a == b || a >= n || b >= n {
            return Err(EncodingError::InvalidCoupling(a, b));
        }
        *self.j.entry((a.min(b), a.max(b))).or_insert(0.0) += c;
        Ok(())
    }

    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.j.iter().map(|(&k, &v)| (k, v))
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.j.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn energy(&self, z: &[i8]) -> Result<f64, EncodingError> {
        if z.len() != self.h.len() {
            return Err(EncodingError::LengthMismatch {
                expected: self.h.len(),
                got: z.len(),
            });
        }
        if z.iter().any(|&s| s != 1 && s != -1) {
            return Err(EncodingError::InvalidSpin);
        }
        Ok(self.energy_unchecked(|i| f64::from(z[i])))
    }

    /// Energy of the computational basis state `index`: qubit `i` is bit `i`
    /// of the index, and bit value 1 means spin −1.
    pub fn basis_energy(&self, index: usize) -> f64 {
        self.energy_unchecked(|i| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 })
    }

    /// Energies of every basis state, indexed little-endian.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..1usize << self.h.len()).map(|k| self.basis_energy(k)).collect()
    }

    fn energy_unchecked(&self, spin: impl Fn(usize) -> f64) -> f64 {
        let linear: f64 = self.h.iter().enumerate().map(|(i, h)| h * spin(i)).sum();
        let quad: f64 = self.j.iter().map(|(&(a, b), c)| c * spin(a) * spin(b)).sum();
        self.offset + linear + quad
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.h.iter().all(|&h| h == 0.0) && self.j.values().all(|&c| c == 0.0)
    }
}

/// `x = (1 − z)/2`, so bit 1 ↔ spin −1.
pub fn bits_to_spins(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect()
}

pub fn spins_to_bits(spins: &[i8]) -> Vec<u8> {
    spins.iter().map(|&s| u8::from(s < 0)).collect()
}

/// Substitutes `xᵢ = (1 − zᵢ)/2`; energies are preserved exactly for every
/// assignment (up to floating point rounding).
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let n = q.num_vars();
    let mut h = vec![0.0; n];
    let mut offset = q.offset();
    let mut couplings = Vec::new();
    for i in 0..n {
        let c = q.coefficient(i, i);
        if c != 0.0 {
            offset += c / 2.0;
            h[i] -= c / 2.0;
        }
        for j in i + 1..n {
            let c = q.coefficient(i, j);
            if c != 0.0 {
                offset += c / 4.0;
                h[i] -= c / 4.0;
                h[j] -= c / 4.0;
                couplings.push((i, j, c / 4.0));
            }
        }
    }
    let mut m = IsingModel::new(h, offset);
    for (a, b, c) in couplings {
        m.add_coupling(a, b, c).expect("indices come from a valid QUBO");
    }
    m
}
