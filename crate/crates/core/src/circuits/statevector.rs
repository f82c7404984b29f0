use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Circuit, CircuitError, GateKind};
use crate::encodings::IsingModel;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense state over `2^n` basis states, little-endian in qubit order.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Option<Self> {
        let n = amplitudes.len();
        (n.is_power_of_two()).then(|| Self {
            num_qubits: n.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Applies a 2×2 matrix `[[a, b], [c, d]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = 1 << q;
        for i in (0..self.amplitudes.len()).filter(|i| i & mask == 0) {
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i | mask] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn apply(&mut self, kind: GateKind, qubits: &[usize], angle: f64) {
        let c = |x: f64| Complex64::new(x, 0.0);
        let (cos, sin) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        match kind {
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2);
                self.apply_single(qubits[0], [[h, h], [h, -h]]);
            }
            GateKind::X => self.apply_single(qubits[0], [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]),
            GateKind::Rx => self.apply_single(qubits[0], [[c(cos), -I * sin], [-I * sin, c(cos)]]),
            GateKind::Ry => self.apply_single(qubits[0], [[c(cos), c(-sin)], [c(sin), c(cos)]]),
            GateKind::Rz => {
                let phase = Complex64::from_polar(1.0, angle / 2.0);
                self.apply_single(qubits[0], [[phase.conj(), c(0.0)], [c(0.0), phase]]);
            }
            GateKind::Rzz => {
                let phase = Complex64::from_polar(1.0, angle / 2.0);
                let (ma, mb) = (1 << qubits[0], 1 << qubits[1]);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    let parity_differs = ((i & ma) != 0) != ((i & mb) != 0);
                    *a *= if parity_differs { phase } else { phase.conj() };
                }
            }
            GateKind::RxxPlusRyy => {
                // exp(-iβ(XX+YY)/2) mixes |01⟩ and |10⟩ only.
                let (cb, sb) = (angle.cos(), angle.sin());
                let (ma, mb) = (1 << qubits[0], 1 << qubits[1]);
                for i in (0..self.amplitudes.len()).filter(|i| i & ma != 0 && i & mb == 0) {
                    let j = (i & !ma) | mb;
                    let (ai, aj) = (self.amplitudes[i], self.amplitudes[j]);
                    self.amplitudes[i] = cb * ai - I * sb * aj;
                    self.amplitudes[j] = cb * aj - I * sb * ai;
                }
            }
            GateKind::Cx => {
                let (mc, mt) = (1 << qubits[0], 1 << qubits[1]);
                for i in (0..self.amplitudes.len()).filter(|i| i & mc != 0 && i & mt == 0) {
                    self.amplitudes.swap(i, i | mt);
                }
            }
            GateKind::Cz => {
                let both = (1 << qubits[0]) | (1 << qubits[1]);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
        }
    }
}

/// Runs `circuit` from `|0…0⟩` with every symbol bound.
pub fn simulate(
    circuit: &Circuit,
    bindings: &BTreeMap<String, f64>,
    max_qubits: usize,
) -> Result<Statevector, CircuitError> {
    if circuit.num_qubits() > max_qubits {
        return Err(CircuitError::TooManyQubits {
            num_qubits: circuit.num_qubits(),
            limit: max_qubits,
        });
    }
    let angles = circuit
        .gates()
        .iter()
        .map(|g| g.angle.as_ref().map_or(Ok(0.0), |a| a.evaluate(bindings)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut state = Statevector::zero(circuit.num_qubits());
    for (g, angle) in circuit.gates().iter().zip(angles) {
        state.apply(g.kind, &g.qubits, angle);
    }
    Ok(state)
}

/// `⟨ψ|H|ψ⟩` for a diagonal Hamiltonian given by its basis energies.
pub fn expectation_diagonal(state: &Statevector, diagonal: &[f64]) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(diagonal)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum()
}

pub fn expectation(state: &Statevector, ising: &IsingModel) -> Result<f64, CircuitError> {
    if state.num_qubits() != ising.num_spins() {
        return Err(CircuitError::SizeMismatch {
            circuit: state.num_qubits(),
            model: ising.num_spins(),
        });
    }
    Ok(expectation_diagonal(state, &ising.diagonal()))
}

/// Renders basis index `k` as a bitstring listing qubit 0 first.
pub fn bitstring(k: usize, num_qubits: usize) -> String {
    (0..num_qubits).map(|q| if (k >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Seeded multinomial draw of `shots` measurements in the computational basis.
pub fn sample(state: &Statevector, shots: usize, seed: u64) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    let Ok(dist) = WeightedIndex::new(state.probabilities()) else {
        return counts;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![0usize; state.amplitudes.len()];
    for _ in 0..shots {
        tally[dist.sample(&mut rng)] += 1;
    }
    for (k, &c) in tally.iter().enumerate().filter(|(_, &c)| c > 0) {
        counts.insert(bitstring(k, state.num_qubits), c);
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{AngleExpr, Gate};
    use rand::Rng;

    fn run(n: usize, gates: Vec<Gate>) -> Statevector {
        simulate(&Circuit::new(n, gates).unwrap(), &BTreeMap::new(), 16).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn empty_and_hadamard() {
        let s = run(1, vec![]);
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let s = run(1, vec![Gate::fixed(GateKind::H, &[0]).unwrap()]);
        assert!(s.amplitudes().iter().all(|a| close(*a, Complex64::new(FRAC_1_SQRT_2, 0.0))));
    }

    #[test]
    fn little_endian_convention() {
        // x on qubit 1 of 2 → basis index 2, rendered "01".
        let s = run(2, vec![Gate::fixed(GateKind::X, &[1]).unwrap()]);
        assert_eq!(s.probabilities(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(bitstring(2, 2), "01");
        assert_eq!(sample(&s, 10, 0), BTreeMap::from([("01".to_string(), 10)]));
    }

    #[test]
    fn cx_and_cz_semantics() {
        let s = run(
            2,
            vec![Gate::fixed(GateKind::X, &[0]).unwrap(), Gate::fixed(GateKind::Cx, &[0, 1]).unwrap()],
        );
        assert_eq!(s.probabilities(), vec![0.0, 0.0, 0.0, 1.0]);
        let s = run(
            2,
            vec![
                Gate::fixed(GateKind::X, &[0]).unwrap(),
                Gate::fixed(GateKind::X, &[1]).unwrap(),
                Gate::fixed(GateKind::Cz, &[0, 1]).unwrap(),
            ],
        );
        assert!(close(s.amplitudes()[3], Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn rxx_plus_ryy_swaps_excitation() {
        let angle = std::f64::consts::FRAC_PI_2;
        let gates = vec![
            Gate::fixed(GateKind::X, &[0]).unwrap(),
            Gate::rotation(GateKind::RxxPlusRyy, &[0, 1], AngleExpr::Literal(angle)).unwrap(),
        ];
        let s = run(2, gates);
        // |q0=1⟩ → −i|q1=1⟩ at β = π/2.
        assert!(close(s.amplitudes()[2], Complex64::new(0.0, -1.0)));
        // Leaves |00⟩ untouched.
        let s = run(
            2,
            vec![Gate::rotation(GateKind::RxxPlusRyy, &[0, 1], AngleExpr::Literal(0.7)).unwrap()],
        );
        assert!(close(s.amplitudes()[0], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rotations_match_matrix_definitions() {
        let t = 0.9;
        let s = run(1, vec![Gate::rotation(GateKind::Rx, &[0], AngleExpr::Literal(t)).unwrap()]);
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -(t / 2.0).sin())));
        let s = run(1, vec![Gate::rotation(GateKind::Ry, &[0], AngleExpr::Literal(t)).unwrap()]);
        assert!(close(s.amplitudes()[1], Complex64::new((t / 2.0).sin(), 0.0)));
        let s = run(1, vec![Gate::rotation(GateKind::Rz, &[0], AngleExpr::Literal(t)).unwrap()]);
        assert!(close(s.amplitudes()[0], Complex64::from_polar(1.0, -t / 2.0)));
        let s = run(2, vec![Gate::rotation(GateKind::Rzz, &[0, 1], AngleExpr::Literal(t)).unwrap()]);
        assert!(close(s.amplitudes()[0], Complex64::from_polar(1.0, -t / 2.0)));
    }

    #[test]
    fn norm_preserved_over_random_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kinds = [
            GateKind::H,
            GateKind::X,
            GateKind::Rx,
            GateKind::Ry,
            GateKind::Rz,
            GateKind::Rzz,
            GateKind::RxxPlusRyy,
            GateKind::Cx,
            GateKind::Cz,
        ];
        let mut state = Statevector::zero(5);
        for _ in 0..1000 {
            let kind = kinds[rng.gen_range(0..kinds.len())];
            let a = rng.gen_range(0..5);
            let b = (a + rng.gen_range(1..5)) % 5;
            let qubits = if kind.arity() == 1 { vec![a] } else { vec![a, b] };
            state.apply(kind, &qubits, rng.gen_range(-4.0..4.0));
            assert!((state.norm_sqr() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn expectation_examples() {
        let mut ising = IsingModel::new(vec![0.0, 0.0], -0.5);
        ising.add_coupling(0, 1, 0.5).unwrap();
        assert_eq!(expectation(&Statevector::zero(2), &ising).unwrap(), 0.0);
        let uniform = run(
            2,
            vec![Gate::fixed(GateKind::H, &[0]).unwrap(), Gate::fixed(GateKind::H, &[1]).unwrap()],
        );
        assert!((expectation(&uniform, &ising).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(expectation(&uniform, &IsingModel::new(vec![0.0; 2], 0.0)).unwrap(), 0.0);
        assert!(expectation(&uniform, &IsingModel::new(vec![0.0; 3], 0.0)).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_unbiased() {
        assert_eq!(sample(&Statevector::zero(1), 100, 0), BTreeMap::from([("0".to_string(), 100)]));
        let plus = run(1, vec![Gate::fixed(GateKind::H, &[0]).unwrap()]);
        let counts = sample(&plus, 100_000, 0);
        // Binomial(1e5, 1/2): σ = √(1e5/4) ≈ 158.1, so 5σ ≈ 790.
        let sigma = (100_000f64 * 0.25).sqrt();
        for k in ["0", "1"] {
            assert!((counts[k] as f64 - 50_000.0).abs() <= 5.0 * sigma);
        }
        assert_eq!(counts, sample(&plus, 100_000, 0));
    }

    #[test]
    fn limits_and_unbound_symbols() {
        let c = Circuit::new(
            2,
            vec![Gate::rotation(GateKind::Rx, &[0], AngleExpr::Symbol("t".into())).unwrap()],
        )
        .unwrap();
        assert_eq!(
            simulate(&c, &BTreeMap::new(), 16).unwrap_err(),
            CircuitError::UnboundParameter("t".into())
        );
        assert_eq!(
            simulate(&c, &BTreeMap::from([("t".into(), 0.1)]), 1).unwrap_err(),
            CircuitError::TooManyQubits { num_qubits: 2, limit: 1 }
        );
    }
}
