use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{elapsed_ms, HistoryEntry, OptimizerSpec, SolverError, SolverResult, SolverStats, DEFAULT_SHOTS};
use crate::circuits::{build_qaoa_circuit, expectation_diagonal, sample, simulate, Circuit, CircuitError, Statevector};
use crate::encodings::IsingModel;

const TOP_STATES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariationalOptions {
    pub shots: usize,
    pub max_qubits: usize,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            max_qubits: 16,
        }
    }
}

fn index_bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> q) & 1) as u8).collect()
}

/// Among the 16 most probable basis states, the one with the lowest Ising
/// energy; ties go to the lowest bitstring. Returns its bits and energy.
pub fn best_basis_state(state: &Statevector, ising: &IsingModel) -> (Vec<u8>, f64) {
    let n = state.num_qubits();
    let probs = state.probabilities();
    let mut order: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > 0.0).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order.truncate(TOP_STATES);
    order
        .into_iter()
        .map(|k| (index_bits(k, n), ising.basis_energy(k)))
        .reduce(|best, cand| {
            if cand.1 < best.1 || (cand.1 == best.1 && cand.0 < best.0) {
                cand
            } else {
                best
            }
        })
        .unwrap_or_else(|| (vec![0; n], ising.basis_energy(0)))
}

fn optimize_circuit(
    circuit: &Circuit,
    ising: &IsingModel,
    optimizer: &OptimizerSpec,
    x0: Vec<f64>,
    seed: u64,
    opts: &VariationalOptions,
) -> Result<SolverResult, SolverError> {
    let start = Instant::now();
    if circuit.num_qubits() != ising.num_spins() {
        return Err(CircuitError::SizeMismatch {
            circuit: circuit.num_qubits(),
            model: ising.num_spins(),
        }
        .into());
    }
    let diagonal = ising.diagonal();
    let run = |theta: &[f64]| -> Result<Statevector, CircuitError> {
        simulate(circuit, &circuit.bind(theta)?, opts.max_qubits)
    };
    run(&x0)?;
    let outcome = optimizer.minimize(
        |theta| run(theta).map_or(f64::INFINITY, |s| expectation_diagonal(&s, &diagonal)),
        &x0,
        seed,
    );
    let bindings = circuit.bind(&outcome.x)?;
    let state = simulate(circuit, &bindings, opts.max_qubits)?;
    let (best_bits, _) = best_basis_state(&state, ising);
    let best_energy = ising.energy(&crate::encodings::bits_to_spins(&best_bits))?;
    let history: Vec<HistoryEntry> = outcome
        .evaluations
        .into_iter()
        .enumerate()
        .map(|(iteration, (parameters, energy))| HistoryEntry {
            iteration,
            parameters,
            energy,
        })
        .collect();
    Ok(SolverResult {
        best_bits,
        best_energy,
        counts: (opts.shots > 0).then(|| sample(&state, opts.shots, seed)),
        best_circuit: Some(circuit.assign(&bindings)?),
        stats: SolverStats {
            iterations: outcome.iterations,
            circuit_evaluations: history.len(),
            wall_time_ms: elapsed_ms(start),
        },
        history,
    })
}

/// Minimizes `⟨ψ(θ)|H|ψ(θ)⟩` over the ansatz parameters, starting from
/// `θ ~ U[−0.1, 0.1]`.
pub fn vqe(
    ising: &IsingModel,
    ansatz: &Circuit,
    optimizer: &OptimizerSpec,
    seed: u64,
    opts: &VariationalOptions,
) -> Result<SolverResult, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = (0..ansatz.num_parameters()).map(|_| rng.gen_range(-0.1..=0.1)).collect();
    optimize_circuit(ansatz, ising, optimizer, x0, seed, opts)
}

/// QAOA with `p` layers of the given mixer, starting from angles `~ U[0, 0.1]`.
pub fn qaoa(
    ising: &IsingModel,
    mixer: &Circuit,
    p: usize,
    optimizer: &OptimizerSpec,
    seed: u64,
    opts: &VariationalOptions,
) -> Result<SolverResult, SolverError> {
    let circuit = build_qaoa_circuit(ising, mixer, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = (0..circuit.num_parameters()).map(|_| rng.gen_range(0.0..=0.1)).collect();
    optimize_circuit(&circuit, ising, optimizer, x0, seed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_ansatz, build_mixer, Entangler, MixerTemplate};
    use crate::encodings::qubo_to_ising;
    use crate::problems::{MaxCutInstance, OptimizationProblem};
    use crate::solvers::{brute_force, NelderMeadOptions};

    fn nm() -> OptimizerSpec {
        OptimizerSpec::NelderMead(NelderMeadOptions::default())
    }

    fn ising_of(g: &MaxCutInstance) -> IsingModel {
        qubo_to_ising(&g.formulate_problem("direct").unwrap().0)
    }

    #[test]
    fn qaoa_single_edge_reaches_optimum() {
        let ising = ising_of(&MaxCutInstance::new(2, [(0, 1, 1.0)]).unwrap());
        let mixer = build_mixer(MixerTemplate::X, 2).unwrap();
        let r = qaoa(&ising, &mixer, 1, &nm(), 0, &VariationalOptions::default()).unwrap();
        assert!((r.best_energy + 1.0).abs() < 1e-12);
        assert_eq!(r.history[0].parameters.len(), 2);
        assert_eq!(r.stats.circuit_evaluations, r.history.len());
        let curve = r.incumbent_curve();
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.counts.as_ref().unwrap().values().sum::<usize>(), DEFAULT_SHOTS);
    }

    #[test]
    fn vqe_ring_finds_maximum_cut() {
        let g = MaxCutInstance::ring(4).unwrap();
        let ising = ising_of(&g);
        let ansatz = build_ansatz(4, 1, Entangler::Cz).unwrap();
        let r = vqe(&ising, &ansatz, &nm(), 0, &VariationalOptions::default()).unwrap();
        assert_eq!(g.cut_value(&r.best_bits).unwrap(), 4.0);
        let opt = brute_force(&g.formulate_problem("direct").unwrap().0, 22).unwrap();
        assert!(r.best_energy >= opt.best_energy - 1e-9);
    }

    #[test]
    fn zero_model_and_size_mismatch() {
        let zero = IsingModel::new(vec![0.0; 2], 0.0);
        let ansatz = build_ansatz(2, 1, Entangler::Cz).unwrap();
        let r = vqe(&zero, &ansatz, &nm(), 0, &VariationalOptions::default()).unwrap();
        assert_eq!(r.best_energy, 0.0);
        let wide = build_ansatz(3, 1, Entangler::Cz).unwrap();
        assert_eq!(
            vqe(&zero, &wide, &nm(), 0, &VariationalOptions::default()).unwrap_err(),
            SolverError::Circuit(CircuitError::SizeMismatch { circuit: 3, model: 2 })
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let ising = ising_of(&MaxCutInstance::random(4, 2).unwrap());
        let mixer = build_mixer(MixerTemplate::X, 4).unwrap();
        let mut a = qaoa(&ising, &mixer, 1, &nm(), 7, &VariationalOptions::default()).unwrap();
        let b = qaoa(&ising, &mixer, 1, &nm(), 7, &VariationalOptions::default()).unwrap();
        a.stats.wall_time_ms = b.stats.wall_time_ms;
        assert_eq!(a, b);
    }
}
