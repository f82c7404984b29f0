use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{elapsed_ms, SolverError, SolverResult, SolverStats};
use crate::encodings::QuboModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabuOptions {
    pub restarts: usize,
    pub iters_per_restart: usize,
    pub tenure: usize,
}

impl TabuOptions {
    /// Restarts 10, `500·n` iterations, tenure `max(7, n/10)`.
    pub fn defaults_for(num_vars: usize) -> Self {
        Self {
            restarts: 10,
            iters_per_restart: 500 * num_vars,
            tenure: 7.max(num_vars / 10),
        }
    }
}

struct Run {
    bits: Vec<u8>,
    energy: f64,
}

fn single_restart(qubo: &QuboModel, w: &[Vec<f64>], opts: &TabuOptions, seed: u64) -> Result<Run, SolverError> {
    let n = qubo.num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut energy = qubo.energy(&x)?;
    // field[i] = Σ_{j≠i} W_ij x_j
    let mut field: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && x[j] != 0).map(|j| w[i][j]).sum())
        .collect();
    let delta = |i: usize, x: &[u8], field: &[f64]| {
        let sign = if x[i] == 0 { 1.0 } else { -1.0 };
        sign * (w[i][i] + field[i])
    };
    let mut best_bits = x.clone();
    let mut best = energy;
    let mut tabu_until = vec![0usize; n];

    for it in 1..=opts.iters_per_restart {
        if n == 0 {
            break;
        }
        let mut allowed: Option<(usize, f64)> = None;
        let mut any: Option<(usize, f64)> = None;
        for i in 0..n {
            let d = delta(i, &x, &field);
            if any.map_or(true, |(_, bd)| d < bd) {
                any = Some((i, d));
            }
            let aspirates = energy + d < best;
            if (tabu_until[i] < it || aspirates) && allowed.map_or(true, |(_, bd)| d < bd) {
                allowed = Some((i, d));
            }
        }
        let (k, d) = allowed.or(any).expect("n > 0");
        let sign = if x[k] == 0 { 1.0 } else { -1.0 };
        x[k] ^= 1;
        energy += d;
        for (i, f) in field.iter_mut().enumerate() {
            if i != k {
                *f += sign * w[i][k];
            }
        }
        tabu_until[k] = it + opts.tenure;
        if energy < best {
            best = energy;
            best_bits.clone_from(&x);
        }
    }
    Ok(Run {
        energy: qubo.energy(&best_bits)?,
        bits: best_bits,
    })
}

/// Multistart single-bit-flip tabu search. Restart `i` starts from a random
/// assignment seeded with `seed + i`; the best restart wins, earlier index on
/// ties.
pub fn tabu_search(qubo: &QuboModel, opts: TabuOptions, seed: u64) -> Result<SolverResult, SolverError> {
    let start = Instant::now();
    if opts.restarts == 0 || opts.tenure == 0 {
        return Err(SolverError::InvalidParameter("restarts and tenure must be at least 1".into()));
    }
    let w = qubo.symmetric();
    let runs = (0..opts.restarts)
        .into_par_iter()
        .map(|i| single_restart(qubo, &w, &opts, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let best = runs
        .into_iter()
        .reduce(|a, b| if (b.energy, &b.bits) < (a.energy, &a.bits) { b } else { a })
        .expect("at least one restart");
    Ok(SolverResult {
        best_bits: best.bits,
        best_energy: best.energy,
        counts: None,
        best_circuit: None,
        history: Vec::new(),
        stats: SolverStats {
            iterations: opts.restarts * opts.iters_per_restart,
            circuit_evaluations: 0,
            wall_time_ms: elapsed_ms(start),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{MaxCutInstance, OptimizationProblem};
    use crate::solvers::brute_force;

    #[test]
    fn no_moves_returns_random_start() {
        let g = MaxCutInstance::random(10, 1).unwrap();
        let (q, _) = g.formulate_problem("direct").unwrap();
        let opts = TabuOptions {
            restarts: 1,
            iters_per_restart: 0,
            tenure: 7,
        };
        let r = tabu_search(&q, opts, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let start: Vec<u8> = (0..10).map(|_| rng.gen_range(0..=1u8)).collect();
        assert_eq!(r.best_bits, start);
        assert_eq!(r.best_energy, q.energy(&start).unwrap());
    }

    #[test]
    fn deterministic_and_optimal_on_small_graph() {
        let g = MaxCutInstance::random(12, 3).unwrap();
        let (q, _) = g.formulate_problem("direct").unwrap();
        let opts = TabuOptions::defaults_for(12);
        let a = tabu_search(&q, opts, 0).unwrap();
        let mut b = tabu_search(&q, opts, 0).unwrap();
        b.stats.wall_time_ms = a.stats.wall_time_ms;
        assert_eq!(a, b);
        assert_eq!(a.best_energy, brute_force(&q, 22).unwrap().best_energy);
    }

    #[test]
    fn defaults_follow_size() {
        assert_eq!(
            TabuOptions::defaults_for(100),
            TabuOptions {
                restarts: 10,
                iters_per_restart: 50_000,
                tenure: 10
            }
        );
        assert_eq!(TabuOptions::defaults_for(14).tenure, 7);
    }
}
