use std::time::Instant;

use super::{bits_less, elapsed_ms, SolverError, SolverResult, SolverStats};
use crate::encodings::QuboModel;

/// Exhaustive minimum over all `2ⁿ` assignments, walked in Gray-code order
/// with `O(n)` energy updates. Near-optimal candidates are re-evaluated
/// exactly; ties go to the lowest bitstring.
pub fn brute_force(qubo: &QuboModel, max_vars: usize) -> Result<SolverResult, SolverError> {
    let start = Instant::now();
    let n = qubo.num_vars();
    if n > max_vars {
        return Err(SolverError::TooManyVariables { num_vars: n, limit: max_vars });
    }
    let w = qubo.symmetric();
    let scale = 1.0 + w.iter().flatten().map(|c| c.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    let mut x = vec![0u8; n];
    // field[i] = Σ_{j≠i} W_ij x_j
    let mut field = vec![0.0; n];
    let mut energy = qubo.offset();
    let mut best_bits = x.clone();
    let mut best = qubo.energy(&x)?;

    for step in 1u64..1u64 << n {
        let k = step.trailing_zeros() as usize;
        let sign = if x[k] == 0 { 1.0 } else { -1.0 };
        energy += sign * (w[k][k] + field[k]);
        x[k] ^= 1;
        for (i, f) in field.iter_mut().enumerate() {
            if i != k {
                *f += sign * w[i][k];
            }
        }
        if energy < best - tol || (energy <= best + tol && bits_less(&x, &best_bits)) {
            let exact = qubo.energy(&x)?;
            if exact < best || (exact == best && bits_less(&x, &best_bits)) {
                best = exact;
                best_bits.clone_from(&x);
            }
        }
    }
    Ok(SolverResult {
        best_bits,
        best_energy: best,
        counts: None,
        best_circuit: None,
        history: Vec::new(),
        stats: SolverStats {
            iterations: 1usize << n,
            circuit_evaluations: 0,
            wall_time_ms: elapsed_ms(start),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{MaxCutInstance, OptimizationProblem};

    #[test]
    fn single_edge_prefers_lowest_bitstring() {
        let g = MaxCutInstance::new(2, [(0, 1, 1.0)]).unwrap();
        let (q, _) = g.formulate_problem("direct").unwrap();
        let r = brute_force(&q, 22).unwrap();
        assert_eq!((r.best_bits, r.best_energy), (vec![0, 1], -1.0));
    }

    #[test]
    fn zero_model_and_limit() {
        let r = brute_force(&QuboModel::new(3), 22).unwrap();
        assert_eq!((r.best_bits, r.best_energy), (vec![0, 0, 0], 0.0));
        assert_eq!(
            brute_force(&QuboModel::new(23), 22).unwrap_err(),
            SolverError::TooManyVariables { num_vars: 23, limit: 22 }
        );
    }

    #[test]
    fn matches_naive_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let n = 8;
            let mut q = QuboModel::new(n);
            for i in 0..n {
                for j in i..n {
                    q.add_quadratic(i, j, f64::from(rng.gen_range(-5i32..=5)));
                }
            }
            let r = brute_force(&q, 22).unwrap();
            let naive = (0u32..1 << n)
                .map(|v| {
                    let bits: Vec<u8> = (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect();
                    (q.energy(&bits).unwrap(), bits)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .unwrap();
            assert_eq!((r.best_energy, r.best_bits), naive);
        }
    }
}
