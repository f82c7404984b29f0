use super::{BitRange, DecodingMap, EncodingError, EncodingScheme, OffsetContribution, QuboModel};
use crate::problems::{DiscreteProblem, Indicator};

/// One bit per (variable, value). Each variable gets an exactly-one penalty,
/// as does every constraint group; objective constants go to the offset.
pub fn one_hot_encode(dp: &DiscreteProblem, penalty: f64) -> Result<(QuboModel, DecodingMap), EncodingError> {
    if !(penalty.is_finite() && penalty > 0.0) {
        return Err(EncodingError::InvalidPenalty(penalty));
    }
    dp.validate()?;
    let mut starts = Vec::with_capacity(dp.variables.len());
    let mut width = 0;
    for v in &dp.variables {
        starts.push(width);
        width += v.domain_size;
    }
    let bit = |ind: &Indicator| starts[ind.var] + ind.value;

    let mut q = QuboModel::new(width);
    let mut objective_constant = 0.0;
    for term in &dp.objective {
        match term.factors.as_slice() {
            [] => objective_constant += term.coefficient,
            [a] => q.add_linear(bit(a), term.coefficient),
            [a, b] => q.add_quadratic(bit(a), bit(b), term.coefficient),
            _ => unreachable!("validated degree"),
        }
    }
    q.add_offset(objective_constant);
    for (i, v) in dp.variables.iter().enumerate() {
        let group: Vec<usize> = (starts[i]..starts[i] + v.domain_size).collect();
        q.add_exactly_one_penalty(&group, penalty);
    }
    for g in &dp.constraints {
        let group: Vec<usize> = g.members.iter().map(bit).collect();
        q.add_exactly_one_penalty(&group, penalty);
    }

    let mut offset_contributions = vec![OffsetContribution::new(
        "variable_penalty_constant",
        penalty * dp.variables.len() as f64,
    )];
    if !dp.constraints.is_empty() {
        offset_contributions.push(OffsetContribution::new(
            "constraint_penalty_constant",
            penalty * dp.constraints.len() as f64,
        ));
    }
    if objective_constant != 0.0 {
        offset_contributions.push(OffsetContribution::new("objective_constant", objective_constant));
    }
    let map = DecodingMap {
        scheme: EncodingScheme::OneHot,
        ranges: dp
            .variables
            .iter()
            .zip(&starts)
            .map(|(v, &start)| BitRange {
                variable: v.name.clone(),
                start,
                width: v.domain_size,
                domain_size: v.domain_size,
            })
            .collect(),
        fixed: Vec::new(),
        offset_contributions,
        distinct_values: dp.requires_distinct_values(),
    };
    Ok((q, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DiscreteVariable, ExactlyOne, Term};

    fn single_variable(domain: usize) -> DiscreteProblem {
        DiscreteProblem::new(
            vec![DiscreteVariable {
                name: "a".into(),
                domain_size: domain,
            }],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn penalty_minimum_at_weight_one() {
        let (q, _) = one_hot_encode(&single_variable(3), 5.0).unwrap();
        for x in 0u8..8 {
            let bits: Vec<u8> = (0..3).map(|i| (x >> i) & 1).collect();
            let weight = bits.iter().filter(|&&b| b == 1).count() as f64;
            let expected = 5.0 * (weight - 1.0).powi(2);
            assert_eq!(q.energy(&bits).unwrap(), expected, "bits {bits:?}");
        }
    }

    #[test]
    fn rejects_non_positive_penalty() {
        assert_eq!(
            one_hot_encode(&single_variable(2), 0.0).unwrap_err(),
            EncodingError::InvalidPenalty(0.0)
        );
    }

    #[test]
    fn feasible_energy_equals_objective_exhaustively() {
        // Two variables of domain 3 and 2 with all-different on value 0,
        // plus constants and mixed terms: 5 bits.
        let dp = DiscreteProblem::new(
            vec![
                DiscreteVariable {
                    name: "a".into(),
                    domain_size: 3,
                },
                DiscreteVariable {
                    name: "b".into(),
                    domain_size: 2,
                },
            ],
            vec![
                Term {
                    coefficient: 1.5,
                    factors: vec![],
                },
                Term {
                    coefficient: -2.0,
                    factors: vec![Indicator::new(0, 2)],
                },
                Term {
                    coefficient: 0.75,
                    factors: vec![Indicator::new(0, 1), Indicator::new(1, 1)],
                },
            ],
            vec![ExactlyOne {
                members: vec![Indicator::new(0, 0), Indicator::new(1, 0)],
            }],
        )
        .unwrap();
        let (q, map) = one_hot_encode(&dp, 10.0).unwrap();
        assert_eq!(q.num_vars(), 5);
        assert_eq!(map.total_offset(), q.offset());
        let mut feasible = 0;
        for x in 0u8..32 {
            let bits: Vec<u8> = (0..5).map(|i| (x >> i) & 1).collect();
            let row_ok = bits[..3].iter().sum::<u8>() == 1 && bits[3..].iter().sum::<u8>() == 1;
            if !row_ok {
                continue;
            }
            let decoded = map.decode(&bits).unwrap();
            if !dp.is_feasible(&decoded.assignment) {
                continue;
            }
            feasible += 1;
            assert_eq!(q.energy(&bits).unwrap(), dp.evaluate(&decoded.assignment).unwrap());
        }
        assert_eq!(feasible, 3);
    }
}
