use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value as Json};

use super::{
    extra_fields, json_f64_matrix, DiscreteProblem, DiscreteVariable, ExactlyOne, Indicator,
    OptimizationProblem, ProblemClass, ProblemError, Sense, Solution, Term,
};
use crate::encodings::{BitRange, DecodingMap, EncodingScheme, FixedAssignment, OffsetContribution, QuboModel};

const KNOWN_FIELDS: [&str; 4] = ["problem_class", "distances", "coordinates", "labels"];

/// Travelling salesperson instance over a full (possibly asymmetric)
/// distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    distances: Vec<Vec<f64>>,
    coordinates: Option<Vec<[f64; 2]>>,
    labels: Option<Vec<String>>,
    metadata: Map<String, Json>,
}

impl TspInstance {
    pub fn new(distances: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        let n = distances.len();
        if n < ProblemClass::Tsp.min_size() {
            return Err(ProblemError::SizeTooSmall { size: n, min: 3 });
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(ProblemError::ShapeMismatch(format!(
                    "distances row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(ProblemError::InvalidValue(format!("distances[{i}][{i}] must be 0")));
            }
            if let Some(j) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
                return Err(ProblemError::InvalidValue(format!(
                    "distances[{i}][{j}] must be finite and non-negative"
                )));
            }
        }
        Ok(Self {
            distances,
            coordinates: None,
            labels: None,
            metadata: Map::new(),
        })
    }

    /// Integer distances uniform in `[1, 100]`, drawn independently per
    /// ordered pair.
    pub fn random(n: usize, seed: u64) -> Result<Self, ProblemError> {
        if n < ProblemClass::Tsp.min_size() {
            return Err(ProblemError::SizeTooSmall { size: n, min: 3 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let distances = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { f64::from(rng.gen_range(1u32..=100)) })
                    .collect()
            })
            .collect();
        Self::new(distances)
    }

    pub(super) fn from_record(map: &Map<String, Json>) -> Result<Self, ProblemError> {
        let distances = map
            .get("distances")
            .ok_or_else(|| ProblemError::MissingField("distances".into()))?;
        let mut inst = Self::new(json_f64_matrix(distances, "distances")?)?;
        let n = inst.num_cities();
        if let Some(coords) = map.get("coordinates") {
            let rows = json_f64_matrix(coords, "coordinates")?;
            if rows.len() != n || rows.iter().any(|r| r.len() != 2) {
                return Err(ProblemError::ShapeMismatch(format!(
                    "coordinates must hold {n} two-dimensional points"
                )));
            }
            inst.coordinates = Some(rows.iter().map(|r| [r[0], r[1]]).collect());
        }
        if let Some(labels) = map.get("labels") {
            let labels: Vec<String> = serde_json::from_value(labels.clone())
                .map_err(|_| ProblemError::InvalidValue("labels must be a list of strings".into()))?;
            if labels.len() != n {
                return Err(ProblemError::ShapeMismatch(format!("labels must have {n} entries")));
            }
            inst.labels = Some(labels);
        }
        inst.metadata = extra_fields(map, &KNOWN_FIELDS);
        Ok(inst)
    }

    pub fn with_coordinates(mut self, coordinates: Vec<[f64; 2]>) -> Result<Self, ProblemError> {
        if coordinates.len() != self.num_cities() {
            return Err(ProblemError::ShapeMismatch("one coordinate per city required".into()));
        }
        self.coordinates = Some(coordinates);
        Ok(self)
    }

    pub fn num_cities(&self) -> usize {
        self.distances.len()
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn distance(&self, from: usize, to: usize) -> f64 {
        self.distances[from][to]
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Closed tour length including the return leg.
    pub fn tour_length(&self, tour: &[usize]) -> Result<f64, ProblemError> {
        let n = self.num_cities();
        if tour.len() != n {
            return Err(ProblemError::InvalidSolutionShape(format!(
                "tour visits {} cities, instance has {n}",
                tour.len()
            )));
        }
        let mut seen = vec![false; n];
        for &c in tour {
            if c >= n || std::mem::replace(&mut seen[c], true) {
                return Err(ProblemError::InvalidSolutionShape(format!(
                    "tour {tour:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok((0..n).map(|i| self.distances[tour[i]][tour[(i + 1) % n]]).sum())
    }

    /// Bit index of "city `city` at position `pos`" in the one-hot layout,
    /// where city 0 is pinned to position 0 and both indices here start at 1.
    fn one_hot_bit(&self, pos: usize, city: usize) -> usize {
        let m = self.num_cities() - 1;
        (pos - 1) * m + (city - 1)
    }

    fn one_hot_decoding_map(&self, penalty: f64) -> DecodingMap {
        let m = self.num_cities() - 1;
        let ranges = (0..m)
            .map(|t| BitRange {
                variable: format!("position_{}", t + 1),
                start: t * m,
                width: m,
                domain_size: m,
            })
            .collect();
        DecodingMap {
            scheme: EncodingScheme::OneHot,
            ranges,
            fixed: vec![FixedAssignment {
                variable: "position_0".into(),
                value: 0,
            }],
            offset_contributions: vec![
                OffsetContribution::new("position_penalty_constant", penalty * m as f64),
                OffsetContribution::new("city_penalty_constant", penalty * m as f64),
            ],
            distinct_values: true,
        }
    }

    /// One-hot QUBO with city 0 fixed at position 0: `(n-1)^2` variables,
    /// tour cost plus `penalty * (Σ - 1)^2` per position row and per city column.
    pub fn one_hot_qubo(&self, penalty: f64) -> (QuboModel, DecodingMap) {
        let n = self.num_cities();
        let m = n - 1;
        let mut q = QuboModel::new(m * m);
        for c in 1..n {
            q.add_linear(self.one_hot_bit(1, c), self.distances[0][c]);
            q.add_linear(self.one_hot_bit(m, c), self.distances[c][0]);
        }
        for pos in 1..m {
            for u in 1..n {
                for v in (1..n).filter(|&v| v != u) {
                    let d = self.distances[u][v];
                    if d != 0.0 {
                        q.add_quadratic(self.one_hot_bit(pos, u), self.one_hot_bit(pos + 1, v), d);
                    }
                }
            }
        }
        let groups = (1..=m)
            .map(|pos| (1..n).map(|c| self.one_hot_bit(pos, c)).collect::<Vec<_>>())
            .chain((1..n).map(|c| (1..=m).map(|pos| self.one_hot_bit(pos, c)).collect()));
        for group in groups {
            q.add_exactly_one_penalty(&group, penalty);
        }
        (q, self.one_hot_decoding_map(penalty))
    }
}

impl OptimizationProblem for TspInstance {
    fn class(&self) -> ProblemClass {
        ProblemClass::Tsp
    }

    fn to_record(&self) -> Json {
        let mut map = self.metadata.clone();
        map.insert("problem_class".into(), json!("tsp"));
        map.insert("distances".into(), json!(self.distances));
        if let Some(c) = &self.coordinates {
            map.insert("coordinates".into(), json!(c));
        }
        if let Some(l) = &self.labels {
            map.insert("labels".into(), json!(l));
        }
        Json::Object(map)
    }

    fn evaluate_objective(&self, solution: &Solution) -> Result<f64, ProblemError> {
        match solution {
            Solution::Tour(tour) => self.tour_length(tour),
            Solution::Partition(_) => Err(ProblemError::InvalidSolutionShape(
                "TSP expects a tour".into(),
            )),
        }
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn direct_encodings(&self) -> &'static [&'static str] {
        &["one-hot"]
    }

    fn formulate_problem(&self, encoding: &str) -> Result<(QuboModel, DecodingMap), ProblemError> {
        match encoding {
            "one-hot" => Ok(self.one_hot_qubo(self.recommended_penalty())),
            other => Err(ProblemError::UnsupportedEncoding(other.to_string())),
        }
    }

    /// Positions `1..n` become variables whose value `v` means city `v + 1`;
    /// all-different is one exactly-one group per city.
    fn to_discrete_problem(&self) -> DiscreteProblem {
        let n = self.num_cities();
        let m = n - 1;
        let variables = (1..=m)
            .map(|t| DiscreteVariable {
                name: format!("position_{t}"),
                domain_size: m,
            })
            .collect();
        let mut objective = Vec::new();
        for c in 1..n {
            objective.push(Term {
                coefficient: self.distances[0][c],
                factors: vec![Indicator::new(0, c - 1)],
            });
            objective.push(Term {
                coefficient: self.distances[c][0],
                factors: vec![Indicator::new(m - 1, c - 1)],
            });
        }
        for t in 0..m - 1 {
            for u in 1..n {
                for v in (1..n).filter(|&v| v != u) {
                    if self.distances[u][v] != 0.0 {
                        objective.push(Term {
                            coefficient: self.distances[u][v],
                            factors: vec![Indicator::new(t, u - 1), Indicator::new(t + 1, v - 1)],
                        });
                    }
                }
            }
        }
        let constraints = (0..m)
            .map(|value| ExactlyOne {
                members: (0..m).map(|var| Indicator::new(var, value)).collect(),
            })
            .collect();
        DiscreteProblem::new(variables, objective, constraints).expect("TSP discrete form is well formed")
    }

    fn solution_from_assignment(&self, assignment: &[usize]) -> Result<Solution, ProblemError> {
        let m = self.num_cities() - 1;
        if assignment.len() != m {
            return Err(ProblemError::InvalidSolutionShape(format!(
                "expected {m} positions, got {}",
                assignment.len()
            )));
        }
        let tour: Vec<usize> = std::iter::once(0).chain(assignment.iter().map(|v| v + 1)).collect();
        self.tour_length(&tour)?;
        Ok(Solution::Tour(tour))
    }

    /// `1 + 2 n max(d)`: exceeds any tour, so a single violation always costs
    /// more than the best feasible tour.
    fn recommended_penalty(&self) -> f64 {
        1.0 + 2.0 * self.num_cities() as f64 * self.max_distance()
    }

    fn metadata(&self) -> &Map<String, Json> {
        &self.metadata
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::one_hot_encode;

    fn three_city() -> TspInstance {
        TspInstance::new(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ])
        .unwrap()
    }

    /// Exhaustive (n-1)! enumeration with city 0 first.
    fn best_tour_by_enumeration(inst: &TspInstance) -> f64 {
        fn rec(inst: &TspInstance, tour: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut f64) {
            let n = inst.num_cities();
            if tour.len() == n {
                *best = best.min(inst.tour_length(tour).unwrap());
                return;
            }
            for c in 1..n {
                if !used[c] {
                    used[c] = true;
                    tour.push(c);
                    rec(inst, tour, used, best);
                    tour.pop();
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(inst, &mut vec![0], &mut vec![false; inst.num_cities()], &mut best);
        best
    }

    #[test]
    fn every_three_city_tour_uses_all_edges() {
        let inst = three_city();
        for tour in [[0, 1, 2], [0, 2, 1], [1, 2, 0], [2, 1, 0]] {
            assert_eq!(inst.evaluate_objective(&Solution::Tour(tour.to_vec())).unwrap(), 6.0);
        }
    }

    #[test]
    fn rejects_bad_tours_and_matrices() {
        let inst = three_city();
        assert!(matches!(
            inst.tour_length(&[0, 1, 1]),
            Err(ProblemError::InvalidSolutionShape(_))
        ));
        assert!(matches!(inst.tour_length(&[0, 1]), Err(ProblemError::InvalidSolutionShape(_))));
        assert!(matches!(
            TspInstance::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            Err(ProblemError::SizeTooSmall { .. })
        ));
        assert!(matches!(
            TspInstance::new(vec![vec![0.0; 3], vec![0.0; 2], vec![0.0; 3]]),
            Err(ProblemError::ShapeMismatch(_))
        ));
        assert!(matches!(
            TspInstance::new(vec![vec![0.0, -1.0, 0.0], vec![0.0; 3], vec![0.0; 3]]),
            Err(ProblemError::InvalidValue(_))
        ));
    }

    #[test]
    fn random_instances_are_seeded_and_asymmetric() {
        let a = TspInstance::random(4, 0).unwrap();
        assert_eq!(a, TspInstance::random(4, 0).unwrap());
        assert_ne!(a, TspInstance::random(4, 1).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let d = a.distance(i, j);
                if i == j {
                    assert_eq!(d, 0.0);
                } else {
                    assert!((1.0..=100.0).contains(&d) && d.fract() == 0.0);
                }
            }
        }
        let b = TspInstance::random(8, 5).unwrap();
        assert!((0..8).any(|i| (0..8).any(|j| b.distance(i, j) != b.distance(j, i))));
    }

    #[test]
    fn formulation_has_squared_size_and_rejects_binary() {
        let inst = TspInstance::random(4, 2).unwrap();
        let (q, map) = inst.formulate_problem("one-hot").unwrap();
        assert_eq!(q.num_vars(), 9);
        assert_eq!(map.ranges.len(), 3);
        assert!(matches!(
            inst.formulate_problem("binary"),
            Err(ProblemError::UnsupportedEncoding(e)) if e == "binary"
        ));
    }

    #[test]
    fn direct_and_generic_one_hot_agree() {
        for seed in 0..5 {
            let inst = TspInstance::random(5, seed).unwrap();
            let penalty = inst.recommended_penalty();
            let (direct, _) = inst.one_hot_qubo(penalty);
            let (generic, _) = one_hot_encode(&inst.to_discrete_problem(), penalty).unwrap();
            assert_eq!(direct, generic, "seed {seed}");
        }
    }

    #[test]
    fn discrete_form_matches_tour_length_on_all_permutations() {
        let inst = TspInstance::random(4, 11).unwrap();
        let dp = inst.to_discrete_problem();
        assert_eq!(dp.num_variables(), 3);
        assert!(dp.variables.iter().all(|v| v.domain_size == 3));
        let mut checked = 0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let assignment = [a, b, c];
                    if !dp.is_feasible(&assignment) {
                        continue;
                    }
                    let tour = [0, a + 1, b + 1, c + 1];
                    assert_eq!(dp.evaluate(&assignment).unwrap(), inst.tour_length(&tour).unwrap());
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 6);
    }

    #[test]
    fn feasible_energy_equals_tour_length_and_penalty_dominates() {
        for seed in 0..4 {
            let inst = TspInstance::random(4, seed).unwrap();
            let (q, map) = inst.formulate_problem("one-hot").unwrap();
            let optimum = best_tour_by_enumeration(&inst);
            let mut best_feasible = f64::INFINITY;
            let mut infeasible_min = f64::INFINITY;
            for x in 0u32..512 {
                let bits: Vec<u8> = (0..9).map(|i| ((x >> i) & 1) as u8).collect();
                let e = q.energy(&bits).unwrap();
                let decoded = map.decode(&bits).unwrap();
                if decoded.repaired {
                    infeasible_min = infeasible_min.min(e);
                } else {
                    let sol = inst.solution_from_assignment(&decoded.assignment).unwrap();
                    assert_eq!(e, inst.evaluate_objective(&sol).unwrap());
                    best_feasible = best_feasible.min(e);
                }
            }
            assert_eq!(best_feasible, optimum);
            assert!(infeasible_min > best_feasible);
        }
    }

    #[test]
    fn record_keeps_coordinates_and_metadata() {
        let record = json!({
            "problem_class": "tsp",
            "distances": [[0, 1, 2], [1, 0, 3], [2, 3, 0]],
            "coordinates": [[0, 0], [1, 0], [0, 2]],
            "metadata": {"vehicle": "truck"},
            "depot_name": "north"
        });
        let inst = TspInstance::from_record(record.as_object().unwrap()).unwrap();
        assert_eq!(inst.coordinates().unwrap()[2], [0.0, 2.0]);
        assert_eq!(inst.metadata()["metadata"]["vehicle"], "truck");
        assert_eq!(inst.metadata()["depot_name"], "north");
        let back = TspInstance::from_record(inst.to_record().as_object().unwrap()).unwrap();
        assert_eq!(back, inst);

        let missing = json!({"problem_class": "tsp"});
        assert_eq!(
            TspInstance::from_record(missing.as_object().unwrap()).unwrap_err(),
            ProblemError::MissingField("distances".into())
        );
        let bad_coords = json!({"problem_class": "tsp", "distances": [[0, 1, 2], [1, 0, 3], [2, 3, 0]], "coordinates": [[0, 0]]});
        assert!(matches!(
            TspInstance::from_record(bad_coords.as_object().unwrap()),
            Err(ProblemError::ShapeMismatch(_))
        ));
    }
}
