use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use super::{
    extra_fields, json_f64_matrix, json_number, DiscreteProblem, DiscreteVariable, Indicator,
    OptimizationProblem, ProblemClass, ProblemError, Sense, Solution, Term,
};
use crate::encodings::{BitRange, DecodingMap, EncodingScheme, QuboModel};

const KNOWN_FIELDS: [&str; 4] = ["problem_class", "num_nodes", "edges", "adjacency"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Weighted MaxCut. Edges are stored with `u < v`, without duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutInstance {
    num_nodes: usize,
    edges: Vec<Edge>,
    metadata: Map<String, Json>,
}

impl MaxCutInstance {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, ProblemError> {
        if num_nodes < ProblemClass::MaxCut.min_size() {
            return Err(ProblemError::SizeTooSmall {
                size: num_nodes,
                min: ProblemClass::MaxCut.min_size(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, weight) in edges {
            let (u, v) = (a.min(b), a.max(b));
            if u == v {
                return Err(ProblemError::InvalidValue(format!("self-loop on node {u}")));
            }
            if v >= num_nodes {
                return Err(ProblemError::InvalidValue(format!(
                    "edge ({a}, {b}) refers to a node outside 0..{num_nodes}"
                )));
            }
            if !weight.is_finite() {
                return Err(ProblemError::InvalidValue(format!("edge ({a}, {b}) weight must be finite")));
            }
            if !seen.insert((u, v)) {
                return Err(ProblemError::InvalidValue(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, weight });
        }
        Ok(Self {
            num_nodes,
            edges: out,
            metadata: Map::new(),
        })
    }

    /// Each of the `n(n-1)/2` edges is present with probability 1/2, weight 1.
    pub fn random(n: usize, seed: u64) -> Result<Self, ProblemError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((u, v, 1.0));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Cycle `0-1-...-(n-1)-0` with unit weights.
    pub fn ring(n: usize) -> Result<Self, ProblemError> {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
    }

    pub(super) fn from_record(map: &Map<String, Json>) -> Result<Self, ProblemError> {
        let mut inst = if let Some(adj) = map.get("adjacency") {
            let matrix = json_f64_matrix(adj, "adjacency")?;
            let n = matrix.len();
            if matrix.iter().any(|r| r.len() != n) {
                return Err(ProblemError::ShapeMismatch("adjacency must be square".into()));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if matrix[u][v] != matrix[v][u] {
                        return Err(ProblemError::InvalidValue(format!(
                            "adjacency must be symmetric at ({u}, {v})"
                        )));
                    }
                    if matrix[u][v] != 0.0 {
                        edges.push((u, v, matrix[u][v]));
                    }
                }
            }
            Self::new(n, edges)?
        } else {
            let n = map
                .get("num_nodes")
                .ok_or_else(|| ProblemError::MissingField("num_nodes".into()))?
                .as_u64()
                .ok_or_else(|| ProblemError::InvalidValue("num_nodes must be a non-negative integer".into()))?
                as usize;
            let edges = map
                .get("edges")
                .ok_or_else(|| ProblemError::MissingField("edges".into()))?
                .as_array()
                .ok_or_else(|| ProblemError::ShapeMismatch("edges must be a list".into()))?
                .iter()
                .map(parse_edge)
                .collect::<Result<Vec<_>, _>>()?;
            Self::new(n, edges)?
        };
        inst.metadata = extra_fields(map, &KNOWN_FIELDS);
        Ok(inst)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn cut_value(&self, partition: &[u8]) -> Result<f64, ProblemError> {
        if partition.len() != self.num_nodes || partition.iter().any(|&b| b > 1) {
            return Err(ProblemError::InvalidSolutionShape(format!(
                "partition must hold {} bits",
                self.num_nodes
            )));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| partition[e.u] != partition[e.v])
            .map(|e| e.weight)
            .sum())
    }
}

fn parse_edge(v: &Json) -> Result<(usize, usize, f64), ProblemError> {
    let node = |x: &Json| {
        x.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| ProblemError::InvalidValue("edge endpoints must be node indices".into()))
    };
    match v {
        Json::Array(items) if items.len() == 2 || items.len() == 3 => {
            let w = items.get(2).map(|w| json_number(w, "edge weight")).transpose()?;
            Ok((node(&items[0])?, node(&items[1])?, w.unwrap_or(1.0)))
        }
        Json::Object(o) => {
            let u = o.get("u").ok_or_else(|| ProblemError::MissingField("edges[].u".into()))?;
            let v = o.get("v").ok_or_else(|| ProblemError::MissingField("edges[].v".into()))?;
            let w = o.get("weight").map(|w| json_number(w, "edge weight")).transpose()?;
            Ok((node(u)?, node(v)?, w.unwrap_or(1.0)))
        }
        _ => Err(ProblemError::ShapeMismatch(
            "edges must be [u, v], [u, v, weight] or {u, v, weight}".into(),
        )),
    }
}

impl OptimizationProblem for MaxCutInstance {
    fn class(&self) -> ProblemClass {
        ProblemClass::MaxCut
    }

    fn to_record(&self) -> Json {
        let mut map = self.metadata.clone();
        map.insert("problem_class".into(), json!("maxcut"));
        map.insert("num_nodes".into(), json!(self.num_nodes));
        map.insert(
            "edges".into(),
            Json::Array(self.edges.iter().map(|e| json!([e.u, e.v, e.weight])).collect()),
        );
        Json::Object(map)
    }

    fn evaluate_objective(&self, solution: &Solution) -> Result<f64, ProblemError> {
        match solution {
            Solution::Partition(p) => self.cut_value(p),
            Solution::Tour(_) => Err(ProblemError::InvalidSolutionShape(
                "MaxCut expects a partition".into(),
            )),
        }
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn direct_encodings(&self) -> &'static [&'static str] {
        &["direct"]
    }

    /// One bit per node, minimizing `-cut = Σ w (2 x_u x_v - x_u - x_v)`.
    fn formulate_problem(&self, encoding: &str) -> Result<(QuboModel, DecodingMap), ProblemError> {
        if encoding != "direct" {
            return Err(ProblemError::UnsupportedEncoding(encoding.to_string()));
        }
        let mut q = QuboModel::new(self.num_nodes);
        for e in &self.edges {
            q.add_linear(e.u, -e.weight);
            q.add_linear(e.v, -e.weight);
            q.add_quadratic(e.u, e.v, 2.0 * e.weight);
        }
        let map = DecodingMap {
            scheme: EncodingScheme::Direct,
            ranges: (0..self.num_nodes)
                .map(|i| BitRange {
                    variable: format!("node_{i}"),
                    start: i,
                    width: 1,
                    domain_size: 2,
                })
                .collect(),
            fixed: Vec::new(),
            offset_contributions: Vec::new(),
            distinct_values: false,
        };
        Ok((q, map))
    }

    fn to_discrete_problem(&self) -> DiscreteProblem {
        let variables = (0..self.num_nodes)
            .map(|i| DiscreteVariable {
                name: format!("node_{i}"),
                domain_size: 2,
            })
            .collect();
        let objective = self
            .edges
            .iter()
            .flat_map(|e| {
                [(0, 1), (1, 0)].map(|(a, b)| Term {
                    coefficient: -e.weight,
                    factors: vec![Indicator::new(e.u, a), Indicator::new(e.v, b)],
                })
            })
            .collect();
        DiscreteProblem::new(variables, objective, Vec::new()).expect("MaxCut discrete form is well formed")
    }

    fn solution_from_assignment(&self, assignment: &[usize]) -> Result<Solution, ProblemError> {
        if assignment.len() != self.num_nodes || assignment.iter().any(|&v| v > 1) {
            return Err(ProblemError::InvalidSolutionShape(format!(
                "expected {} binary node values",
                self.num_nodes
            )));
        }
        Ok(Solution::Partition(assignment.iter().map(|&v| v as u8).collect()))
    }

    fn recommended_penalty(&self) -> f64 {
        1.0 + 2.0 * self.edges.iter().map(|e| e.weight.abs()).sum::<f64>()
    }

    fn metadata(&self) -> &Map<String, Json> {
        &self.metadata
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MaxCutInstance {
        MaxCutInstance::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn cut_values_on_triangle() {
        let t = triangle();
        assert_eq!(t.evaluate_objective(&Solution::Partition(vec![0, 0, 1])).unwrap(), 2.0);
        assert_eq!(t.evaluate_objective(&Solution::Partition(vec![0, 0, 0])).unwrap(), 0.0);
        assert!(t.evaluate_objective(&Solution::Partition(vec![0, 1])).is_err());
    }

    #[test]
    fn single_edge_qubo_energies() {
        let inst = MaxCutInstance::new(2, [(0, 1, 1.0)]).unwrap();
        let (q, _) = inst.formulate_problem("direct").unwrap();
        let energies: Vec<f64> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|b| q.energy(b).unwrap())
            .collect();
        assert_eq!(energies, vec![0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(
            inst.formulate_problem("one-hot"),
            Err(ProblemError::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn decodes_bits_into_partition() {
        let t = triangle();
        let (_, map) = t.formulate_problem("direct").unwrap();
        let decoded = map.decode(&[0, 1, 1]).unwrap();
        assert!(!decoded.repaired);
        assert_eq!(
            t.solution_from_assignment(&decoded.assignment).unwrap(),
            Solution::Partition(vec![0, 1, 1])
        );
    }

    #[test]
    fn random_instances_have_unit_weights() {
        let g = MaxCutInstance::random(6, 1).unwrap();
        assert!(g.edges().len() <= 15);
        assert!(g.edges().iter().all(|e| e.weight == 1.0 && e.u < e.v));
        assert_eq!(g, MaxCutInstance::random(6, 1).unwrap());
        assert!(matches!(MaxCutInstance::random(1, 0), Err(ProblemError::SizeTooSmall { .. })));
    }

    #[test]
    fn discrete_form_matches_cut_exhaustively() {
        let g = MaxCutInstance::random(5, 9).unwrap();
        let dp = g.to_discrete_problem();
        for x in 0..32usize {
            let a: Vec<usize> = (0..5).map(|i| (x >> i) & 1).collect();
            let p: Vec<u8> = a.iter().map(|&v| v as u8).collect();
            assert_eq!(-dp.evaluate(&a).unwrap(), g.cut_value(&p).unwrap());
        }
        assert_eq!(triangle().to_discrete_problem().objective.len(), 6);
    }

    #[test]
    fn record_round_trip_and_validation() {
        let record = json!({"problem_class": "maxcut", "num_nodes": 3, "edges": [[1, 0, 2.5], {"u": 1, "v": 2}]});
        let g = MaxCutInstance::from_record(record.as_object().unwrap()).unwrap();
        assert_eq!(g.edges()[0], Edge { u: 0, v: 1, weight: 2.5 });
        assert_eq!(g.to_record()["edges"], json!([[0, 1, 2.5], [1, 2, 1.0]]));
        assert_eq!(MaxCutInstance::from_record(g.to_record().as_object().unwrap()).unwrap(), g);

        let adj = json!({"problem_class": "maxcut", "adjacency": [[0, 1, 1], [1, 0, 0], [1, 0, 0]]});
        assert_eq!(MaxCutInstance::from_record(adj.as_object().unwrap()).unwrap().edges().len(), 2);

        let dup = json!({"problem_class": "maxcut", "num_nodes": 3, "edges": [[0, 1], [1, 0]]});
        assert!(matches!(
            MaxCutInstance::from_record(dup.as_object().unwrap()),
            Err(ProblemError::InvalidValue(_))
        ));
        let missing = json!({"problem_class": "maxcut", "num_nodes": 3});
        assert_eq!(
            MaxCutInstance::from_record(missing.as_object().unwrap()).unwrap_err(),
            ProblemError::MissingField("edges".into())
        );
    }
}
