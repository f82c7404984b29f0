use std::fs;

use super::{choice_query, decoding_map, instance, AlgorithmSelect, ENCODING_CHOICE, FORMULATION_CHOICE};
use crate::encodings::{binary_encode, one_hot_encode, DecodingMap, QuboModel};
use crate::engine::{Config, ExecContext, Next, Node, NodeError, PathInfo, ProblemData, ResultRecord, Value};
use crate::problems::{OptimizationProblem, ProblemClass, ProblemInstance, Sense};
use crate::queries::{FloatBound, Query, QueryKind};

pub const DISCRETE: &str = "discrete";

/// Root node: loads an instance file or generates a random instance.
pub struct LoadProblem;

impl LoadProblem {
    pub const ID: &'static str = "load_problem";
}

impl Node for LoadProblem {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let source = ctx.ask(
            &Query::multi_choice("load_problem.source", "Load a problem instance or generate one?", &["load", "generate"])
                .with_default("generate"),
        )?;
        let (instance, generated) = if source.as_str() == Some("load") {
            let path = ctx.ask(&Query::path("load_problem.path", "Instance file path?", true))?;
            let path = path.as_str().unwrap_or_default().to_string();
            let text = fs::read_to_string(&path).map_err(|e| NodeError::failure(format!("{path}: {e}")))?;
            let record: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| NodeError::failure(format!("{path}: {e}")))?;
            let instance = ProblemInstance::from_record(&record).map_err(NodeError::failure)?;
            data.insert("instance_source", Value::str(path));
            (instance, false)
        } else {
            let classes: Vec<&str> = ProblemClass::ALL.iter().map(|c| c.as_str()).collect();
            let class = ctx.ask(&Query::multi_choice("load_problem.class", "Problem class?", &classes).with_default("maxcut"))?;
            let class: ProblemClass = class.as_str().unwrap_or_default().parse().map_err(NodeError::failure)?;
            let min = class.min_size() as i64;
            let size = ctx.ask(
                &Query::int("load_problem.size", "Problem size (nodes or cities)?", Some(min), None)
                    .with_default(Value::Int(8.max(min))),
            )?;
            let size = size.as_int().unwrap_or(min) as usize;
            let instance = ProblemInstance::create_random(class, size, ctx.seed).map_err(NodeError::failure)?;
            data.insert("instance_source", Value::str("generated"));
            (instance, true)
        };
        data.insert("problem_class", Value::str(instance.class().as_str()));
        data.insert("instance_generated", Value::Bool(generated));
        data.insert("problem_instance", Value::Instance(instance.clone()));
        Ok(PathInfo::new().with("instance", Value::Instance(instance)))
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(FormulationSelect)))
    }

    /// Final backward step: application objective, class and metadata.
    fn interpret_result(
        &self,
        result: &mut ResultRecord,
        data: &ProblemData,
        _config: &Config,
        _info: &PathInfo,
    ) -> Result<(), NodeError> {
        let instance = instance(data)?;
        let solution = result
            .solution
            .as_ref()
            .ok_or_else(|| NodeError::failure("no decoded solution to evaluate"))?;
        result.objective = Some(instance.evaluate_objective(solution).map_err(NodeError::failure)?);
        result.problem_class = Some(instance.class());
        result.instance_metadata = instance.metadata().clone();
        Ok(())
    }
}

fn store_qubo(data: &mut ProblemData, qubo: QuboModel, map: DecodingMap) {
    data.insert("num_vars", Value::Int(qubo.num_vars() as i64));
    data.insert("qubo_offset", Value::Real(qubo.offset()));
    data.insert("qubo", Value::Qubo(qubo));
    data.insert("decoding_map", Value::Decoding(map));
}

/// Chooses between the class's direct QUBO formulations and the generic
/// discrete-problem route.
pub struct FormulationSelect;

impl FormulationSelect {
    pub const ID: &'static str = "formulation_select";
}

impl Node for FormulationSelect {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let instance = instance(data)?.clone();
        let mut options: Vec<&str> = instance.direct_encodings().to_vec();
        options.push(DISCRETE);
        let choice = ctx.ask(&Query::multi_choice(FORMULATION_CHOICE, "Formulation?", &options).with_default(options[0]))?;
        let choice = choice.as_str().unwrap_or_default().to_string();
        data.insert("formulation", Value::str(choice.clone()));
        if choice == DISCRETE {
            data.insert("discrete_problem", Value::Discrete(instance.to_discrete_problem()));
        } else {
            let (qubo, map) = instance.formulate_problem(&choice).map_err(NodeError::failure)?;
            data.insert("encoding", Value::str(choice.clone()));
            store_qubo(data, qubo, map);
        }
        Ok(PathInfo::new().with("formulation", Value::str(choice)))
    }

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError> {
        if info.get_str("formulation") == Some(DISCRETE) {
            Ok(Next::Node(Box::new(EncodingSelect)))
        } else {
            Ok(Next::Node(Box::new(AlgorithmSelect)))
        }
    }

    /// Decodes direct formulations and reports the energy-based objective.
    fn interpret_result(
        &self,
        result: &mut ResultRecord,
        data: &ProblemData,
        _config: &Config,
        info: &PathInfo,
    ) -> Result<(), NodeError> {
        let instance = instance(data)?;
        let bits = result
            .best_bits
            .clone()
            .ok_or_else(|| NodeError::failure("no bit result to decode"))?;
        if info.get_str("formulation") != Some(DISCRETE) {
            let (solution, repaired) = instance
                .decode_solution(&bits, decoding_map(data)?)
                .map_err(NodeError::failure)?;
            result.solution = Some(solution);
            result.repaired = repaired;
        }
        let energy = match data.get("qubo") {
            Some(Value::Qubo(q)) => q.energy(&bits).map_err(NodeError::failure)?,
            _ => return Err(NodeError::failure("problem data has no qubo")),
        };
        result.objective = Some(match instance.sense() {
            Sense::Minimize => energy,
            Sense::Maximize => -energy,
        });
        Ok(())
    }
}

/// Encodes a discrete problem as a QUBO.
pub struct EncodingSelect;

impl EncodingSelect {
    pub const ID: &'static str = "encoding_select";
}

impl Node for EncodingSelect {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let instance = instance(data)?.clone();
        let dp = match data.require("discrete_problem")? {
            Value::Discrete(dp) => dp.clone(),
            other => return Err(NodeError::failure(format!("discrete_problem holds a {}", other.type_name()))),
        };
        let binary = binary_encode(&dp).ok();
        let mut options = vec!["one-hot"];
        if binary.is_some() {
            options.push("binary");
        }
        let choice = ctx.ask(&choice_query(ENCODING_CHOICE, "Encoding?", &options, &[], "one-hot"))?;
        let (qubo, map) = match (choice.as_str(), binary) {
            (Some("binary"), Some(encoded)) => encoded,
            _ => {
                let recommended = instance.recommended_penalty();
                let penalty = ctx.ask(
                    &Query::new(
                        "encoding.penalty",
                        "Penalty weight for exactly-one constraints?",
                        QueryKind::Float {
                            min: Some(FloatBound {
                                value: 0.0,
                                inclusive: false,
                            }),
                            max: None,
                        },
                    )
                    .with_default(recommended),
                )?;
                let penalty = penalty.as_f64().unwrap_or(recommended);
                data.insert("encoding_penalty", Value::Real(penalty));
                one_hot_encode(&dp, penalty).map_err(NodeError::failure)?
            }
        };
        let choice = choice.as_str().unwrap_or_default().to_string();
        data.insert("encoding", Value::str(choice.clone()));
        store_qubo(data, qubo, map);
        Ok(PathInfo::new().with("encoding", Value::str(choice)))
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(AlgorithmSelect)))
    }

    fn interpret_result(
        &self,
        result: &mut ResultRecord,
        data: &ProblemData,
        _config: &Config,
        _info: &PathInfo,
    ) -> Result<(), NodeError> {
        let bits = result
            .best_bits
            .as_ref()
            .ok_or_else(|| NodeError::failure("no bit result to decode"))?;
        let decoded = decoding_map(data)?.decode(bits).map_err(NodeError::failure)?;
        result.solution = Some(
            instance(data)?
                .solution_from_assignment(&decoded.assignment)
                .map_err(NodeError::failure)?,
        );
        result.repaired = decoded.repaired;
        result.assignment = Some(decoded.assignment);
        Ok(())
    }
}
