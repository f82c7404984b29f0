use std::fs;

use super::{choice_query, int_entry, SolverSetup};
use crate::builders::{discover, AnsatzSpec, Builder, Built, TargetKind};
use crate::circuits::{build_ansatz, build_mixer, parse_qasm3_mixer};
use crate::encodings::{qubo_to_ising, spins_to_bits};
use crate::engine::{Config, ExecContext, Handle, Next, Node, NodeError, PathInfo, ProblemData, ResultRecord, Value};
use crate::queries::Query;
use crate::solvers::SolverKind;

/// Chooses the solver family.
pub struct AlgorithmSelect;

impl AlgorithmSelect {
    pub const ID: &'static str = "algorithm_select";
}

/// Brute force while affordable, tabu otherwise.
pub fn recommended_algorithm(num_vars: usize, config: &Config) -> SolverKind {
    if num_vars <= config.solver_limits.brute_force_max_vars {
        SolverKind::BruteForce
    } else {
        SolverKind::Tabu
    }
}

impl Node for AlgorithmSelect {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let n = int_entry(data, "num_vars")?;
        let limits = ctx.config.solver_limits;
        let names: Vec<&str> = SolverKind::ALL.iter().map(|k| k.name()).collect();
        let locked: Vec<usize> = SolverKind::ALL
            .iter()
            .enumerate()
            .filter(|(_, k)| match k {
                SolverKind::BruteForce => n > limits.brute_force_max_vars,
                SolverKind::Tabu => false,
                SolverKind::Qaoa | SolverKind::Vqe => n > limits.statevector_max_qubits,
            })
            .map(|(i, _)| i)
            .collect();
        let default = recommended_algorithm(n, ctx.config).name();
        let choice = ctx.ask(&choice_query("algorithm.choice", "Algorithm?", &names, &locked, default))?;
        let choice = choice.as_str().unwrap_or_default().to_string();
        data.insert("algorithm", Value::str(choice.clone()));
        Ok(PathInfo::new().with("algorithm", Value::str(choice)))
    }

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError> {
        let kind: SolverKind = info.get_str("algorithm").unwrap_or_default().parse().map_err(NodeError::failure)?;
        Ok(Next::Node(if kind.is_variational() {
            Box::new(IsingConversion)
        } else {
            Box::new(SolverSetup)
        }))
    }
}

/// Rewrites the QUBO as an Ising model for the variational solvers.
pub struct IsingConversion;

impl IsingConversion {
    pub const ID: &'static str = "ising_conversion";
}

impl Node for IsingConversion {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, _ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let ising = match data.require("qubo")? {
            Value::Qubo(q) => qubo_to_ising(q),
            other => return Err(NodeError::failure(format!("qubo holds a {}", other.type_name()))),
        };
        let algorithm = data.require("algorithm")?.to_string();
        data.insert("num_qubits", Value::Int(ising.num_spins() as i64));
        data.insert("ising_offset", Value::Real(ising.offset()));
        data.insert("ising", Value::Ising(ising));
        Ok(PathInfo::new().with("algorithm", Value::str(algorithm)))
    }

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(if info.get_str("algorithm") == Some(SolverKind::Qaoa.name()) {
            Box::new(SelectLayers)
        } else {
            Box::new(SelectAnsatz)
        }))
    }

    /// Spins back to bits through `x = (1 - z) / 2`.
    fn interpret_result(
        &self,
        result: &mut ResultRecord,
        _data: &ProblemData,
        _config: &Config,
        _info: &PathInfo,
    ) -> Result<(), NodeError> {
        let spins = result
            .spins
            .take()
            .ok_or_else(|| NodeError::failure("no spin result to convert"))?;
        result.best_bits = Some(spins_to_bits(&spins));
        Ok(())
    }
}

pub struct SelectLayers;

impl SelectLayers {
    pub const ID: &'static str = "select_layers";
}

impl Node for SelectLayers {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let p = ctx.ask(&Query::int("qaoa.layers", "Number of QAOA layers p?", Some(1), None).with_default(Value::Int(1)))?;
        data.insert("qaoa_layers", p);
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(LoadOrGenerateMixer)))
    }
}

pub struct LoadOrGenerateMixer;

impl LoadOrGenerateMixer {
    pub const ID: &'static str = "load_or_generate_mixer";
}

impl Node for LoadOrGenerateMixer {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let source = ctx.ask(
            &Query::multi_choice("mixer.source", "Load the mixer from a QASM 3 file or generate it?", &["generate", "load"])
                .with_default("generate"),
        )?;
        let source = source.as_str().unwrap_or_default().to_string();
        if source == "load" {
            let path = ctx.ask(&Query::path("mixer.path", "Mixer file path?", true))?;
            let path = path.as_str().unwrap_or_default().to_string();
            let text = fs::read_to_string(&path).map_err(|e| NodeError::failure(format!("{path}: {e}")))?;
            let mixer = parse_qasm3_mixer(&text).map_err(|e| NodeError::failure(format!("{path}: {e}")))?;
            let n = int_entry(data, "num_qubits")?;
            if mixer.num_qubits() != n {
                return Err(NodeError::failure(format!(
                    "mixer acts on {} qubits, the model has {n}",
                    mixer.num_qubits()
                )));
            }
            data.insert("mixer_source", Value::str(path));
            data.insert("mixer", Value::Handle(Handle::Circuit(mixer)));
        }
        Ok(PathInfo::new().with("source", Value::str(source)))
    }

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(if info.get_str("source") == Some("load") {
            Box::new(SelectOptimizer)
        } else {
            Box::new(SelectMixer)
        }))
    }
}

pub struct SelectMixer;

impl SelectMixer {
    pub const ID: &'static str = "select_mixer";
}

impl Node for SelectMixer {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let n = int_entry(data, "num_qubits")?;
        let builders = discover(TargetKind::Mixer);
        let names: Vec<&str> = builders.iter().map(|b| b.display_name.as_str()).collect();
        let locked: Vec<usize> = builders
            .iter()
            .enumerate()
            .filter(|(_, b)| n < 2 && b.display_name != "X")
            .map(|(i, _)| i)
            .collect();
        let choice = ctx.ask(&choice_query("mixer.template", "Mixer template?", &names, &locked, names[0]))?;
        let builder = pick(builders.clone(), &choice)?;
        let Built::Mixer(template) = configure(builder, "mixer", ctx)? else {
            return Err(NodeError::failure("mixer builder produced no mixer"));
        };
        let mixer = build_mixer(template, n).map_err(NodeError::failure)?;
        data.insert("mixer_template", Value::str(template.name()));
        data.insert("mixer", Value::Handle(Handle::Circuit(mixer)));
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(SelectOptimizer)))
    }
}

fn pick(builders: Vec<Builder>, choice: &Value) -> Result<Builder, NodeError> {
    let name = choice.as_str().unwrap_or_default();
    builders
        .into_iter()
        .find(|b| b.display_name == name)
        .ok_or_else(|| NodeError::failure(format!("no builder named `{name}`")))
}

/// Asks one `<prefix>.<name>` query per hyperparameter, then builds.
fn configure(mut builder: Builder, prefix: &str, ctx: &mut ExecContext<'_>) -> Result<Built, NodeError> {
    for hp in builder.list_hyperparameters().to_vec() {
        let value = ctx.ask(&Query::hyperparameter(&format!("{prefix}.{}", hp.name), &hp))?;
        builder.set_value(&hp.name, value).map_err(NodeError::failure)?;
    }
    builder.build().map_err(NodeError::failure)
}

pub struct SelectAnsatz;

impl SelectAnsatz {
    pub const ID: &'static str = "select_ansatz";
}

impl Node for SelectAnsatz {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let n = int_entry(data, "num_qubits")?;
        let builders = discover(TargetKind::Ansatz);
        let names: Vec<&str> = builders.iter().map(|b| b.display_name.as_str()).collect();
        let choice = ctx.ask(&choice_query("ansatz.choice", "Ansatz?", &names, &[], names[0]))?;
        let builder = pick(builders.clone(), &choice)?;
        let Built::Ansatz(AnsatzSpec { layers, entangler }) = configure(builder, "ansatz", ctx)? else {
            return Err(NodeError::failure("ansatz builder produced no ansatz"));
        };
        let ansatz = build_ansatz(n, layers, entangler).map_err(NodeError::failure)?;
        data.insert("ansatz_layers", Value::Int(layers as i64));
        data.insert("ansatz", Value::Handle(Handle::Circuit(ansatz)));
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(SelectOptimizer)))
    }
}

pub struct SelectOptimizer;

impl SelectOptimizer {
    pub const ID: &'static str = "select_optimizer";
}

impl Node for SelectOptimizer {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let builders = discover(TargetKind::Optimizer);
        let names: Vec<&str> = builders.iter().map(|b| b.display_name.as_str()).collect();
        let choice = ctx.ask(&choice_query("optimizer.choice", "Classical optimizer?", &names, &[], names[0]))?;
        let builder = pick(builders.clone(), &choice)?;
        let Built::Optimizer(optimizer) = configure(builder, "optimizer", ctx)? else {
            return Err(NodeError::failure("optimizer builder produced no optimizer"));
        };
        data.insert("optimizer", Value::Handle(Handle::Optimizer(optimizer)));
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(SolverSetup)))
    }
}
