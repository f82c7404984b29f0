use super::{choice_query, int_entry};
use crate::circuits::{render_qasm3, Circuit};
use crate::encodings::bits_to_spins;
use crate::engine::{Config, ExecContext, Handle, Next, Node, NodeError, PathInfo, ProblemData, ResultRecord, Value};
use crate::solvers::{check_input, OptimizerSpec, SolverKind, SolverSpec, VariationalOptions, DEFAULT_SHOTS};

pub const STATEVECTOR: &str = "statevector";

/// Hardware providers; listed, but selectable only with a configured token.
pub const HARDWARE_PROVIDERS: [&str; 2] = ["ibm_quantum", "ionq"];

fn circuit_entry(data: &ProblemData, key: &str) -> Result<Circuit, NodeError> {
    match data.require(key)? {
        Value::Handle(Handle::Circuit(c)) => Ok(c.clone()),
        other => Err(NodeError::failure(format!("`{key}` holds a {}", other.type_name()))),
    }
}

fn optimizer_entry(data: &ProblemData) -> Result<OptimizerSpec, NodeError> {
    match data.require("optimizer")? {
        Value::Handle(Handle::Optimizer(o)) => Ok(o.clone()),
        other => Err(NodeError::failure(format!("`optimizer` holds a {}", other.type_name()))),
    }
}

/// Assembles the solver and checks that its input model is present.
pub struct SolverSetup;

impl SolverSetup {
    pub const ID: &'static str = "solver_setup";
}

impl Node for SolverSetup {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let kind: SolverKind = data.require("algorithm")?.to_string().parse().map_err(NodeError::failure)?;
        let limits = ctx.config.solver_limits;
        let options = VariationalOptions {
            shots: DEFAULT_SHOTS,
            max_qubits: limits.statevector_max_qubits,
        };
        if !check_input(kind, data) {
            return Err(NodeError::failure(format!(
                "input check failed: {kind} needs {}",
                if kind.is_variational() { "an Ising model" } else { "a QUBO" }
            )));
        }
        let spec = match kind {
            SolverKind::BruteForce => SolverSpec::BruteForce {
                max_vars: limits.brute_force_max_vars,
            },
            SolverKind::Tabu => SolverSpec::Tabu(None),
            SolverKind::Qaoa => SolverSpec::Qaoa {
                mixer: circuit_entry(data, "mixer")?,
                layers: int_entry(data, "qaoa_layers")?,
                optimizer: optimizer_entry(data)?,
                options,
            },
            SolverKind::Vqe => SolverSpec::Vqe {
                ansatz: circuit_entry(data, "ansatz")?,
                optimizer: optimizer_entry(data)?,
                options,
            },
        };
        data.insert("solver_name", Value::str(kind.name()));
        data.insert("solver", Value::Handle(Handle::Solver(spec)));
        Ok(PathInfo::new().with("variational", Value::Bool(kind.is_variational())))
    }

    fn next_node(&self, info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(if info.get("variational") == Some(&Value::Bool(true)) {
            Box::new(BackendSelect)
        } else {
            Box::new(AlgorithmExecute)
        }))
    }

    /// Attaches solver diagnostics; variational results are handed on as spins.
    fn interpret_result(
        &self,
        result: &mut ResultRecord,
        data: &ProblemData,
        _config: &Config,
        info: &PathInfo,
    ) -> Result<(), NodeError> {
        let raw = result
            .raw
            .clone()
            .ok_or_else(|| NodeError::failure("no raw solver result"))?;
        result.solver_name = data.require("solver_name")?.to_string();
        result.solver_stats = raw.stats;
        result.history = raw.history;
        result.counts = raw.counts;
        result.best_circuit = raw.best_circuit.map(|c| render_qasm3(&c).unwrap_or_else(|_| c.to_string()));
        if info.get("variational") == Some(&Value::Bool(true)) {
            let bits = result
                .best_bits
                .take()
                .ok_or_else(|| NodeError::failure("no bit result"))?;
            result.spins = Some(bits_to_spins(&bits));
        }
        Ok(())
    }
}

pub struct BackendSelect;

impl BackendSelect {
    pub const ID: &'static str = "backend_select";
}

impl Node for BackendSelect {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let mut options = vec![STATEVECTOR];
        options.extend(HARDWARE_PROVIDERS);
        let locked: Vec<usize> = HARDWARE_PROVIDERS
            .iter()
            .enumerate()
            .filter(|(_, p)| ctx.config.tokens.get(**p).is_none_or(|t| t.is_empty()))
            .map(|(i, _)| i + 1)
            .collect();
        let choice = ctx.ask(&choice_query("backend.choice", "Execution backend?", &options, &locked, STATEVECTOR))?;
        if choice.as_str() != Some(STATEVECTOR) {
            return Err(NodeError::failure(format!("no execution integration for provider `{choice}`")));
        }
        data.insert("backend", choice);
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Node(Box::new(AlgorithmExecute)))
    }
}

/// Final node: runs the configured solver.
pub struct AlgorithmExecute;

impl AlgorithmExecute {
    pub const ID: &'static str = "algorithm_execute";
}

impl Node for AlgorithmExecute {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&mut self, data: &mut ProblemData, ctx: &mut ExecContext<'_>) -> Result<PathInfo, NodeError> {
        let Value::Handle(Handle::Solver(spec)) = data.require("solver")? else {
            return Err(NodeError::failure("`solver` holds no solver"));
        };
        let result = spec.solve(data, ctx.seed).map_err(NodeError::failure)?;
        ctx.set_raw_result(result);
        Ok(PathInfo::new())
    }

    fn next_node(&self, _info: &PathInfo) -> Result<Next, NodeError> {
        Ok(Next::Final)
    }
}
