use serde::{Deserialize, Serialize};

/// A finite-domain variable. Values range over `0..domain_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteVariable {
    pub name: String,
    pub domain_size: usize,
}

/// Indicator predicate `[variable = value]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Indicator {
    pub var: usize,
    pub value: usize,
}

impl Indicator {
    pub const fn new(var: usize, value: usize) -> Self {
        Self { var, value }
    }
}

/// `coefficient * Π indicators`, at most two factors. An empty factor list is a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<Indicator>,
}

/// Exactly one of the listed indicators must hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactlyOne {
    pub members: Vec<Indicator>,
}

/// Finite-domain intermediate form: minimize a degree-2 polynomial over
/// indicator predicates subject to exactly-one groups.
///
/// Every variable carries an implicit "takes exactly one value" constraint;
/// `constraints` holds the additional groups (for example all-different
/// expressed per value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProblem {
    pub variables: Vec<DiscreteVariable>,
    pub objective: Vec<Term>,
    pub constraints: Vec<ExactlyOne>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiscreteError {
    #[error("variable {0} has domain size below 2")]
    DomainTooSmall(usize),
    #[error("indicator refers to variable {var} value {value} outside its domain")]
    OutOfDomain { var: usize, value: usize },
    #[error("term has degree {0}, at most 2 supported")]
    DegreeTooHigh(usize),
    #[error("empty constraint group")]
    EmptyGroup,
    #[error("assignment has {got} values, problem has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
}

impl DiscreteProblem {
    pub fn new(
        variables: Vec<DiscreteVariable>,
        objective: Vec<Term>,
        constraints: Vec<ExactlyOne>,
    ) -> Result<Self, DiscreteError> {
        let dp = Self {
            variables,
            objective,
            constraints,
        };
        dp.validate()?;
        Ok(dp)
    }

    pub fn validate(&self) -> Result<(), DiscreteError> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.domain_size < 2 {
                return Err(DiscreteError::DomainTooSmall(i));
            }
        }
        let check = |ind: &Indicator| -> Result<(), DiscreteError> {
            match self.variables.get(ind.var) {
                Some(v) if ind.value < v.domain_size => Ok(()),
                _ => Err(DiscreteError::OutOfDomain {
                    var: ind.var,
                    value: ind.value,
                }),
            }
        };
        for term in &self.objective {
            if term.factors.len() > 2 {
                return Err(DiscreteError::DegreeTooHigh(term.factors.len()));
            }
            term.factors.iter().try_for_each(check)?;
        }
        for group in &self.constraints {
            if group.members.is_empty() {
                return Err(DiscreteError::EmptyGroup);
            }
            group.members.iter().try_for_each(check)?;
        }
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Objective value of an assignment, ignoring constraints.
    pub fn evaluate(&self, assignment: &[usize]) -> Result<f64, DiscreteError> {
        if assignment.len() != self.variables.len() {
            return Err(DiscreteError::AssignmentLength {
                expected: self.variables.len(),
                got: assignment.len(),
            });
        }
        Ok(self
            .objective
            .iter()
            .filter(|t| t.factors.iter().all(|f| assignment[f.var] == f.value))
            .map(|t| t.coefficient)
            .sum())
    }

    /// True when every exactly-one group is satisfied.
    pub fn is_feasible(&self, assignment: &[usize]) -> bool {
        assignment.len() == self.variables.len()
            && self.constraints.iter().all(|g| {
                g.members
                    .iter()
                    .filter(|m| assignment[m.var] == m.value)
                    .count()
                    == 1
            })
    }

    /// True when some constraint group mentions more than one variable.
    pub fn has_cross_variable_constraints(&self) -> bool {
        self.constraints.iter().any(|g| {
            g.members
                .first()
                .is_some_and(|first| g.members.iter().any(|m| m.var != first.var))
        })
    }

    /// True when the constraints are exactly an all-different (assignment)
    /// structure: every variable shares one domain and there is one group
    /// per value spanning every variable.
    pub fn requires_distinct_values(&self) -> bool {
        let Some(d) = self.variables.first().map(|v| v.domain_size) else {
            return false;
        };
        if self.variables.len() < 2
            || self.variables.iter().any(|v| v.domain_size != d)
            || self.constraints.len() != d
        {
            return false;
        }
        let mut covered = vec![false; d];
        for g in &self.constraints {
            let value = g.members[0].value;
            let mut vars: Vec<usize> = g.members.iter().map(|m| m.var).collect();
            vars.sort_unstable();
            vars.dedup();
            if g.members.iter().any(|m| m.value != value)
                || vars.len() != self.variables.len()
                || g.members.len() != vars.len()
                || std::mem::replace(&mut covered[value], true)
            {
                return false;
            }
        }
        true
    }
}
