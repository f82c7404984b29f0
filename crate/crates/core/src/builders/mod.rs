//! Builders pair a constructible component with the typed hyperparameters
//! needed to instantiate it.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::circuits::{Entangler, MixerTemplate};
use crate::engine::Value;
use crate::solvers::{NelderMeadOptions, OptimizerSpec, SpsaOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuilderError {
    #[error("unknown hyperparameter `{0}`")]
    UnknownHyperparameter(String),
    #[error("value rejected for `{name}`: {message}")]
    ValueRejected { name: String, message: String },
    #[error("unbound hyperparameters: {}", .0.join(", "))]
    UnboundHyperparameter(Vec<String>),
    #[error("build failed: {0}")]
    BuildFailed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HyperType {
    Int,
    Float,
    Str,
    Choice(Vec<String>),
}

/// Predicate on a single candidate value plus the message shown on failure.
#[derive(Clone)]
pub struct ValueTest {
    predicate: Arc<dyn Fn(&Value) -> bool + Send + Sync>,
    pub message: String,
}

impl ValueTest {
    pub fn new(message: impl Into<String>, predicate: impl Fn(&Value) -> bool + Send + Sync + 'static) -> Self {
        Self {
            predicate: Arc::new(predicate),
            message: message.into(),
        }
    }

    pub fn positive() -> Self {
        Self::new("must be larger than zero", |v| v.as_f64().is_some_and(|x| x > 0.0))
    }

    pub fn check(&self, v: &Value) -> bool {
        (self.predicate)(v)
    }
}

impl fmt::Debug for ValueTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ValueTest({:?})", self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Hyperparameter {
    pub name: String,
    pub description: Option<String>,
    pub ty: HyperType,
    pub default: Option<Value>,
    pub test: Option<ValueTest>,
    pub allow_multiple: bool,
}

impl PartialEq for Hyperparameter {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.description == other.description
            && self.ty == other.ty
            && self.default == other.default
            && self.test.as_ref().map(|t| &t.message) == other.test.as_ref().map(|t| &t.message)
            && self.allow_multiple == other.allow_multiple
    }
}

impl Hyperparameter {
    pub fn new(name: &str, ty: HyperType) -> Self {
        Self {
            name: name.to_string(),
            description: None,
            ty,
            default: None,
            test: None,
            allow_multiple: false,
        }
    }

    pub fn describe(mut self, d: &str) -> Self {
        self.description = Some(d.to_string());
        self
    }

    pub fn default_value(mut self, v: impl Into<Value>) -> Self {
        self.default = Some(v.into());
        self
    }

    pub fn test(mut self, t: ValueTest) -> Self {
        self.test = Some(t);
        self
    }

    pub fn multiple(mut self) -> Self {
        self.allow_multiple = true;
        self
    }

    fn check_one(&self, v: &Value) -> Result<Value, String> {
        let typed = match (&self.ty, v) {
            (HyperType::Int, Value::Int(_)) => v.clone(),
            (HyperType::Float, Value::Int(i)) => Value::Real(*i as f64),
            (HyperType::Float, Value::Real(r)) if r.is_finite() => v.clone(),
            (HyperType::Str, Value::Str(_)) => v.clone(),
            (HyperType::Choice(opts), Value::Str(s)) => {
                if !opts.contains(s) {
                    return Err(format!("must be one of: {}", opts.join(", ")));
                }
                v.clone()
            }
            (ty, other) => return Err(format!("expected {ty:?}, got {}", other.type_name())),
        };
        match &self.test {
            Some(t) if !t.check(&typed) => Err(t.message.clone()),
            _ => Ok(typed),
        }
    }

    /// Type- and test-checks a value; with `allow_multiple`, a list passes
    /// iff every element does.
    pub fn check(&self, v: &Value) -> Result<Value, String> {
        match v {
            Value::List(items) if self.allow_multiple => {
                if items.is_empty() {
                    return Err("list must not be empty".into());
                }
                items.iter().map(|i| self.check_one(i)).collect::<Result<Vec<_>, _>>().map(Value::List)
            }
            Value::List(_) => Err("does not accept a list of values".into()),
            other => self.check_one(other),
        }
    }

    fn parse_one(&self, raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        let v = match self.ty {
            HyperType::Int => Value::Int(raw.parse().map_err(|_| format!("`{raw}` is not an integer"))?),
            HyperType::Float => Value::Real(raw.parse().map_err(|_| format!("`{raw}` is not a number"))?),
            HyperType::Str | HyperType::Choice(_) => Value::str(raw),
        };
        self.check_one(&v)
    }

    /// Parses terminal input; lists are written `a,b,c` or `[a,b,c]`.
    pub fn parse(&self, raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        let listy = raw.starts_with('[') || raw.contains(',');
        if self.allow_multiple && listy {
            let inner = raw.trim_start_matches('[').trim_end_matches(']');
            let items = inner.split(',').map(|s| self.parse_one(s)).collect::<Result<Vec<_>, _>>()?;
            return self.check(&Value::List(items));
        }
        self.parse_one(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Optimizer,
    Ansatz,
    Mixer,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub layers: usize,
    pub entangler: Entangler,
}

/// What a builder produces. Qubit counts are supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum Built {
    Optimizer(OptimizerSpec),
    Ansatz(AnsatzSpec),
    Mixer(MixerTemplate),
    Generic(IndexMap<String, Value>),
}

type Factory = Arc<dyn Fn(&IndexMap<String, Value>) -> Result<Built, BuilderError> + Send + Sync>;

#[derive(Clone)]
pub struct Builder {
    pub target_kind: TargetKind,
    pub display_name: String,
    hyperparameters: Vec<Hyperparameter>,
    bound_values: IndexMap<String, Value>,
    factory: Factory,
}

impl fmt::Debug for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Builder")
            .field("target_kind", &self.target_kind)
            .field("display_name", &self.display_name)
            .field("hyperparameters", &self.hyperparameters)
            .field("bound_values", &self.bound_values)
            .finish_non_exhaustive()
    }
}

impl Builder {
    pub fn new(
        target_kind: TargetKind,
        display_name: &str,
        hyperparameters: Vec<Hyperparameter>,
        factory: impl Fn(&IndexMap<String, Value>) -> Result<Built, BuilderError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            target_kind,
            display_name: display_name.to_string(),
            hyperparameters,
            bound_values: IndexMap::new(),
            factory: Arc::new(factory),
        }
    }

    /// Builder whose product is the resolved value map itself.
    pub fn generic(display_name: &str, hyperparameters: Vec<Hyperparameter>) -> Self {
        Self::new(TargetKind::Generic, display_name, hyperparameters, |v| Ok(Built::Generic(v.clone())))
    }

    pub fn list_hyperparameters(&self) -> &[Hyperparameter] {
        &self.hyperparameters
    }

    pub fn bound_values(&self) -> &IndexMap<String, Value> {
        &self.bound_values
    }

    pub fn set_value(&mut self, name: &str, value: Value) -> Result<(), BuilderError> {
        let hp = self
            .hyperparameters
            .iter()
            .find(|h| h.name == name)
            .ok_or_else(|| BuilderError::UnknownHyperparameter(name.to_string()))?;
        let checked = hp.check(&value).map_err(|message| BuilderError::ValueRejected {
            name: name.to_string(),
            message,
        })?;
        self.bound_values.insert(name.to_string(), checked);
        Ok(())
    }

    pub fn with_value(mut self, name: &str, value: impl Into<Value>) -> Result<Self, BuilderError> {
        self.set_value(name, value.into())?;
        Ok(self)
    }

    /// Bound values, falling back to defaults, in declaration order.
    pub fn resolved(&self) -> Result<IndexMap<String, Value>, BuilderError> {
        let mut out = IndexMap::new();
        let mut missing = Vec::new();
        for hp in &self.hyperparameters {
            match self.bound_values.get(&hp.name).or(hp.default.as_ref()) {
                Some(v) => {
                    out.insert(hp.name.clone(), v.clone());
                }
                None => missing.push(hp.name.clone()),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(BuilderError::UnboundHyperparameter(missing))
        }
    }

    pub fn build(&self) -> Result<Built, BuilderError> {
        (self.factory)(&self.resolved()?)
    }
}

fn int_of(values: &IndexMap<String, Value>, name: &str) -> Result<i64, BuilderError> {
    values
        .get(name)
        .and_then(Value::as_int)
        .ok_or_else(|| BuilderError::BuildFailed(format!("`{name}` must be an integer")))
}

fn float_of(values: &IndexMap<String, Value>, name: &str) -> Result<f64, BuilderError> {
    values
        .get(name)
        .and_then(Value::as_f64)
        .ok_or_else(|| BuilderError::BuildFailed(format!("`{name}` must be a number")))
}

fn to_usize(v: i64, name: &str) -> Result<usize, BuilderError> {
    usize::try_from(v).map_err(|_| BuilderError::BuildFailed(format!("`{name}` must be non-negative")))
}

pub fn nelder_mead_builder() -> Builder {
    let d = NelderMeadOptions::default();
    Builder::new(
        TargetKind::Optimizer,
        "NelderMead",
        vec![
            Hyperparameter::new("maxiter", HyperType::Int)
                .describe("iteration limit, 0 selects 200 per parameter")
                .default_value(d.maxiter as i64)
                .test(ValueTest::new("must be larger than zero (or 0 for 200 per parameter)", |v| {
                    v.as_int().is_some_and(|i| i >= 0)
                })),
            Hyperparameter::new("initial_step", HyperType::Float)
                .describe("initial simplex edge length")
                .default_value(d.initial_step)
                .test(ValueTest::positive()),
            Hyperparameter::new("xtol", HyperType::Float)
                .describe("simplex size tolerance")
                .default_value(d.xtol)
                .test(ValueTest::positive()),
        ],
        |v| {
            Ok(Built::Optimizer(OptimizerSpec::NelderMead(NelderMeadOptions {
                maxiter: to_usize(int_of(v, "maxiter")?, "maxiter")?,
                initial_step: float_of(v, "initial_step")?,
                xtol: float_of(v, "xtol")?,
            })))
        },
    )
}

pub fn spsa_builder() -> Builder {
    let d = SpsaOptions::default();
    let positive = |name: &str, default: f64| {
        Hyperparameter::new(name, HyperType::Float)
            .default_value(default)
            .test(ValueTest::positive())
    };
    Builder::new(
        TargetKind::Optimizer,
        "SPSA",
        vec![
            Hyperparameter::new("maxiter", HyperType::Int)
                .describe("number of gradient steps")
                .default_value(d.maxiter as i64)
                .test(ValueTest::positive()),
            positive("a", d.a).describe("step size scale"),
            positive("c", d.c).describe("perturbation scale"),
            positive("alpha", d.alpha).describe("step size decay"),
            positive("gamma", d.gamma).describe("perturbation decay"),
        ],
        |v| {
            Ok(Built::Optimizer(OptimizerSpec::Spsa(SpsaOptions {
                maxiter: to_usize(int_of(v, "maxiter")?, "maxiter")?,
                a: float_of(v, "a")?,
                c: float_of(v, "c")?,
                alpha: float_of(v, "alpha")?,
                gamma: float_of(v, "gamma")?,
            })))
        },
    )
}

pub fn mixer_builder(template: MixerTemplate) -> Builder {
    Builder::new(TargetKind::Mixer, template.name(), Vec::new(), move |_| Ok(Built::Mixer(template)))
}

pub fn ansatz_builder() -> Builder {
    Builder::new(
        TargetKind::Ansatz,
        "HardwareEfficient",
        vec![
            Hyperparameter::new("layers", HyperType::Int)
                .describe("number of entangling layers")
                .default_value(1i64)
                .test(ValueTest::positive()),
            Hyperparameter::new("entangler", HyperType::Choice(vec!["cz".into(), "cx".into()]))
                .describe("two-qubit gate")
                .default_value("cz"),
        ],
        |v| {
            let entangler = v
                .get("entangler")
                .and_then(Value::as_str)
                .unwrap_or("cz")
                .parse::<Entangler>()
                .map_err(|e| BuilderError::BuildFailed(e.to_string()))?;
            Ok(Built::Ansatz(AnsatzSpec {
                layers: to_usize(int_of(v, "layers")?, "layers")?,
                entangler,
            }))
        },
    )
}

/// Explicit catalog; discovery order is registration order.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    builders: Vec<Builder>,
}

impl Registry {
    pub fn shipped() -> Self {
        let mut r = Self::default();
        r.register(nelder_mead_builder());
        r.register(spsa_builder());
        for t in MixerTemplate::ALL {
            r.register(mixer_builder(t));
        }
        r.register(ansatz_builder());
        r
    }

    pub fn register(&mut self, b: Builder) {
        self.builders.push(b);
    }

    pub fn discover(&self, kind: TargetKind) -> Vec<Builder> {
        self.builders.iter().filter(|b| b.target_kind == kind).cloned().collect()
    }

    pub fn find(&self, kind: TargetKind, name: &str) -> Option<Builder> {
        self.builders
            .iter()
            .find(|b| b.target_kind == kind && b.display_name == name)
            .cloned()
    }
}

pub fn discover(kind: TargetKind) -> Vec<Builder> {
    Registry::shipped().discover(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(kind: TargetKind) -> Vec<String> {
        discover(kind).into_iter().map(|b| b.display_name).collect()
    }

    #[test]
    fn catalog_discovery() {
        assert_eq!(names(TargetKind::Optimizer), ["NelderMead", "SPSA"]);
        assert_eq!(names(TargetKind::Mixer), ["X", "XY", "Ring"]);
        assert_eq!(names(TargetKind::Ansatz), ["HardwareEfficient"]);
        assert!(names(TargetKind::Generic).is_empty());
    }

    #[test]
    fn hyperparameter_listing() {
        let hp = |b: Builder| b.list_hyperparameters().iter().map(|h| h.name.clone()).collect::<Vec<_>>();
        assert_eq!(hp(nelder_mead_builder()), ["maxiter", "initial_step", "xtol"]);
        assert!(hp(mixer_builder(MixerTemplate::X)).is_empty());
        assert_eq!(hp(ansatz_builder()), ["layers", "entangler"]);
    }

    #[test]
    fn set_value_checks() {
        let mut b = nelder_mead_builder();
        b.set_value("maxiter", Value::Int(200)).unwrap();
        match b.set_value("maxiter", Value::Int(-5)).unwrap_err() {
            BuilderError::ValueRejected { message, .. } => assert!(message.starts_with("must be larger than zero")),
            e => panic!("{e}"),
        }
        assert_eq!(
            b.set_value("nope", Value::Int(1)).unwrap_err(),
            BuilderError::UnknownHyperparameter("nope".into())
        );
        assert!(b.set_value("xtol", Value::str("x")).is_err());
        assert_eq!(b.bound_values().get("maxiter"), Some(&Value::Int(200)));
    }

    #[test]
    fn defaults_build_everything() {
        for b in Registry::shipped().builders {
            b.build().unwrap();
        }
        assert_eq!(
            nelder_mead_builder().build().unwrap(),
            Built::Optimizer(OptimizerSpec::NelderMead(NelderMeadOptions::default()))
        );
        let spsa = spsa_builder().with_value("maxiter", 100i64).unwrap().build().unwrap();
        assert!(matches!(spsa, Built::Optimizer(OptimizerSpec::Spsa(o)) if o.maxiter == 100));
    }

    #[test]
    fn lists_and_unbound() {
        let hp = Hyperparameter::new("layers", HyperType::Int).test(ValueTest::positive()).multiple();
        let mut b = Builder::generic("g", vec![hp.clone(), Hyperparameter::new("name", HyperType::Str)]);
        let list = Value::List(vec![Value::Int(2), Value::Int(2), Value::Int(1)]);
        b.set_value("layers", list.clone()).unwrap();
        assert!(b
            .set_value("layers", Value::List(vec![Value::Int(2), Value::Int(0)]))
            .is_err());
        assert_eq!(hp.parse("[2,2,1]"), Ok(list));
        assert_eq!(
            b.build().unwrap_err(),
            BuilderError::UnboundHyperparameter(vec!["name".into()])
        );
        b.set_value("name", Value::str("x")).unwrap();
        assert!(b.build().is_ok());
        let single = Hyperparameter::new("n", HyperType::Int);
        assert!(single.check(&Value::List(vec![Value::Int(1)])).is_err());
    }

    #[test]
    fn order_independent_binding() {
        let a = spsa_builder()
            .with_value("a", 0.3)
            .unwrap()
            .with_value("maxiter", 7i64)
            .unwrap();
        let b = spsa_builder()
            .with_value("maxiter", 7i64)
            .unwrap()
            .with_value("a", 0.3)
            .unwrap();
        assert_eq!(a.build().unwrap(), b.build().unwrap());
    }
}
