use std::sync::Arc;

use indexmap::IndexMap;

use super::{Answer, AnswerSource, Query, QueryError};

pub type Answers = IndexMap<String, Answer>;

type Guard = Arc<dyn Fn(&Answers) -> bool + Send + Sync>;
type Factory = Arc<dyn Fn(&Answers) -> Query + Send + Sync>;

#[derive(Clone)]
struct Entry {
    id: String,
    depends_on: Vec<String>,
    guard: Option<Guard>,
    make: Factory,
}

/// Queries asked in insertion order; a guarded query is skipped when its
/// predicate on earlier answers is false or any dependency was skipped.
#[derive(Clone, Default)]
pub struct QueryTree {
    entries: Vec<Entry>,
}

impl QueryTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ask(self, query: Query) -> Result<Self, QueryError> {
        let id = query.id.clone();
        self.push(id, Vec::new(), None, Arc::new(move |_| query.clone()))
    }

    pub fn ask_when(
        self,
        query: Query,
        depends_on: &[&str],
        guard: impl Fn(&Answers) -> bool + Send + Sync + 'static,
    ) -> Result<Self, QueryError> {
        let id = query.id.clone();
        self.push(
            id,
            depends_on.iter().map(|s| s.to_string()).collect(),
            Some(Arc::new(guard)),
            Arc::new(move |_| query.clone()),
        )
    }

    /// A query whose definition depends on earlier answers.
    pub fn ask_dynamic(
        self,
        id: &str,
        depends_on: &[&str],
        guard: impl Fn(&Answers) -> bool + Send + Sync + 'static,
        make: impl Fn(&Answers) -> Query + Send + Sync + 'static,
    ) -> Result<Self, QueryError> {
        self.push(
            id.to_string(),
            depends_on.iter().map(|s| s.to_string()).collect(),
            Some(Arc::new(guard)),
            Arc::new(make),
        )
    }

    fn push(mut self, id: String, depends_on: Vec<String>, guard: Option<Guard>, make: Factory) -> Result<Self, QueryError> {
        if self.entries.iter().any(|e| e.id == id) {
            return Err(QueryError::InvalidTree(format!("duplicate query id `{id}`")));
        }
        if let Some(d) = depends_on.iter().find(|d| !self.entries.iter().any(|e| &e.id == *d)) {
            return Err(QueryError::InvalidTree(format!("`{id}` depends on `{d}`, which is not asked earlier")));
        }
        self.entries.push(Entry {
            id,
            depends_on,
            guard,
            make,
        });
        Ok(self)
    }
}

pub fn run_query_tree(tree: &QueryTree, source: &mut dyn AnswerSource) -> Result<Answers, QueryError> {
    let mut answers = Answers::new();
    for e in &tree.entries {
        if e.depends_on.iter().any(|d| !answers.contains_key(d)) {
            continue;
        }
        if e.guard.as_ref().is_some_and(|g| !g(&answers)) {
            continue;
        }
        let query = (e.make)(&answers);
        debug_assert_eq!(query.id, e.id);
        let answer = source.answer(&query)?;
        answers.insert(e.id.clone(), answer);
    }
    Ok(answers)
}
