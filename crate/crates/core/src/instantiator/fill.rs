//! Semantic instantiation: fill a skeleton with concrete names and values
//! that satisfy a dependency graph.

use super::graph::{build_dependency_graph, DependencyGraph};
use super::rules::RelationRule;
use crate::grammar::{DataType, ElementKind, Role};
use crate::ir::{ir_to_sql_with, IrProgram, NodeId};
use indexmap::{IndexMap, IndexSet};
use rand::Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Why a candidate could not be instantiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InstantiationError {
    #[error("use before definition ({0})")]
    UseBeforeDef(DataType),
    #[error("delete before definition ({0})")]
    DeleteBeforeDef(DataType),
    #[error("empty relation for {0}")]
    EmptyRelation(DataType),
}

#[derive(Debug, Error)]
#[error("instantiation failed after {attempts} attempts: {reason}")]
pub struct InstantiateFailure {
    pub attempts: u32,
    pub reason: InstantiationError,
}

/// Built-in function names drawn for stripped function-name slots. All of
/// them accept a single argument in SQLite, aggregates included.
pub const BUILTIN_FUNCTIONS: &[&str] = &[
    "abs", "avg", "count", "hex", "length", "lower", "ltrim", "max", "min", "quote", "round",
    "rtrim", "sum", "total", "trim", "typeof", "upper",
];

const PREDEFINED_INTS: &[&str] = &["0", "1", "-1", "10", "0xFFFF"];
const PREDEFINED_FLOATS: &[&str] = &["0.0", "1.0", "-1.5"];
const PREDEFINED_STRINGS: &[&str] = &["'a'", "'ab'", "'11111111'"];
/// Chance of generating a fresh random literal instead of a predefined one.
const FRESH_LITERAL_P: f64 = 0.1;

/// Live-name bookkeeping for one instantiation run.
pub struct NameState {
    data_map: IndexMap<ElementKind, IndexSet<String>>,
    relation_map: IndexMap<String, IndexSet<String>>,
    kinds: IndexMap<String, ElementKind>,
    counter: u64,
}

impl Default for NameState {
    fn default() -> Self {
        Self::new()
    }
}

impl NameState {
    pub fn new() -> NameState {
        let mut state = NameState {
            data_map: IndexMap::new(),
            relation_map: IndexMap::new(),
            kinds: IndexMap::new(),
            counter: 0,
        };
        // predefined names: function slots draw from the builtin pool
        for f in BUILTIN_FUNCTIONS {
            state.record(ElementKind::FunctionName, (*f).to_string());
        }
        state
    }

    fn fresh_name(&mut self) -> String {
        self.counter += 1;
        format!("v{}", self.counter)
    }

    fn record(&mut self, kind: ElementKind, name: String) {
        let ns = kind.namespace();
        self.kinds.insert(name.clone(), ns);
        self.data_map.entry(ns).or_default().insert(name);
    }

    fn relate(&mut self, parent: &str, child: String) {
        self.relation_map
            .entry(parent.to_string())
            .or_default()
            .insert(child);
    }

    fn is_live(&self, kind: ElementKind, name: &str) -> bool {
        self.data_map
            .get(&kind.namespace())
            .is_some_and(|s| s.contains(name))
    }

    fn draw(&self, kind: ElementKind, rng: &mut impl Rng) -> Option<String> {
        let set = self.data_map.get(&kind.namespace())?;
        if set.is_empty() {
            return None;
        }
        Some(set[rng.gen_range(0..set.len())].clone())
    }

    fn draw_related(&self, parent: &str, rng: &mut impl Rng) -> Option<String> {
        let set = self.relation_map.get(parent)?;
        if set.is_empty() {
            return None;
        }
        Some(set[rng.gen_range(0..set.len())].clone())
    }

    /// Retire a name and, transitively, the elements recorded under it:
    /// dropping a table also drops its columns from circulation.
    fn retire(&mut self, name: &str) {
        if let Some(kind) = self.kinds.get(name).copied() {
            if let Some(set) = self.data_map.get_mut(&kind) {
                set.swap_remove(name);
            }
        }
        if let Some(children) = self.relation_map.swap_remove(name) {
            for child in children {
                self.retire(&child);
            }
        }
    }
}

fn draw_literal(kind: ElementKind, rng: &mut impl Rng) -> String {
    let fresh = rng.gen_bool(FRESH_LITERAL_P);
    match kind {
        ElementKind::LiteralInt => {
            if fresh {
                rng.gen_range(-100_000i64..100_000).to_string()
            } else {
                PREDEFINED_INTS[rng.gen_range(0..PREDEFINED_INTS.len())].to_string()
            }
        }
        ElementKind::LiteralFloat => {
            if fresh {
                format!("{:.6}", rng.gen_range(-1000.0f64..1000.0))
            } else {
                PREDEFINED_FLOATS[rng.gen_range(0..PREDEFINED_FLOATS.len())].to_string()
            }
        }
        ElementKind::LiteralString => {
            if fresh {
                let len = rng.gen_range(1..=8);
                let s: String = (0..len)
                    .map(|_| char::from(b'a' + rng.gen_range(0..26u8)))
                    .collect();
                format!("'{s}'")
            } else {
                PREDEFINED_STRINGS[rng.gen_range(0..PREDEFINED_STRINGS.len())].to_string()
            }
        }
        _ => unreachable!("draw_literal is only called for literal kinds"),
    }
}

/// Fill `skeleton` according to `graph` and render the result. The skeleton
/// itself is never modified; only data values are overridden in the output.
///
/// Trees are processed in root position order, nodes within a tree in BFS
/// order, which matches statement order for definitions. Literals take
/// random or predefined values. Definitions get fresh unique names; uses
/// copy their parent's name when the element kinds match and otherwise draw
/// from the names recorded under the parent; deletes take the parent's name
/// and retire it. A use or delete whose name cannot be resolved from live
/// names fails the whole candidate.
pub fn instantiate(
    graph: &DependencyGraph,
    skeleton: &IrProgram,
    rng: &mut impl Rng,
) -> Result<String, InstantiationError> {
    let mut values: HashMap<NodeId, String> = HashMap::new();
    let mut state = NameState::new();

    // literals are independent of the dependency forest
    skeleton.walk(&mut |n| {
        if let (true, Some(dt)) = (n.is_data_leaf(), n.data_type) {
            if dt.is_literal() {
                values.insert(n.id, draw_literal(dt.kind(), rng));
            }
        }
    });

    // adjacency once, children kept in position order
    let n = graph.nodes.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for i in 0..n {
        match graph.parent[i] {
            Some(p) => children[p].push(i),
            None => roots.push(i),
        }
    }

    let mut order: Vec<usize> = Vec::with_capacity(n);
    for &root in &roots {
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            queue.extend(children[i].iter().copied());
        }
    }

    for i in order {
        let node = graph.nodes[i];
        let dt = node.data_type;
        let kind = dt.kind();
        let value = match graph.parent[i] {
            None => match dt.role() {
                Role::Define => {
                    let name = state.fresh_name();
                    state.record(kind, name.clone());
                    name
                }
                Role::Use => state
                    .draw(kind, rng)
                    .ok_or(InstantiationError::UseBeforeDef(dt))?,
                Role::Delete => return Err(InstantiationError::DeleteBeforeDef(dt)),
            },
            Some(p) => {
                let parent_node = graph.nodes[p];
                let parent_name = values[&parent_node.node_id].clone();
                match dt.role() {
                    Role::Define => {
                        let name = state.fresh_name();
                        state.record(kind, name.clone());
                        state.relate(&parent_name, name.clone());
                        name
                    }
                    Role::Use => {
                        if kind.namespace() == parent_node.data_type.kind().namespace() {
                            // the parent's name may have been retired by a
                            // drop processed earlier; a dangling reference
                            // fails the candidate
                            if !state.is_live(kind, &parent_name) {
                                return Err(InstantiationError::UseBeforeDef(dt));
                            }
                            parent_name
                        } else {
                            state
                                .draw_related(&parent_name, rng)
                                .ok_or(InstantiationError::EmptyRelation(dt))?
                        }
                    }
                    Role::Delete => {
                        if !state.is_live(kind, &parent_name) {
                            return Err(InstantiationError::DeleteBeforeDef(dt));
                        }
                        state.retire(&parent_name);
                        parent_name
                    }
                }
            }
        };
        values.insert(node.node_id, value);
    }

    Ok(ir_to_sql_with(skeleton, &values))
}

/// Build a fresh random dependency graph and instantiate, retrying with a
/// new graph up to `max_tries` times.
pub fn retry_instantiate(
    skeleton: &IrProgram,
    rules: &[RelationRule],
    rng: &mut impl Rng,
    max_tries: u32,
) -> Result<String, InstantiateFailure> {
    let mut last = InstantiationError::UseBeforeDef(DataType::UseAnyTable);
    for attempt in 1..=max_tries.max(1) {
        let graph = build_dependency_graph(skeleton, rules, rng);
        match instantiate(&graph, skeleton, rng) {
            Ok(sql) => return Ok(sql),
            Err(e) => last = e,
        }
        let _ = attempt;
    }
    Err(InstantiateFailure {
        attempts: max_tries.max(1),
        reason: last,
    })
}

pub const DEFAULT_MAX_TRIES: u32 = 3;
