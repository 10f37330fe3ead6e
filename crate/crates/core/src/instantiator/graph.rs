//! Dependency graph construction over a skeleton's data nodes.

use super::rules::{RelationRule, RuleChoice, RuleScope};
use crate::grammar::DataType;
use crate::ir::{IrNode, IrProgram, NodeId};
use rand::Rng;
use std::fmt::Write as _;

/// One data-carrying IR node of the skeleton, in program position order.
#[derive(Debug, Clone, Copy)]
pub struct DataNode {
    pub node_id: NodeId,
    pub data_type: DataType,
    pub stmt_index: usize,
    /// 1-based position among the program's semantic data nodes.
    pub position: usize,
}

/// A forest over the skeleton's semantic data nodes: every node has at most
/// one parent, and edges always point from an earlier position to a later
/// one.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    pub nodes: Vec<DataNode>,
    /// `parent[i]` is the index of node i's parent, if any.
    pub parent: Vec<Option<usize>>,
}

impl DependencyGraph {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.parent[i].is_none())
    }

    pub fn children_of(&self, idx: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.parent[i] == Some(idx))
            .collect()
    }

    /// Edge-list dump, one line per node in position order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let _ = write!(
                out,
                "x{} {} stmt{}",
                node.position, node.data_type, node.stmt_index
            );
            match self.parent[i] {
                Some(p) => {
                    let _ = writeln!(out, " parent=x{}", self.nodes[p].position);
                }
                None => {
                    let _ = writeln!(out, " root");
                }
            }
        }
        out
    }
}

/// Collect the semantic (non-literal) data nodes of a skeleton in
/// statement order, positions numbered from 1.
pub fn collect_semantic_nodes(skeleton: &IrProgram) -> Vec<DataNode> {
    let mut nodes = Vec::new();
    for (stmt_index, stmt) in skeleton.statements.iter().enumerate() {
        collect_in(stmt, stmt_index, &mut nodes);
    }
    for (i, node) in nodes.iter_mut().enumerate() {
        node.position = i + 1;
    }
    nodes
}

fn collect_in(node: &IrNode, stmt_index: usize, out: &mut Vec<DataNode>) {
    if let Some(dt) = node.data_type {
        if node.is_data_leaf() && !dt.is_literal() {
            out.push(DataNode {
                node_id: node.id,
                data_type: dt,
                stmt_index,
                position: 0,
            });
        }
    }
    if let Some(l) = &node.left {
        collect_in(l, stmt_index, out);
    }
    if let Some(r) = &node.right {
        collect_in(r, stmt_index, out);
    }
}

/// Build a dependency graph: for every node whose type matches some rule's
/// source, collect candidate parents of the rule's target type positioned
/// before it (same statement for intraStmt, earlier statements for
/// interStmt), then attach one edge. When several rules have candidates,
/// one is chosen at random; `nearest` picks the closest preceding
/// candidate, `any` a uniform one. Unmatched nodes stay roots.
pub fn build_dependency_graph(
    skeleton: &IrProgram,
    rules: &[RelationRule],
    rng: &mut impl Rng,
) -> DependencyGraph {
    let nodes = collect_semantic_nodes(skeleton);
    let mut parent = vec![None; nodes.len()];

    for i in 0..nodes.len() {
        let node = nodes[i];
        // rules that apply to this node and have at least one candidate
        let mut viable: Vec<(&RelationRule, Vec<usize>)> = Vec::new();
        for rule in rules.iter().filter(|r| r.source == node.data_type) {
            let candidates: Vec<usize> = (0..i)
                .filter(|&j| {
                    let cand = nodes[j];
                    cand.data_type == rule.target
                        && match rule.scope {
                            RuleScope::IntraStmt => cand.stmt_index == node.stmt_index,
                            RuleScope::InterStmt => cand.stmt_index < node.stmt_index,
                        }
                })
                .collect();
            if !candidates.is_empty() {
                viable.push((rule, candidates));
            }
        }
        if viable.is_empty() {
            continue;
        }
        let (rule, candidates) = &viable[rng.gen_range(0..viable.len())];
        let chosen = match rule.choice {
            RuleChoice::Nearest => *candidates.last().unwrap(),
            RuleChoice::Any => candidates[rng.gen_range(0..candidates.len())],
        };
        parent[i] = Some(chosen);
    }

    DependencyGraph { nodes, parent }
}
