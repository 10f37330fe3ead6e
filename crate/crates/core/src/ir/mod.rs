//! Two-operand IR for SQL queries.
//!
//! Each node has a structure type, a three-part operator (prefix, interfix,
//! suffix), at most two operands and optional data. Data-carrying leaves
//! have no operands and no operator parts. AST nodes with more than two
//! children are reduced through `Unknown`-typed intermediates, so every
//! tree honors the two-operand bound and mutation only ever has to handle
//! two values.

mod render;
mod translate;

pub use render::{dump_program, ir_to_sql, ir_to_sql_with, render_node};
pub use translate::ast_to_ir;

use crate::grammar::{DataType, NodeKind};
use std::sync::atomic::{AtomicU64, Ordering};

pub type NodeId = u64;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub fn fresh_id() -> NodeId {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Look an IR type up by its dump/snapshot name.
pub fn type_by_name(name: &str) -> Option<NodeKind> {
    ALL_TYPES.iter().copied().find(|k| k.name() == name)
}

const ALL_TYPES: &[NodeKind] = &[
    NodeKind::CreateTableStmt,
    NodeKind::CreateViewStmt,
    NodeKind::CreateIndexStmt,
    NodeKind::CreateVirtualTableStmt,
    NodeKind::CreateTriggerStmt,
    NodeKind::InsertStmt,
    NodeKind::SelectStmt,
    NodeKind::CompoundSelect,
    NodeKind::UpdateStmt,
    NodeKind::DeleteStmt,
    NodeKind::DropStmt,
    NodeKind::PragmaStmt,
    NodeKind::WithClause,
    NodeKind::CommonTableExpr,
    NodeKind::CteHead,
    NodeKind::SelectClause,
    NodeKind::DistinctSpec,
    NodeKind::SelectList,
    NodeKind::SelectItem,
    NodeKind::StarItem,
    NodeKind::FromClause,
    NodeKind::SubqueryTable,
    NodeKind::TableJoin,
    NodeKind::JoinRhs,
    NodeKind::OnConstraint,
    NodeKind::UsingConstraint,
    NodeKind::WhereClause,
    NodeKind::GroupByClause,
    NodeKind::HavingClause,
    NodeKind::OrderByClause,
    NodeKind::OrderingTerm,
    NodeKind::LimitClause,
    NodeKind::SelectTail,
    NodeKind::ColumnDefList,
    NodeKind::ColumnDef,
    NodeKind::ColumnConstraints,
    NodeKind::TypeSize,
    NodeKind::RefTarget,
    NodeKind::TableConstraint,
    NodeKind::IndexedColumnList,
    NodeKind::ViewTarget,
    NodeKind::OnTarget,
    NodeKind::TriggerTail,
    NodeKind::TriggerBody,
    NodeKind::InsertTarget,
    NodeKind::ColumnNameList,
    NodeKind::ValuesClause,
    NodeKind::ValueRow,
    NodeKind::DefaultValues,
    NodeKind::UpsertClause,
    NodeKind::SetClause,
    NodeKind::Assignment,
    NodeKind::PragmaValue,
    NodeKind::Expr,
    NodeKind::BinaryExpr,
    NodeKind::UnaryExpr,
    NodeKind::ParenExpr,
    NodeKind::ColumnRef,
    NodeKind::FunctionCall,
    NodeKind::FunctionArgs,
    NodeKind::InExpr,
    NodeKind::InList,
    NodeKind::SubqueryExpr,
    NodeKind::ExistsExpr,
    NodeKind::BetweenExpr,
    NodeKind::CaseExpr,
    NodeKind::WhenClause,
    NodeKind::CastExpr,
    NodeKind::IsNullExpr,
    NodeKind::NullLiteral,
    NodeKind::Table,
    NodeKind::Column,
    NodeKind::Index,
    NodeKind::View,
    NodeKind::Trigger,
    NodeKind::FunctionName,
    NodeKind::IntLiteral,
    NodeKind::FloatLiteral,
    NodeKind::StringLiteral,
    NodeKind::Unknown,
];

/// Keyword parts of an IR operation: `prefix` renders before the left
/// operand, `mid` between the operands and `suffix` after the right one.
/// Multiple keywords are space-joined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Operator {
    pub prefix: String,
    pub mid: String,
    pub suffix: String,
}

impl Operator {
    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.mid.is_empty() && self.suffix.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct IrNode {
    pub id: NodeId,
    pub ir_type: NodeKind,
    pub op: Operator,
    pub left: Option<Box<IrNode>>,
    pub right: Option<Box<IrNode>>,
    pub data_value: Option<String>,
    pub data_type: Option<DataType>,
}

impl IrNode {
    pub fn new(ir_type: NodeKind) -> IrNode {
        IrNode {
            id: fresh_id(),
            ir_type,
            op: Operator::default(),
            left: None,
            right: None,
            data_value: None,
            data_type: None,
        }
    }

    pub fn data(ir_type: NodeKind, value: impl Into<String>, data_type: DataType) -> IrNode {
        IrNode {
            id: fresh_id(),
            ir_type,
            op: Operator::default(),
            left: None,
            right: None,
            data_value: Some(value.into()),
            data_type: Some(data_type),
        }
    }

    pub fn is_data_leaf(&self) -> bool {
        self.data_value.is_some()
    }

    /// Structurally equal copy with fresh node ids and no sharing.
    pub fn deep_copy(&self) -> IrNode {
        IrNode {
            id: fresh_id(),
            ir_type: self.ir_type,
            op: self.op.clone(),
            left: self.left.as_ref().map(|n| Box::new(n.deep_copy())),
            right: self.right.as_ref().map(|n| Box::new(n.deep_copy())),
            data_value: self.data_value.clone(),
            data_type: self.data_type,
        }
    }

    /// Pre-order walk over the subtree rooted here.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a IrNode)) {
        f(self);
        if let Some(l) = &self.left {
            l.walk(f);
        }
        if let Some(r) = &self.right {
            r.walk(f);
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Structural equality: compares types, operator parts (keyword case
    /// ignored), data values and data types, recursively. Node ids are
    /// plumbing and do not participate.
    pub fn structural_eq(&self, other: &IrNode) -> bool {
        fn op_eq(a: &str, b: &str) -> bool {
            a.eq_ignore_ascii_case(b)
        }
        fn slot_eq(a: &Option<Box<IrNode>>, b: &Option<Box<IrNode>>) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => x.structural_eq(y),
                _ => false,
            }
        }
        self.ir_type == other.ir_type
            && op_eq(&self.op.prefix, &other.op.prefix)
            && op_eq(&self.op.mid, &other.op.mid)
            && op_eq(&self.op.suffix, &other.op.suffix)
            && self.data_value == other.data_value
            && self.data_type == other.data_type
            && slot_eq(&self.left, &other.left)
            && slot_eq(&self.right, &other.right)
    }
}

/// A translated program: one root node per SQL statement.
#[derive(Debug, Clone, Default)]
pub struct IrProgram {
    pub statements: Vec<IrNode>,
}

impl IrProgram {
    pub fn deep_copy(&self) -> IrProgram {
        IrProgram {
            statements: self.statements.iter().map(|s| s.deep_copy()).collect(),
        }
    }

    pub fn structural_eq(&self, other: &IrProgram) -> bool {
        self.statements.len() == other.statements.len()
            && self
                .statements
                .iter()
                .zip(other.statements.iter())
                .all(|(a, b)| a.structural_eq(b))
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a IrNode)) {
        for stmt in &self.statements {
            stmt.walk(f);
        }
    }

    pub fn node_count(&self) -> usize {
        self.statements.iter().map(|s| s.node_count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_annotated;

    #[test]
    fn deep_copy_is_isolated_and_fresh() {
        let prog = parse_annotated("SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;").unwrap();
        let ir = ast_to_ir(&prog);
        let root = &ir.statements[0];
        let mut copy = root.deep_copy();
        assert!(copy.structural_eq(root));
        assert_ne!(copy.id, root.id);
        // ids fresh everywhere, not just at the root
        let mut orig_ids = std::collections::HashSet::new();
        root.walk(&mut |n| {
            orig_ids.insert(n.id);
        });
        copy.walk(&mut |n| assert!(!orig_ids.contains(&n.id)));
        // mutating the copy leaves the original untouched
        copy.left = None;
        assert!(ir.statements[0].left.is_some());
    }

    #[test]
    fn ids_unique_across_program() {
        let prog = parse_annotated("CREATE TABLE t (a, b); SELECT a FROM t;").unwrap();
        let ir = ast_to_ir(&prog);
        let mut seen = std::collections::HashSet::new();
        ir.walk(&mut |n| assert!(seen.insert(n.id)));
    }

    #[test]
    fn structural_eq_ignores_keyword_case() {
        let a = ast_to_ir(&parse_annotated("select a from t").unwrap());
        let b = ast_to_ir(&parse_annotated("SELECT a FROM t").unwrap());
        assert!(a.structural_eq(&b));
    }

    #[test]
    fn structural_eq_sees_value_differences() {
        let a = ast_to_ir(&parse_annotated("SELECT a FROM t").unwrap());
        let b = ast_to_ir(&parse_annotated("SELECT b FROM t").unwrap());
        assert!(!a.structural_eq(&b));
    }
}
