//! Position-based semantic annotation.
//!
//! Every identifier/literal leaf receives exactly one [`DataType`], computed
//! from its ancestor chain and sibling position. Keyword-only nodes carry
//! none. The mapping is total over everything the parser can produce; a gap
//! surfaces as [`AnnotationError`] naming the production.

use super::ast::{AstNode, NodeKind, Program};
use super::{AnnotationError, DataType};

/// What a data leaf in the current position denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LeafRole {
    /// Plain expression position: literals, bare column references,
    /// function arguments.
    Expr,
    DefineTable,
    DefineView,
    DefineIndex,
    DefineTrigger,
    DefineColumn,
    /// Table listed in a FROM clause; may resolve to any defined table.
    FromTable,
    /// Table named directly by the statement (INSERT/UPDATE/DELETE/ON ...);
    /// columns nearby resolve through it.
    DirectTable,
    QualifiedTable,
    QualifiedColumn,
    /// Column that belongs to the statement's direct table.
    TableColumn,
    /// Column resolvable through any table in scope (USING lists,
    /// foreign-key targets).
    AnyColumn,
    Function,
    /// DROP target; the refined type follows the leaf kind.
    Drop,
}

#[derive(Debug, Clone, Copy)]
struct Ctx {
    role: LeafRole,
    /// Inside a CREATE TABLE definition list bare columns refer to sibling
    /// columns of the table being defined.
    in_table_defs: bool,
}

impl Ctx {
    const NEUTRAL: Ctx = Ctx {
        role: LeafRole::Expr,
        in_table_defs: false,
    };

    fn with_role(self, role: LeafRole) -> Ctx {
        Ctx { role, ..self }
    }

    /// Default context for a child: the parental role never leaks into
    /// unrelated subtrees.
    fn descend(self) -> Ctx {
        Ctx {
            role: LeafRole::Expr,
            in_table_defs: self.in_table_defs,
        }
    }
}

/// Annotate every data leaf of the program in place.
pub fn annotate(program: &mut Program) -> Result<(), AnnotationError> {
    for stmt in &mut program.statements {
        walk(stmt, Ctx::NEUTRAL)?;
    }
    Ok(())
}

fn walk(node: &mut AstNode, ctx: Ctx) -> Result<(), AnnotationError> {
    if node.is_leaf() {
        node.data_type = Some(leaf_type(node.kind, ctx)?);
        return Ok(());
    }
    let kind = node.kind;
    let two_part_ref = kind == NodeKind::ColumnRef && node.slots.len() == 2;
    for (i, slot) in node.slots.iter_mut().enumerate() {
        let Some(child) = slot.as_mut() else { continue };
        let child_ctx = child_context(kind, i, ctx, child.kind, two_part_ref);
        walk(child, child_ctx)?;
    }
    Ok(())
}

/// The annotation rule table: context handed to slot `i` of `parent`.
fn child_context(
    parent: NodeKind,
    slot: usize,
    ctx: Ctx,
    child: NodeKind,
    two_part_ref: bool,
) -> Ctx {
    use LeafRole::*;
    match parent {
        NodeKind::CreateTableStmt | NodeKind::CreateVirtualTableStmt => match slot {
            0 => ctx.descend().with_role(DefineTable),
            _ if child == NodeKind::ColumnDefList => Ctx {
                role: Expr,
                in_table_defs: true,
            },
            _ => Ctx::NEUTRAL,
        },
        NodeKind::ViewTarget => match slot {
            0 => ctx.descend().with_role(DefineView),
            _ => ctx.descend().with_role(DefineColumn),
        },
        NodeKind::CteHead => match slot {
            0 => ctx.descend().with_role(DefineTable),
            _ => ctx.descend().with_role(DefineColumn),
        },
        NodeKind::CreateIndexStmt => match slot {
            0 => ctx.descend().with_role(DefineIndex),
            _ => ctx.descend(),
        },
        NodeKind::OnTarget => match slot {
            0 => ctx.descend().with_role(DirectTable),
            _ => ctx.descend().with_role(TableColumn),
        },
        NodeKind::CreateTriggerStmt => match slot {
            0 => ctx.descend().with_role(DefineTrigger),
            _ => ctx.descend(),
        },
        NodeKind::TriggerTail => match slot {
            0 => ctx.descend().with_role(DirectTable),
            _ => Ctx::NEUTRAL,
        },
        NodeKind::TriggerBody => Ctx::NEUTRAL,
        NodeKind::InsertTarget => match slot {
            0 => ctx.descend().with_role(DirectTable),
            _ => ctx.descend().with_role(TableColumn),
        },
        NodeKind::UpdateStmt => match slot {
            0 => ctx.descend().with_role(DirectTable),
            _ => ctx.descend(),
        },
        NodeKind::Assignment => match slot {
            0 => ctx.descend().with_role(TableColumn),
            _ => ctx.descend(),
        },
        NodeKind::DeleteStmt => match slot {
            0 => ctx.descend().with_role(DirectTable),
            _ => ctx.descend(),
        },
        NodeKind::DropStmt => ctx.descend().with_role(Drop),
        NodeKind::PragmaStmt => match slot {
            0 => ctx.descend().with_role(Function),
            _ => ctx.descend(),
        },
        NodeKind::FromClause | NodeKind::TableJoin | NodeKind::JoinRhs => {
            if child == NodeKind::Table {
                ctx.descend().with_role(FromTable)
            } else {
                ctx.descend()
            }
        }
        NodeKind::UsingConstraint => ctx.descend().with_role(AnyColumn),
        NodeKind::ColumnRef => {
            if two_part_ref {
                match slot {
                    0 => ctx.descend().with_role(QualifiedTable),
                    _ => ctx.descend().with_role(QualifiedColumn),
                }
            } else {
                // bare reference: typed by leaf_type under the Expr role
                ctx.descend()
            }
        }
        NodeKind::SelectItem => match slot {
            0 => ctx.descend(),
            _ => ctx.descend().with_role(DefineColumn),
        },
        NodeKind::ColumnDef => match slot {
            0 => ctx.descend().with_role(DefineColumn),
            _ => ctx,
        },
        NodeKind::TableConstraint => {
            if child == NodeKind::ColumnNameList {
                ctx.descend().with_role(TableColumn)
            } else {
                ctx
            }
        }
        NodeKind::RefTarget => match slot {
            0 => ctx.descend().with_role(FromTable),
            _ => ctx.descend().with_role(AnyColumn),
        },
        NodeKind::IndexedColumnList => ctx.descend().with_role(TableColumn),
        NodeKind::FunctionCall => match slot {
            0 => ctx.descend().with_role(Function),
            _ => ctx.descend(),
        },
        // subqueries leave any definition-list scope
        NodeKind::SubqueryExpr | NodeKind::SubqueryTable => Ctx::NEUTRAL,
        // name lists inherit the role their parent assigned
        NodeKind::ColumnNameList => ctx,
        _ => ctx.descend(),
    }
}

fn leaf_type(leaf: NodeKind, ctx: Ctx) -> Result<DataType, AnnotationError> {
    use LeafRole::*;
    let missing = |role: LeafRole| AnnotationError {
        production: format!("{} leaf in {:?} position", leaf.name(), role),
    };
    match leaf {
        NodeKind::IntLiteral => Ok(DataType::LiteralInt),
        NodeKind::FloatLiteral => Ok(DataType::LiteralFloat),
        NodeKind::StringLiteral => Ok(DataType::LiteralString),
        NodeKind::FunctionName => Ok(DataType::UseFunction),
        NodeKind::Table => match ctx.role {
            DefineTable => Ok(DataType::CreateTable),
            FromTable => Ok(DataType::UseAnyTable),
            DirectTable | QualifiedTable => Ok(DataType::UseFromTable),
            Drop => Ok(DataType::DropTable),
            role => Err(missing(role)),
        },
        NodeKind::View => match ctx.role {
            DefineView => Ok(DataType::CreateView),
            Drop => Ok(DataType::DropView),
            role => Err(missing(role)),
        },
        NodeKind::Index => match ctx.role {
            DefineIndex => Ok(DataType::CreateIndex),
            Drop => Ok(DataType::DropIndex),
            role => Err(missing(role)),
        },
        NodeKind::Trigger => match ctx.role {
            DefineTrigger => Ok(DataType::CreateTrigger),
            Drop => Ok(DataType::DropTrigger),
            role => Err(missing(role)),
        },
        NodeKind::Column => match ctx.role {
            DefineColumn => Ok(DataType::CreateColumn),
            QualifiedColumn | TableColumn => Ok(DataType::UseTableColumn),
            AnyColumn => Ok(DataType::UseAnyColumn),
            Expr => Ok(if ctx.in_table_defs {
                DataType::UseTableColumn
            } else {
                DataType::UseAnyColumn
            }),
            role => Err(missing(role)),
        },
        other => Err(AnnotationError {
            production: format!("{} is not a data leaf", other.name()),
        }),
    }
}

/// Parse and annotate in one step.
pub fn parse_annotated(sql: &str) -> Result<Program, super::SyntaxError> {
    let mut prog = super::parse(sql)?;
    annotate(&mut prog).expect("annotation is total over parser output");
    Ok(prog)
}
