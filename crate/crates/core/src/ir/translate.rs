//! AST to IR translation.
//!
//! Children are translated depth-first. A node with at most two child slots
//! becomes one IR node whose keywords partition into prefix (before the
//! left operand), interfix (between the operands) and suffix (after the
//! right one). A node with more child slots queues its children and merges
//! them pairwise, left-associatively, through `Unknown`-typed intermediates
//! until one IR remains; the first pop always becomes the left operand.
//! A production with a designated tail slot keeps that slot as the typed
//! node's right operand (empty when the clause is absent), which is how an
//! optional trailing clause like ORDER BY stays graftable at the root.

use super::{IrNode, IrProgram, Operator};
use crate::grammar::{AstNode, NodeKind, Program};

/// Translate an annotated program. Total over parser output: every AST the
/// parser produces translates.
pub fn ast_to_ir(program: &Program) -> IrProgram {
    IrProgram {
        statements: program.statements.iter().map(translate_node).collect(),
    }
}

fn join_run(run: &[String]) -> String {
    run.join(" ")
}

fn translate_node(ast: &AstNode) -> IrNode {
    if let Some(text) = &ast.token_text {
        return IrNode::data(
            ast.kind,
            text.clone(),
            ast.data_type
                .expect("data leaves are annotated before translation"),
        );
    }

    let n = ast.slots.len();
    let (body_len, tail) = if ast.tail {
        debug_assert!(n >= 1);
        let tail_ir = ast.slots[n - 1]
            .as_ref()
            .map(|c| Box::new(translate_node(c)));
        (n - 1, Some(tail_ir))
    } else {
        (n, None)
    };

    // translated body children with the keyword run preceding each slot;
    // `None` keeps the operand position of an absent optional child
    let mut items: Vec<(String, Option<IrNode>)> = (0..body_len)
        .map(|i| {
            (
                join_run(&ast.keywords[i]),
                ast.slots[i].as_ref().map(translate_node),
            )
        })
        .collect();

    // run after the last body slot, then (for tail productions) the run
    // after the tail slot
    let after_body = join_run(&ast.keywords[body_len]);
    let after_tail = if ast.tail {
        join_run(&ast.keywords[n])
    } else {
        String::new()
    };

    let mut root = IrNode::new(ast.kind);

    let two_direct = tail.is_none() && items.len() == 2;
    if two_direct {
        let (pre_r, right) = items.pop().unwrap();
        let (pre_l, left) = items.pop().unwrap();
        root.op.prefix = pre_l;
        root.op.mid = pre_r;
        root.op.suffix = after_body;
        root.left = left.map(Box::new);
        root.right = right.map(Box::new);
    } else {
        match items.len() {
            0 => {
                root.op.prefix = after_body;
            }
            1 => {
                let (pre, child) = items.pop().unwrap();
                root.op.prefix = pre;
                root.op.mid = after_body;
                root.left = child.map(Box::new);
            }
            _ => {
                let (prefix, chain) = fold_unknowns(items);
                root.op.prefix = prefix;
                root.op.mid = after_body;
                root.left = Some(Box::new(chain));
            }
        }
    }
    if let Some(tail_ir) = tail {
        root.op.suffix = after_tail;
        root.right = tail_ir;
    }
    root
}

/// Merge queued children pairwise into a left-associative `Unknown` chain.
/// Returns the keyword run preceding the first child (the future prefix of
/// the typed node) and the chain root. Folded productions have no absent
/// slots: only fixed-arity two-slot productions declare optionals.
fn fold_unknowns(items: Vec<(String, Option<IrNode>)>) -> (String, IrNode) {
    let mut queue: std::collections::VecDeque<(String, IrNode)> = items
        .into_iter()
        .map(|(run, ir)| (run, ir.expect("folded productions have present children")))
        .collect();
    let (first_run, first) = queue.pop_front().unwrap();
    let mut acc = first;
    while let Some((run, next)) = queue.pop_front() {
        let mut merged = IrNode::new(NodeKind::Unknown);
        merged.op = Operator {
            prefix: String::new(),
            mid: run,
            suffix: String::new(),
        };
        merged.left = Some(Box::new(acc));
        merged.right = Some(Box::new(next));
        acc = merged;
    }
    (first_run, acc)
}

#[cfg(test)]
mod tests {
    use crate::grammar::{parse_annotated, DataType, NodeKind};
    use crate::ir::ast_to_ir;

    #[test]
    fn running_example_matches_published_structure() {
        let prog = parse_annotated("SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;").unwrap();
        let ir = ast_to_ir(&prog);
        assert_eq!(ir.statements.len(), 1);
        let root = &ir.statements[0];

        // root: SelectStmt with an empty right operand
        assert_eq!(root.ir_type, NodeKind::SelectStmt);
        assert!(root.right.is_none());
        assert!(root.op.is_empty());

        // two Unknown intermediates chain the three clauses
        let vb = root.left.as_ref().unwrap();
        assert_eq!(vb.ir_type, NodeKind::Unknown);
        let va = vb.left.as_ref().unwrap();
        assert_eq!(va.ir_type, NodeKind::Unknown);
        assert_eq!(vb.right.as_ref().unwrap().ir_type, NodeKind::WhereClause);
        assert_eq!(va.left.as_ref().unwrap().ir_type, NodeKind::SelectClause);
        assert_eq!(va.right.as_ref().unwrap().ir_type, NodeKind::FromClause);

        let mut unknowns = 0;
        root.walk(&mut |n| {
            if n.ir_type == NodeKind::Unknown {
                unknowns += 1;
            }
        });
        assert_eq!(unknowns, 2);

        // select clause: empty DISTINCT slot, SELECT as operator prefix
        let select = va.left.as_ref().unwrap();
        assert!(select.left.is_none());
        assert_eq!(select.op.prefix, "SELECT");
        let list = select.right.as_ref().unwrap();
        assert_eq!(list.ir_type, NodeKind::SelectList);
        assert_eq!(list.op.mid, ",");

        // column leaf: data and type, no operands, no operator
        let expr = list.left.as_ref().unwrap();
        assert_eq!(expr.ir_type, NodeKind::Expr);
        let col_ref = expr.left.as_ref().unwrap();
        assert_eq!(col_ref.ir_type, NodeKind::ColumnRef);
        let leaf = col_ref.left.as_ref().unwrap();
        assert_eq!(leaf.ir_type, NodeKind::Column);
        assert_eq!(leaf.data_value.as_deref(), Some("c2"));
        assert_eq!(leaf.data_type, Some(DataType::UseAnyColumn));
        assert!(leaf.left.is_none() && leaf.right.is_none());
        assert!(leaf.op.is_empty());
    }

    #[test]
    fn order_by_sits_in_the_root_right_slot() {
        let prog = parse_annotated("SELECT a FROM t ORDER BY a;").unwrap();
        let ir = ast_to_ir(&prog);
        let root = &ir.statements[0];
        assert_eq!(root.ir_type, NodeKind::SelectStmt);
        assert_eq!(
            root.right.as_ref().map(|n| n.ir_type),
            Some(NodeKind::OrderByClause)
        );
    }

    #[test]
    fn single_leaf_statement_translates_to_small_tree() {
        let prog = parse_annotated("PRAGMA integrity_check;").unwrap();
        let ir = ast_to_ir(&prog);
        let root = &ir.statements[0];
        assert_eq!(root.ir_type, NodeKind::PragmaStmt);
        assert_eq!(root.op.prefix, "PRAGMA");
        let leaf = root.left.as_ref().unwrap();
        assert_eq!(leaf.data_value.as_deref(), Some("integrity_check"));
        assert!(root.right.is_none());
    }

    #[test]
    fn arity_bound_holds_and_wide_nodes_produce_unknowns() {
        let prog =
            parse_annotated("SELECT a, b, c, d, e FROM t WHERE a = 1 GROUP BY b HAVING c > 0;")
                .unwrap();
        let ir = ast_to_ir(&prog);
        let mut unknowns = 0;
        ir.walk(&mut |n| {
            if n.ir_type == NodeKind::Unknown {
                unknowns += 1;
            }
            // a right operand never appears without operands being
            // representable: leaves carry no children at all
            if n.is_data_leaf() {
                assert!(n.left.is_none() && n.right.is_none());
                assert!(n.op.is_empty());
            }
        });
        assert!(unknowns >= 4, "5-wide select list plus 4 core clauses");
    }
}
