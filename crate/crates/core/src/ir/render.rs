//! IR to SQL rendering and the textual IR dump.

use super::{IrNode, IrProgram};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Render a node: prefix, left operand, interfix, right operand, suffix.
/// Data leaves render as their value. The left operand always renders
/// before the right one.
pub fn render_node(node: &IrNode) -> String {
    let mut frags = Vec::new();
    collect(node, &None, &mut frags);
    join_fragments(&frags)
}

/// Render a whole program, statements joined with `"; "` and terminated
/// with `";"`.
pub fn ir_to_sql(program: &IrProgram) -> String {
    let mut frags = Vec::new();
    for stmt in &program.statements {
        collect(stmt, &None, &mut frags);
        frags.push(";".to_string());
    }
    join_fragments(&frags)
}

/// Render with per-node data overrides, leaving the program untouched.
/// Nodes whose id is missing from `values` render their own data value.
pub fn ir_to_sql_with(
    program: &IrProgram,
    values: &std::collections::HashMap<super::NodeId, String>,
) -> String {
    let mut frags = Vec::new();
    let overrides = Some(values);
    for stmt in &program.statements {
        collect(stmt, &overrides, &mut frags);
        frags.push(";".to_string());
    }
    join_fragments(&frags)
}

fn collect(
    node: &IrNode,
    overrides: &Option<&std::collections::HashMap<super::NodeId, String>>,
    out: &mut Vec<String>,
) {
    if let Some(value) = &node.data_value {
        let resolved = overrides
            .and_then(|m| m.get(&node.id))
            .unwrap_or(value);
        out.push(resolved.clone());
        return;
    }
    out.extend(node.op.prefix.split_whitespace().map(str::to_string));
    if let Some(l) = &node.left {
        collect(l, overrides, out);
    }
    out.extend(node.op.mid.split_whitespace().map(str::to_string));
    if let Some(r) = &node.right {
        collect(r, overrides, out);
    }
    out.extend(node.op.suffix.split_whitespace().map(str::to_string));
}

/// Single space between fragments except around punctuation.
fn join_fragments(frags: &[String]) -> String {
    let mut out = String::new();
    for frag in frags {
        let no_space_before = matches!(frag.as_str(), "," | ")" | "." | ";");
        let no_space_after = matches!(out.chars().last(), Some('(') | Some('.'));
        if !out.is_empty() && !no_space_before && !no_space_after {
            out.push(' ');
        }
        out.push_str(frag);
    }
    out
}

/// Dump a program one assignment per node, operands before their users:
///
/// ```text
/// V1 = (Column, l=0, r=0, op=0, d="c2", t=ColumnName);
/// V8 = (SelectClause, l=0, r=V7, op.prefix="SELECT", d=0);
/// ```
///
/// Numbering is assigned post-order at dump time, so it is stable for a
/// given structure regardless of internal node ids.
pub fn dump_program(program: &IrProgram) -> String {
    let mut out = String::new();
    let mut names: HashMap<u64, usize> = HashMap::new();
    let mut next = 1usize;
    for stmt in &program.statements {
        dump_node(stmt, &mut out, &mut names, &mut next);
    }
    out
}

fn dump_node(
    node: &IrNode,
    out: &mut String,
    names: &mut HashMap<u64, usize>,
    next: &mut usize,
) {
    if let Some(l) = &node.left {
        dump_node(l, out, names, next);
    }
    if let Some(r) = &node.right {
        dump_node(r, out, names, next);
    }
    let n = *next;
    *next += 1;
    names.insert(node.id, n);

    let operand = |slot: &Option<Box<IrNode>>| match slot {
        Some(c) => format!("V{}", names[&c.id]),
        None => "0".to_string(),
    };
    let mut op = String::new();
    if node.op.is_empty() {
        op.push_str("op=0");
    } else {
        let mut parts = Vec::new();
        if !node.op.prefix.is_empty() {
            parts.push(format!("op.prefix={:?}", node.op.prefix));
        }
        if !node.op.mid.is_empty() {
            parts.push(format!("op.mid={:?}", node.op.mid));
        }
        if !node.op.suffix.is_empty() {
            parts.push(format!("op.suffix={:?}", node.op.suffix));
        }
        op.push_str(&parts.join(", "));
    }
    let data = match &node.data_value {
        Some(v) => format!("d={v:?}, t={}", node.data_type.expect("typed leaf").kind().basic_name()),
        None => "d=0".to_string(),
    };
    let _ = writeln!(
        out,
        "V{} = ({}, l={}, r={}, {}, {});",
        n,
        node.ir_type.name(),
        operand(&node.left),
        operand(&node.right),
        op,
        data
    );
}

#[cfg(test)]
mod tests {
    use crate::grammar::parse_annotated;
    use crate::ir::{ast_to_ir, ir_to_sql};

    #[test]
    fn renders_running_example_token_exact() {
        let prog = parse_annotated("SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;").unwrap();
        let ir = ast_to_ir(&prog);
        assert_eq!(ir_to_sql(&ir), "SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;");
    }

    #[test]
    fn data_leaf_renders_as_its_value() {
        let prog = parse_annotated("SELECT c2").unwrap();
        let ir = ast_to_ir(&prog);
        let leaf = {
            let mut found = None;
            ir.walk(&mut |n| {
                if n.is_data_leaf() {
                    found = Some(n.data_value.clone().unwrap());
                }
            });
            found.unwrap()
        };
        assert_eq!(leaf, "c2");
        assert_eq!(super::render_node(&ir.statements[0]), "SELECT c2");
    }

    #[test]
    fn multiple_statements_join_with_semicolons() {
        let prog = parse_annotated("CREATE TABLE t (a); SELECT a FROM t;").unwrap();
        let sql = ir_to_sql(&ast_to_ir(&prog));
        assert_eq!(sql, "CREATE TABLE t (a); SELECT a FROM t;");
    }
}
