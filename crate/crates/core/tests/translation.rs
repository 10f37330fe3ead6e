//! Golden tests for AST-to-IR translation and the textual dump format.

use squirrelkit::grammar::{parse_annotated, token_equal};
use squirrelkit::ir::{ast_to_ir, dump_program, ir_to_sql};

const RUNNING_EXAMPLE: &str = "SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;";

#[test]
fn golden_dump_of_running_example() {
    let prog = parse_annotated(RUNNING_EXAMPLE).unwrap();
    let ir = ast_to_ir(&prog);
    let expected = "\
V1 = (Column, l=0, r=0, op=0, d=\"c2\", t=ColumnName);
V2 = (ColumnRef, l=V1, r=0, op=0, d=0);
V3 = (Expr, l=V2, r=0, op=0, d=0);
V4 = (Column, l=0, r=0, op=0, d=\"c6\", t=ColumnName);
V5 = (ColumnRef, l=V4, r=0, op=0, d=0);
V6 = (Expr, l=V5, r=0, op=0, d=0);
V7 = (SelectList, l=V3, r=V6, op.mid=\",\", d=0);
V8 = (SelectClause, l=0, r=V7, op.prefix=\"SELECT\", d=0);
V9 = (Table, l=0, r=0, op=0, d=\"t1\", t=TableName);
V10 = (Table, l=0, r=0, op=0, d=\"t2\", t=TableName);
V11 = (FromClause, l=V9, r=V10, op.prefix=\"FROM\", op.mid=\",\", d=0);
V12 = (Unknown, l=V8, r=V11, op=0, d=0);
V13 = (Table, l=0, r=0, op=0, d=\"t1\", t=TableName);
V14 = (Column, l=0, r=0, op=0, d=\"c1\", t=ColumnName);
V15 = (ColumnRef, l=V13, r=V14, op.mid=\".\", d=0);
V16 = (Table, l=0, r=0, op=0, d=\"t2\", t=TableName);
V17 = (Column, l=0, r=0, op=0, d=\"c5\", t=ColumnName);
V18 = (ColumnRef, l=V16, r=V17, op.mid=\".\", d=0);
V19 = (BinaryExpr, l=V15, r=V18, op.mid=\"=\", d=0);
V20 = (Expr, l=V19, r=0, op=0, d=0);
V21 = (WhereClause, l=V20, r=0, op.prefix=\"WHERE\", d=0);
V22 = (Unknown, l=V12, r=V21, op=0, d=0);
V23 = (SelectStmt, l=V22, r=0, op=0, d=0);
";
    assert_eq!(dump_program(&ir), expected);
}

#[test]
fn rendered_sql_is_token_equal_to_source() {
    let prog = parse_annotated(RUNNING_EXAMPLE).unwrap();
    let sql = ir_to_sql(&ast_to_ir(&prog));
    assert_eq!(sql, "SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;");
    assert!(token_equal(RUNNING_EXAMPLE, &sql));
}

#[test]
fn retranslation_is_idempotent() {
    // translating the rendered SQL again yields a structurally identical
    // program, Unknown nodes included
    for sql in [
        RUNNING_EXAMPLE,
        "CREATE TABLE t1 (c1 INTEGER PRIMARY KEY, c2 TEXT)",
        "SELECT a, b, c FROM t WHERE a > 1 GROUP BY b ORDER BY c LIMIT 3",
        "INSERT INTO t (a, b) VALUES (1, 'x') ON CONFLICT DO NOTHING",
        "WITH w AS (SELECT 1) SELECT * FROM w UNION ALL SELECT 2",
    ] {
        let first = ast_to_ir(&parse_annotated(sql).unwrap());
        let rendered = ir_to_sql(&first);
        let second = ast_to_ir(&parse_annotated(&rendered).unwrap());
        assert!(
            first.structural_eq(&second),
            "retranslation changed structure for {sql:?}:\n{}\nvs\n{}",
            dump_program(&first),
            dump_program(&second),
        );
        assert!(token_equal(sql, &rendered), "render drifted for {sql:?}");
    }
}
