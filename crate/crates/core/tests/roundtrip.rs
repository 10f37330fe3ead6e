//! Corpus-wide pipeline round trips.

use squirrelkit::grammar::{parse_annotated, token_equal};
use squirrelkit::ir::{ast_to_ir, ir_to_sql};
use std::path::PathBuf;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_queries() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory exists")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .collect();
    paths.sort();
    for path in paths {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        out.push((name, text));
    }
    out
}

#[test]
fn corpus_is_large_enough() {
    assert!(corpus_queries().len() >= 200);
}

#[test]
fn every_corpus_query_round_trips_with_identical_ir() {
    for (name, sql) in corpus_queries() {
        let prog = parse_annotated(&sql).unwrap_or_else(|e| panic!("{name}: {e}"));
        let first = ast_to_ir(&prog);
        let rendered = ir_to_sql(&first);
        assert!(
            token_equal(&sql, &rendered),
            "{name}: rendering drifted\n  in:  {sql}\n  out: {rendered}"
        );
        let reparsed = parse_annotated(&rendered).unwrap_or_else(|e| panic!("{name} reparse: {e}"));
        let second = ast_to_ir(&reparsed);
        assert!(
            first.structural_eq(&second),
            "{name}: retranslated IR differs"
        );
    }
}

#[test]
fn annotation_is_total_over_the_corpus() {
    // parse_annotated already panics internally if a rule is missing; walk
    // the leaves to double-check every one carries a type
    for (name, sql) in corpus_queries() {
        let prog = parse_annotated(&sql).unwrap();
        for stmt in &prog.statements {
            let mut stack = vec![stmt];
            while let Some(node) = stack.pop() {
                if node.token_text.is_some() {
                    assert!(node.data_type.is_some(), "{name}: untyped leaf");
                }
                stack.extend(node.children());
            }
        }
    }
}
