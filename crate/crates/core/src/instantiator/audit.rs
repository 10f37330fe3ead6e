//! Standalone lifetime scanner.
//!
//! Re-derives define/use/drop facts from the final query text alone and
//! checks that every used name was defined by an earlier statement (or
//! within the same statement) and not yet dropped. Dropping a table or
//! view retires its recorded columns too. The scanner shares only the
//! parser and annotator with the instantiator, never its name state, so it
//! serves as an independent check on emitted queries.

use crate::grammar::{parse_annotated, AstNode, DataType, ElementKind, Role, SyntaxError};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifetimeViolation {
    pub stmt_index: usize,
    pub name: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    UseBeforeDefine,
    UseAfterDrop,
}

#[derive(Debug, Default)]
struct Scanner {
    /// live names per element kind
    live: HashMap<ElementKind, HashSet<String>>,
    /// ever-defined names per element kind, to tell use-after-drop from
    /// use-before-define
    defined: HashMap<ElementKind, HashSet<String>>,
    /// container name -> element names recorded under it
    elements: HashMap<String, Vec<String>>,
    violations: Vec<LifetimeViolation>,
}

impl Scanner {
    fn define(&mut self, kind: ElementKind, name: &str, container: Option<&str>) {
        self.live.entry(kind).or_default().insert(name.to_string());
        self.defined
            .entry(kind)
            .or_default()
            .insert(name.to_string());
        if let Some(c) = container {
            self.elements
                .entry(c.to_string())
                .or_default()
                .push(name.to_string());
        }
    }

    fn check_use(&mut self, stmt_index: usize, kind: ElementKind, name: &str) {
        // table and view namespaces are interchangeable at use sites
        let spaces: &[ElementKind] = match kind {
            ElementKind::Table | ElementKind::View => &[ElementKind::Table, ElementKind::View],
            k => &[k][..],
        };
        let alive = spaces
            .iter()
            .any(|k| self.live.get(k).is_some_and(|s| s.contains(name)));
        if alive {
            return;
        }
        let was_defined = spaces
            .iter()
            .any(|k| self.defined.get(k).is_some_and(|s| s.contains(name)));
        self.violations.push(LifetimeViolation {
            stmt_index,
            name: name.to_string(),
            kind: if was_defined {
                ViolationKind::UseAfterDrop
            } else {
                ViolationKind::UseBeforeDefine
            },
        });
    }

    fn drop_name(&mut self, kind: ElementKind, name: &str) {
        let spaces: &[ElementKind] = match kind {
            ElementKind::Table | ElementKind::View => &[ElementKind::Table, ElementKind::View],
            k => &[k][..],
        };
        for k in spaces {
            if let Some(set) = self.live.get_mut(k) {
                set.remove(name);
            }
        }
        if let Some(children) = self.elements.remove(name) {
            for child in children {
                // recorded elements of my grammar are always columns
                if let Some(set) = self.live.get_mut(&ElementKind::Column) {
                    set.remove(&child);
                }
            }
        }
    }
}

#[derive(Default)]
struct StmtFacts {
    defines: Vec<(ElementKind, String, Option<String>)>,
    uses: Vec<(ElementKind, String)>,
    drops: Vec<(ElementKind, String)>,
}

/// Scan a query and report every lifetime violation, in statement order.
pub fn audit_lifetimes(sql: &str) -> Result<Vec<LifetimeViolation>, SyntaxError> {
    let prog = parse_annotated(sql)?;
    let mut scanner = Scanner::default();
    for (stmt_index, stmt) in prog.statements.iter().enumerate() {
        let mut facts = StmtFacts::default();
        // the statement's defining container (CREATE TABLE/VIEW name) owns
        // the columns defined inside it
        let mut container: Option<String> = None;
        collect_facts(stmt, &mut facts, &mut container);
        // same-statement defines are visible to the whole statement
        for (kind, name, owner) in &facts.defines {
            scanner.define(*kind, name, owner.as_deref());
        }
        for (kind, name) in &facts.uses {
            scanner.check_use(stmt_index, *kind, name);
        }
        for (kind, name) in &facts.drops {
            scanner.check_use(stmt_index, *kind, name);
            scanner.drop_name(*kind, name);
        }
    }
    Ok(scanner.violations)
}

fn collect_facts(node: &AstNode, facts: &mut StmtFacts, container: &mut Option<String>) {
    if let (Some(text), Some(dt)) = (&node.token_text, node.data_type) {
        record_leaf(dt, text, facts, container);
        return;
    }
    for child in node.children() {
        collect_facts(child, facts, container);
    }
}

fn record_leaf(dt: DataType, text: &str, facts: &mut StmtFacts, container: &mut Option<String>) {
    let kind = dt.kind();
    if kind.is_literal() || kind == ElementKind::FunctionName {
        return;
    }
    match dt.role() {
        Role::Define => {
            let owner = match dt {
                DataType::CreateTable | DataType::CreateView => {
                    *container = Some(text.to_string());
                    None
                }
                DataType::CreateColumn => container.clone(),
                _ => None,
            };
            facts.defines.push((kind, text.to_string(), owner));
        }
        Role::Use => facts.uses.push((kind, text.to_string())),
        Role::Delete => facts.drops.push((kind, text.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_program_has_no_violations() {
        let v = audit_lifetimes(
            "CREATE TABLE v1 (v2, v3); INSERT INTO v1 (v2) VALUES (1); \
             SELECT v2 FROM v1 WHERE v3 > 0;",
        )
        .unwrap();
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn use_before_define_is_reported() {
        let v = audit_lifetimes("SELECT a FROM b;").unwrap();
        assert!(v
            .iter()
            .any(|x| x.name == "b" && x.kind == ViolationKind::UseBeforeDefine));
    }

    #[test]
    fn use_after_drop_is_reported() {
        let v = audit_lifetimes(
            "CREATE TABLE t1 (c1); DROP TABLE t1; SELECT c1 FROM t1;",
        )
        .unwrap();
        assert!(v
            .iter()
            .any(|x| x.name == "t1" && x.kind == ViolationKind::UseAfterDrop));
        // the dropped table's column is retired with it
        assert!(v.iter().any(|x| x.name == "c1"));
    }

    #[test]
    fn same_statement_definitions_are_visible() {
        let v = audit_lifetimes("CREATE TABLE t (a, b CHECK(a > 0));").unwrap();
        assert!(v.is_empty(), "{v:?}");
        let v = audit_lifetimes("WITH w AS (SELECT 1) SELECT * FROM w;").unwrap();
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn views_count_as_tables_at_use_sites() {
        let v = audit_lifetimes(
            "CREATE TABLE t (a); CREATE VIEW w AS SELECT a FROM t; SELECT * FROM w;",
        )
        .unwrap();
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn double_drop_is_a_violation() {
        let v = audit_lifetimes("CREATE TABLE t (a); DROP TABLE t; DROP TABLE t;").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::UseAfterDrop);
    }
}
