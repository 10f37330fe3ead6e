//! Semantics-guided instantiation.
//!
//! A validated skeleton carries structure and refined data types but only
//! placeholder data. This module infers the dependencies between its data
//! slots from declarative relation rules, builds a dependency forest and
//! fills the slots with concrete names and literals that satisfy it,
//! yielding an executable query.

pub mod audit;
mod fill;
mod graph;
pub mod rules;

pub use audit::{audit_lifetimes, LifetimeViolation, ViolationKind};
pub use fill::{
    instantiate, retry_instantiate, InstantiateFailure, InstantiationError, NameState,
    BUILTIN_FUNCTIONS, DEFAULT_MAX_TRIES,
};
pub use graph::{build_dependency_graph, collect_semantic_nodes, DataNode, DependencyGraph};
pub use rules::{default_rules, parse_rules, RelationKind, RelationRule, RuleChoice, RuleScope};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_annotated;
    use crate::ir::ast_to_ir;
    use crate::library::strip_data;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn skeleton_of(sql: &str) -> crate::ir::IrProgram {
        strip_data(&ast_to_ir(&parse_annotated(sql).unwrap()))
    }

    const FIG6_PROGRAM: &str = "\
CREATE TABLE x (x, x); \
CREATE TABLE x (x, x); \
CREATE TABLE x (x, x); \
SELECT x, x FROM x, x WHERE x.x = x.x;";

    /// Pin the published four-statement example: find a seed whose graph
    /// selects x1 as x12's parent and x4 (via x13) as x14's resolution,
    /// then check the instantiated query shape.
    #[test]
    fn fig7_golden_instantiation() {
        let skel = skeleton_of(FIG6_PROGRAM);
        let rules = default_rules();
        let mut pinned = None;
        for seed in 0..500u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = build_dependency_graph(&skel, &rules, &mut rng);
            // x12 -> x1, x13 -> x4, x14 -> x13 (indices are 0-based)
            if g.parent[11] == Some(0) && g.parent[12] == Some(3) && g.parent[13] == Some(12) {
                pinned = Some((seed, g));
                break;
            }
        }
        let (seed, graph) = pinned.expect("some seed pins the published graph");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let sql = instantiate(&graph, &skel, &mut rng).unwrap();

        // definitions are numbered v1..v9 in statement order
        assert!(sql.starts_with(
            "CREATE TABLE v1 (v2, v3); CREATE TABLE v4 (v5, v6); CREATE TABLE v7 (v8, v9);"
        ), "{sql}");
        // x12 inherits v1 from its parent x1; x13 inherits v4; x14 copies
        // x13's name; x15 is drawn from x14's recorded columns
        let select = sql.split("; ").nth(3).unwrap();
        assert!(select.starts_with("SELECT "), "{sql}");
        assert!(select.contains("FROM v1, v4"), "{sql}");
        assert!(
            select.contains("WHERE v4.v5") || select.contains("WHERE v4.v6"),
            "{sql}"
        );
        // and the audit agrees the lifetimes are sound
        assert!(audit_lifetimes(&sql).unwrap().is_empty());
    }

    #[test]
    fn use_before_definition_fails() {
        let skel = skeleton_of("SELECT x FROM x;");
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = build_dependency_graph(&skel, &rules, &mut rng);
        let err = instantiate(&g, &skel, &mut rng).unwrap_err();
        assert!(matches!(err, InstantiationError::UseBeforeDef(_)));
    }

    #[test]
    fn literals_draw_from_the_predefined_pool() {
        let skel = skeleton_of("CREATE TABLE x (x); INSERT INTO x (x) VALUES (1);");
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = build_dependency_graph(&skel, &rules, &mut rng);
        let sql = instantiate(&g, &skel, &mut rng).unwrap();
        let value = sql
            .rsplit_once("VALUES (")
            .and_then(|(_, rest)| rest.split(')').next())
            .unwrap()
            .trim()
            .to_string();
        let predefined = ["0", "1", "-1", "10", "0xFFFF"];
        let fresh: Result<i64, _> = value.parse();
        assert!(
            predefined.contains(&value.as_str()) || fresh.is_ok(),
            "unexpected literal {value:?} in {sql}"
        );
    }

    #[test]
    fn function_names_come_from_the_builtin_pool() {
        let skel = skeleton_of("CREATE TABLE x (x); SELECT x(x) FROM x;");
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = build_dependency_graph(&skel, &rules, &mut rng);
            let sql = instantiate(&g, &skel, &mut rng).unwrap();
            let called = sql
                .split("SELECT ")
                .nth(1)
                .unwrap()
                .split(' ')
                .next()
                .unwrap()
                .to_string();
            assert!(
                BUILTIN_FUNCTIONS.contains(&called.as_str()),
                "{called} not a builtin in {sql}"
            );
        }
    }

    #[test]
    fn retry_reports_attempts_on_unsatisfiable_skeletons() {
        // a DROP with no prior definition can never instantiate
        let skel = skeleton_of("DROP TABLE x;");
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let failure = retry_instantiate(&skel, &rules, &mut rng, 3).unwrap_err();
        assert_eq!(failure.attempts, 3);
        assert!(matches!(
            failure.reason,
            InstantiationError::DeleteBeforeDef(_)
        ));
    }

    #[test]
    fn retry_succeeds_on_satisfiable_input() {
        let skel = skeleton_of("CREATE TABLE x (x, x); SELECT x FROM x WHERE x = 1;");
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sql = retry_instantiate(&skel, &rules, &mut rng, 1).unwrap();
        assert!(audit_lifetimes(&sql).unwrap().is_empty(), "{sql}");
    }

    #[test]
    fn instantiation_leaves_the_skeleton_untouched() {
        let skel = skeleton_of("CREATE TABLE x (x); SELECT x FROM x;");
        let before = skel.deep_copy();
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let _ = retry_instantiate(&skel, &rules, &mut rng, 3);
        assert!(skel.structural_eq(&before));
        // placeholders still in place
        let mut all_placeholders = true;
        skel.walk(&mut |n| {
            if let (Some(v), Some(dt)) = (&n.data_value, n.data_type) {
                if !dt.is_literal() && v != "x" {
                    all_placeholders = false;
                }
            }
        });
        assert!(all_placeholders);
    }

    #[test]
    fn names_are_unique_per_query() {
        let skel = skeleton_of(FIG6_PROGRAM);
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = build_dependency_graph(&skel, &rules, &mut rng);
            let sql = instantiate(&g, &skel, &mut rng).unwrap();
            // the nine definitions must all be distinct
            let mut defines = Vec::new();
            for part in sql.split("CREATE TABLE ").skip(1) {
                let name = part.split(' ').next().unwrap().to_string();
                let cols: Vec<String> = part
                    .split('(')
                    .nth(1)
                    .unwrap()
                    .split(')')
                    .next()
                    .unwrap()
                    .split(", ")
                    .map(str::to_string)
                    .collect();
                defines.push(name);
                defines.extend(cols);
            }
            let unique: std::collections::HashSet<&String> = defines.iter().collect();
            assert_eq!(unique.len(), defines.len(), "{sql}");
        }
    }

    #[test]
    fn dropped_names_never_resurface_in_successful_queries() {
        let skel = skeleton_of(
            "CREATE TABLE x (x); CREATE TABLE x (x); DROP TABLE x; SELECT x FROM x;",
        );
        let rules = default_rules();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut successes = 0;
        for _ in 0..200 {
            if let Ok(sql) = retry_instantiate(&skel, &rules, &mut rng, 1) {
                successes += 1;
                assert!(
                    audit_lifetimes(&sql).unwrap().is_empty(),
                    "lifetime violation in {sql}"
                );
            }
        }
        assert!(successes > 0, "no instantiation ever succeeded");
    }
}
