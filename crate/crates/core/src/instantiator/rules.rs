//! Relation rules: declarative tuples driving dependency inference.

use crate::grammar::DataType;
use thiserror::Error;

/// How the source relates to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    /// The source can be (names the same kind of thing as) the target.
    IsA,
    /// The source is an element of the target.
    IsAnElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleScope {
    /// Candidates come from the same statement.
    IntraStmt,
    /// Candidates come from earlier statements.
    InterStmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleChoice {
    /// Uniform draw among candidates.
    Any,
    /// Closest preceding candidate on the define-use chain.
    Nearest,
}

/// One (target, source, relation, scope, choice) tuple: data of type
/// `source` depends on some earlier datum of type `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationRule {
    pub target: DataType,
    pub source: DataType,
    pub relation: RelationKind,
    pub scope: RuleScope,
    pub choice: RuleChoice,
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("line {line}: expected 5 fields, got {got}")]
    FieldCount { line: usize, got: usize },
    #[error("line {line}: unknown data type {name:?}")]
    UnknownType { line: usize, name: String },
    #[error("line {line}: unknown {what} {name:?}")]
    UnknownWord {
        line: usize,
        what: &'static str,
        name: String,
    },
    #[error("line {line}: rule relates {dt} to itself")]
    SelfRelation { line: usize, dt: DataType },
    #[error("line {line}: isA requires equal element kinds, isAnElement different ones")]
    KindMismatch { line: usize },
}

/// Parse a rule file: one tuple per line, `#` comments, blank lines
/// ignored. Every name is validated against the data-type enumeration.
pub fn parse_rules(text: &str) -> Result<Vec<RelationRule>, RuleError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(RuleError::FieldCount {
                line,
                got: fields.len(),
            });
        }
        let dt = |name: &str| {
            DataType::from_name(name).ok_or_else(|| RuleError::UnknownType {
                line,
                name: name.to_string(),
            })
        };
        let target = dt(fields[0])?;
        let source = dt(fields[1])?;
        let relation = match fields[2] {
            "isA" => RelationKind::IsA,
            "isAnElement" => RelationKind::IsAnElement,
            other => {
                return Err(RuleError::UnknownWord {
                    line,
                    what: "relation",
                    name: other.to_string(),
                })
            }
        };
        let scope = match fields[3] {
            "intraStmt" => RuleScope::IntraStmt,
            "interStmt" => RuleScope::InterStmt,
            other => {
                return Err(RuleError::UnknownWord {
                    line,
                    what: "scope",
                    name: other.to_string(),
                })
            }
        };
        let choice = match fields[4] {
            "any" => RuleChoice::Any,
            "nearest" => RuleChoice::Nearest,
            other => {
                return Err(RuleError::UnknownWord {
                    line,
                    what: "choice",
                    name: other.to_string(),
                })
            }
        };
        if target == source {
            return Err(RuleError::SelfRelation { line, dt: target });
        }
        let kinds_equal = target.kind().namespace() == source.kind().namespace();
        let consistent = match relation {
            RelationKind::IsA => kinds_equal,
            RelationKind::IsAnElement => !kinds_equal,
        };
        if !consistent {
            return Err(RuleError::KindMismatch { line });
        }
        rules.push(RelationRule {
            target,
            source,
            relation,
            scope,
            choice,
        });
    }
    Ok(rules)
}

/// The rule set shipped with the repository (`rules/sqlite.rules`).
pub fn default_rules() -> Vec<RelationRule> {
    parse_rules(include_str!("../../../../rules/sqlite.rules"))
        .expect("shipped rule file is valid")
}
