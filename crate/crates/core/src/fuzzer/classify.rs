//! Outcome classification from raw target results.
//!
//! The target never tells us which processing phase rejected a query, so
//! classification matches its error messages against a pattern table
//! derived by probing the target with known-bad inputs. Crash and timeout
//! take precedence; any error output that matches no syntax pattern
//! counts as a semantic failure, with unmatched messages flagged so
//! campaigns can report how often the table fell short.

use super::bitmap::CoverageBitmap;

/// Validity class of one execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum OutcomeClass {
    SyntaxError,
    SemanticError,
    Correct,
    Crash,
    Timeout,
}

/// How the target process ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Exited(i32),
    Signaled(i32),
    TimedOut,
}

/// Unclassified result of one target execution.
#[derive(Debug, Clone)]
pub struct RawExecution {
    pub exit: ExitKind,
    pub stderr: String,
    pub stdout: String,
    pub coverage: CoverageBitmap,
}

/// Classified result.
#[derive(Debug, Clone)]
pub struct ExecutionOutcome {
    pub class: OutcomeClass,
    pub coverage: CoverageBitmap,
    /// Target message or signal description.
    pub detail: String,
    /// Error output matched neither a syntax nor a known semantic pattern.
    pub unknown_message: bool,
}

/// Substring patterns, matched case-insensitively against each error line.
#[derive(Debug, Clone)]
pub struct PatternTable {
    pub syntax: Vec<String>,
    pub semantic: Vec<String>,
}

impl Default for PatternTable {
    fn default() -> Self {
        PatternTable::sqlite()
    }
}

impl PatternTable {
    /// Patterns observed by probing the SQLite shell harness with known-bad
    /// inputs. Parse-stage rejections mention a near-token or unbalanced
    /// input; everything else the engine reports is a validation or
    /// runtime failure.
    pub fn sqlite() -> PatternTable {
        let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        PatternTable {
            syntax: s(&[
                "syntax error",
                "unrecognized token",
                "incomplete input",
                "parser stack overflow",
            ]),
            semantic: s(&[
                "no such",
                "already exists",
                "ambiguous column name",
                "has no column",
                "wrong number of arguments",
                "misuse of",
                "duplicate column name",
                "not allowed",
                "may not be used",
                "circular",
                "too many",
                "foreign key",
                "datatype mismatch",
                "constraint failed",
                "constraint cannot",
                "cannot",
                "unsupported",
                "no tables specified",
                "values for",
                "second argument",
                "unsafe use",
                "unknown database",
                "is not a function",
                "aggregate",
                "must have",
                "clause is required",
                "expressions prohibited",
                "naming conflict",
                "recursive",
                "generated column",
                "error in",
                "unable to",
                "malformed",
                "out of range",
                "string or blob too big",
                "too big",
            ]),
        }
    }

    fn matches_any(patterns: &[String], line: &str) -> bool {
        let lower = line.to_ascii_lowercase();
        patterns.iter().any(|p| lower.contains(p.as_str()))
    }
}

/// Classify a raw execution. Crash and timeout take precedence; otherwise
/// a query is a syntax error if any statement's message matches the
/// parse-stage patterns, a semantic error if any other error message was
/// produced, and correct when the target reported nothing.
pub fn classify(raw: RawExecution, patterns: &PatternTable) -> ExecutionOutcome {
    let (class, detail, unknown) = match raw.exit {
        ExitKind::Signaled(sig) => (OutcomeClass::Crash, format!("signal {sig}"), false),
        ExitKind::TimedOut => (OutcomeClass::Timeout, "timeout".to_string(), false),
        ExitKind::Exited(code) => {
            let error_lines: Vec<&str> = raw
                .stderr
                .lines()
                .filter(|l| !l.trim().is_empty())
                .collect();
            if error_lines
                .iter()
                .any(|l| PatternTable::matches_any(&patterns.syntax, l))
            {
                (
                    OutcomeClass::SyntaxError,
                    error_lines.join("\n"),
                    false,
                )
            } else if !error_lines.is_empty() {
                let unknown = !error_lines
                    .iter()
                    .all(|l| PatternTable::matches_any(&patterns.semantic, l));
                (OutcomeClass::SemanticError, error_lines.join("\n"), unknown)
            } else if code != 0 {
                // error exit without a message: count it against the table
                (OutcomeClass::SemanticError, format!("exit code {code}"), true)
            } else {
                (OutcomeClass::Correct, String::new(), false)
            }
        }
    };
    ExecutionOutcome {
        class,
        coverage: raw.coverage,
        detail,
        unknown_message: unknown,
    }
}
