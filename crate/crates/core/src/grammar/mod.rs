//! SQL grammar front end: tokenizer, recursive-descent parser and the
//! position-based semantic annotation pass.
//!
//! The supported SQLite-dialect subset is documented in `docs/grammar.md`.

pub mod annotate;
pub mod ast;
pub mod lexer;
pub mod parser;

pub use annotate::{annotate, parse_annotated};
pub use ast::{AstNode, NodeKind, Program};
pub use lexer::{token_equal, tokenize};
pub use parser::parse;

use std::fmt;

/// Parse failure: byte offset of the offending token plus a hint describing
/// what the parser expected there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            offset,
            message: message.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.offset, self.message)
    }
}

/// Raised when the annotation rule table has no entry for a data leaf,
/// naming the production so the gap can be fixed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no annotation rule for data leaf in production {production}")]
pub struct AnnotationError {
    pub production: String,
}

/// Element class of a data token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Table,
    Column,
    Index,
    View,
    Trigger,
    FunctionName,
    LiteralString,
    LiteralInt,
    LiteralFloat,
}

impl ElementKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            ElementKind::LiteralString | ElementKind::LiteralInt | ElementKind::LiteralFloat
        )
    }

    /// Name-space of the kind. Tables and views share one: a view is
    /// usable wherever a table is expected.
    pub fn namespace(self) -> ElementKind {
        match self {
            ElementKind::View => ElementKind::Table,
            k => k,
        }
    }

    /// Basic data-type label used in IR dumps, e.g. `ColumnName`.
    pub fn basic_name(self) -> &'static str {
        match self {
            ElementKind::Table => "TableName",
            ElementKind::Column => "ColumnName",
            ElementKind::Index => "IndexName",
            ElementKind::View => "ViewName",
            ElementKind::Trigger => "TriggerName",
            ElementKind::FunctionName => "FunctionName",
            ElementKind::LiteralString => "StringLiteral",
            ElementKind::LiteralInt => "IntLiteral",
            ElementKind::LiteralFloat => "FloatLiteral",
        }
    }
}

/// Whether a data token introduces, consumes or retires a name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Define,
    Use,
    Delete,
}

/// Where candidate values for a use are looked up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Any,
    FromClause,
    SameStatement,
    None,
}

macro_rules! data_types {
    ($( $name:ident => ($kind:ident, $role:ident, $scope:ident) ),+ $(,)?) => {
        /// Refined semantic data type of a data token: element kind combined
        /// with define/use role and lookup scope. This is the single closed
        /// enumeration of (kind, role, scope) triples; the annotator never
        /// emits anything outside it and relation-rule files are validated
        /// against it at load.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum DataType {
            $($name),+
        }

        impl DataType {
            pub const ALL: &'static [DataType] = &[$(DataType::$name),+];

            pub fn kind(self) -> ElementKind {
                match self {
                    $(DataType::$name => ElementKind::$kind),+
                }
            }

            pub fn role(self) -> Role {
                match self {
                    $(DataType::$name => Role::$role),+
                }
            }

            pub fn scope(self) -> Scope {
                match self {
                    $(DataType::$name => Scope::$scope),+
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $(DataType::$name => stringify!($name)),+
                }
            }

            pub fn from_name(name: &str) -> Option<DataType> {
                match name {
                    $(stringify!($name) => Some(DataType::$name),)+
                    _ => None,
                }
            }
        }
    };
}

data_types! {
    CreateTable   => (Table, Define, None),
    CreateView    => (View, Define, None),
    CreateIndex   => (Index, Define, None),
    CreateTrigger => (Trigger, Define, None),
    CreateColumn  => (Column, Define, None),
    UseAnyTable   => (Table, Use, Any),
    UseFromTable  => (Table, Use, FromClause),
    UseAnyColumn  => (Column, Use, Any),
    UseTableColumn => (Column, Use, SameStatement),
    UseViewColumn => (Column, Use, FromClause),
    UseAnyIndex   => (Index, Use, Any),
    UseFunction   => (FunctionName, Use, None),
    DropTable     => (Table, Delete, Any),
    DropView      => (View, Delete, Any),
    DropIndex     => (Index, Delete, Any),
    DropTrigger   => (Trigger, Delete, Any),
    LiteralInt    => (LiteralInt, Use, None),
    LiteralFloat  => (LiteralFloat, Use, None),
    LiteralString => (LiteralString, Use, None),
}

impl DataType {
    pub fn is_literal(self) -> bool {
        self.kind().is_literal()
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
