//! squirrelkit: a grammar-aware, coverage-guided fuzzing toolkit for
//! SQL-processing engines.
//!
//! The pipeline mirrors the stages a query goes through:
//!
//! * [`grammar`] — parse SQL into an AST and annotate data leaves with
//!   refined semantic types;
//! * [`ir`] — translate the AST to a two-operand IR and render it back;
//! * [`library`] — strip concrete data into skeletons and keep a type-keyed
//!   store of structurally distinct subtrees;
//! * [`mutator`] — produce new syntactically valid skeletons by type-based
//!   insertion, replacement and deletion;
//! * [`instantiator`] — fill skeletons with names and values that satisfy
//!   inferred data dependencies;
//! * [`fuzzer`] — drive the coverage-feedback campaign against a target.

pub mod grammar;
pub mod ir;
pub mod library;
pub mod mutator;
pub mod instantiator;
pub mod fuzzer;
