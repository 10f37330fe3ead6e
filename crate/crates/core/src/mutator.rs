//! Type-based skeleton mutation.
//!
//! Mutations operate on operands only: the operator is tied to the IR type
//! and data types are fixed by position, so changing either would not
//! survive the grammar. Every candidate is rendered back to SQL and
//! re-parsed; candidates that fail the parse are discarded.

use crate::grammar::parse;
use crate::ir::{ir_to_sql, IrNode, IrProgram};
use crate::library::IrLibrary;
use rand::Rng;

/// Per-candidate chance of a whole-statement insertion or deletion.
const STATEMENT_MUTATION_P: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct MutationConfig {
    /// Per-node probability of operand insertion.
    pub p_insert: f64,
    /// Per-operand probability of replacement.
    pub p_replace: f64,
    /// Per-operand probability of deletion.
    pub p_delete: f64,
    pub max_candidates_per_input: usize,
    /// Cap on statements per program for statement-level insertion.
    pub max_statements: usize,
    pub rng_seed: u64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        // deletion breaks syntax far more often than the donor-guided
        // operations, so it gets the smallest share; these defaults keep
        // candidates close to their parents and roughly two thirds of them
        // through the re-parse filter on the seed corpus
        MutationConfig {
            p_insert: 0.03,
            p_replace: 0.02,
            p_delete: 0.01,
            max_candidates_per_input: 8,
            max_statements: 16,
            rng_seed: 0,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("p_insert", self.p_insert),
            ("p_replace", self.p_replace),
            ("p_delete", self.p_delete),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.max_candidates_per_input == 0 {
            return Err("max_candidates_per_input must be at least 1".into());
        }
        Ok(())
    }
}

/// Operand slot selector for deletions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandSide {
    Left,
    Right,
}

/// How a replacement is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplaceMode {
    /// Copy the donor's children over the node's children.
    Children,
    /// Substitute the donor for the node wholesale (the slot holding the
    /// node is rewired to the donor).
    Wholesale,
}

/// Fill empty operands of `node` from a same-type library donor: for each
/// empty slot, sample a donor and graft a copy of its corresponding operand
/// when that one is present. Returns whether anything was grafted.
pub fn mutate_insert(node: &mut IrNode, lib: &IrLibrary, rng: &mut impl Rng) -> bool {
    if node.is_data_leaf() {
        return false;
    }
    let mut mutated = false;
    if node.left.is_none() {
        if let Some(donor) = lib.sample(node.ir_type, rng) {
            if let Some(l) = donor.left {
                node.left = Some(l);
                mutated = true;
            }
        }
    }
    if node.right.is_none() {
        if let Some(donor) = lib.sample(node.ir_type, rng) {
            if let Some(r) = donor.right {
                node.right = Some(r);
                mutated = true;
            }
        }
    }
    mutated
}

/// Replace `node` using a same-type library donor, either copying the
/// donor's children or substituting the donor wholesale; the mode is a
/// fair coin. No-op when the bucket is empty.
pub fn mutate_replace(node: &mut IrNode, lib: &IrLibrary, rng: &mut impl Rng) -> bool {
    let Some(donor) = lib.sample(node.ir_type, rng) else {
        return false;
    };
    let mode = if rng.gen_bool(0.5) {
        ReplaceMode::Children
    } else {
        ReplaceMode::Wholesale
    };
    replace_with(node, donor, mode);
    true
}

/// Deterministic replacement core, exposed for targeted tests.
pub fn replace_with(node: &mut IrNode, donor: IrNode, mode: ReplaceMode) {
    match mode {
        ReplaceMode::Children => {
            node.left = donor.left;
            node.right = donor.right;
        }
        ReplaceMode::Wholesale => *node = donor,
    }
}

/// Empty an operand slot of `parent`. Returns false when already empty.
pub fn mutate_delete(parent: &mut IrNode, side: OperandSide) -> bool {
    let slot = match side {
        OperandSide::Left => &mut parent.left,
        OperandSide::Right => &mut parent.right,
    };
    slot.take().is_some()
}

/// Syntax validation: a skeleton is valid iff its rendering re-parses.
pub fn validate(skeleton: &IrProgram) -> bool {
    parse(&ir_to_sql(skeleton)).is_ok()
}

/// Outcome counters of one `generate` call.
#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateStats {
    pub attempted: usize,
    pub passed_validation: usize,
}

/// Produce up to `max_candidates_per_input` validated candidates. Each
/// candidate deep-copies the input, optionally applies one statement-level
/// mutation, then walks all nodes in pre-order applying the three operand
/// mutations with the configured per-node probabilities. The input skeleton
/// and the library are never modified.
pub fn generate(
    skeleton: &IrProgram,
    lib: &IrLibrary,
    cfg: &MutationConfig,
    rng: &mut impl Rng,
) -> Vec<IrProgram> {
    generate_with_stats(skeleton, lib, cfg, rng).0
}

pub fn generate_with_stats(
    skeleton: &IrProgram,
    lib: &IrLibrary,
    cfg: &MutationConfig,
    rng: &mut impl Rng,
) -> (Vec<IrProgram>, GenerateStats) {
    let mut out = Vec::new();
    let mut stats = GenerateStats::default();
    for _ in 0..cfg.max_candidates_per_input {
        let mut cand = skeleton.deep_copy();
        mutate_statements(&mut cand, lib, cfg, rng);
        for stmt in &mut cand.statements {
            if coin(rng, cfg.p_replace) {
                mutate_replace(stmt, lib, rng);
            }
            walk_mutate(stmt, lib, cfg, rng);
        }
        stats.attempted += 1;
        // the validating re-parse doubles as type refresh: grafted leaves
        // carry the data type of their old position, and a data type is a
        // property of the position, so the candidate is rebuilt from its
        // own rendering
        if let Some(rederived) = validate_and_rederive(&cand) {
            stats.passed_validation += 1;
            out.push(rederived);
        }
    }
    (out, stats)
}

/// Re-parse a candidate's rendering; on success return the skeleton
/// re-derived from it, with position-true annotations.
fn validate_and_rederive(candidate: &IrProgram) -> Option<IrProgram> {
    let sql = ir_to_sql(candidate);
    let prog = crate::grammar::parse_annotated(&sql).ok()?;
    Some(crate::library::strip_data(&crate::ir::ast_to_ir(&prog)))
}

fn coin(rng: &mut impl Rng, p: f64) -> bool {
    p > 0.0 && rng.gen_bool(p.min(1.0))
}

fn mutate_statements(
    cand: &mut IrProgram,
    lib: &IrLibrary,
    cfg: &MutationConfig,
    rng: &mut impl Rng,
) {
    if !coin(rng, STATEMENT_MUTATION_P) {
        return;
    }
    if rng.gen_bool(0.5) && cand.statements.len() < cfg.max_statements {
        if let Some(stmt) = lib.sample_statement(rng) {
            let pos = rng.gen_range(0..=cand.statements.len());
            cand.statements.insert(pos, stmt);
        }
    } else if cand.statements.len() > 1 {
        let pos = rng.gen_range(0..cand.statements.len());
        cand.statements.remove(pos);
    }
}

fn walk_mutate(node: &mut IrNode, lib: &IrLibrary, cfg: &MutationConfig, rng: &mut impl Rng) {
    if coin(rng, cfg.p_insert) {
        mutate_insert(node, lib, rng);
    }
    for side in [OperandSide::Left, OperandSide::Right] {
        let slot = match side {
            OperandSide::Left => &mut node.left,
            OperandSide::Right => &mut node.right,
        };
        if slot.is_none() {
            continue;
        }
        if coin(rng, cfg.p_delete) {
            mutate_delete(node, side);
            continue;
        }
        let child = match side {
            OperandSide::Left => node.left.as_mut().unwrap(),
            OperandSide::Right => node.right.as_mut().unwrap(),
        };
        if coin(rng, cfg.p_replace) {
            mutate_replace(child, lib, rng);
        }
        walk_mutate(child, lib, cfg, rng);
    }
}
