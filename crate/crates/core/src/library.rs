//! Structure-data separation and the IR library.
//!
//! Stripping replaces concrete data with fixed placeholders, leaving a
//! skeleton of operations. The library is a dictionary keyed by IR type
//! whose values are structurally distinct skeleton subtrees; mutation
//! samples it for type-matched donors.

use crate::grammar::{ElementKind, NodeKind};
use crate::ir::{IrNode, IrProgram};
use indexmap::IndexMap;
use rand::Rng;
use std::collections::HashSet;

pub const PLACEHOLDER_SEMANTIC: &str = "x";
pub const PLACEHOLDER_INT: &str = "1";
pub const PLACEHOLDER_FLOAT: &str = "1.0";
pub const PLACEHOLDER_STRING: &str = "'a'";

pub const DEFAULT_LIBRARY_CAP: usize = 4096;

/// Placeholder for a data value of the given kind.
pub fn placeholder_for(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::LiteralInt => PLACEHOLDER_INT,
        ElementKind::LiteralFloat => PLACEHOLDER_FLOAT,
        ElementKind::LiteralString => PLACEHOLDER_STRING,
        _ => PLACEHOLDER_SEMANTIC,
    }
}

/// Replace every data value with its placeholder. Structure, types and
/// operators are untouched; data types are preserved. Idempotent.
pub fn strip_data(program: &IrProgram) -> IrProgram {
    let mut skeleton = program.deep_copy();
    for stmt in &mut skeleton.statements {
        strip_node(stmt);
    }
    skeleton
}

pub fn strip_node(node: &mut IrNode) {
    if let (Some(value), Some(dt)) = (&mut node.data_value, node.data_type) {
        *value = placeholder_for(dt.kind()).to_string();
    }
    if let Some(l) = &mut node.left {
        strip_node(l);
    }
    if let Some(r) = &mut node.right {
        strip_node(r);
    }
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv(h: u64, bytes: &[u8]) -> u64 {
    let mut h = h;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Structural fingerprint: digest over the type, case-normalized operator
/// parts, child digests and the data placeholder class. Node ids and
/// concrete data values do not participate, so equal digests mean
/// structurally equal skeletons with overwhelming probability.
pub fn fingerprint(node: &IrNode) -> u64 {
    let mut h = fnv(FNV_OFFSET, node.ir_type.name().as_bytes());
    h = fnv(h, node.op.prefix.to_ascii_uppercase().as_bytes());
    h = fnv(h, &[0xfe]);
    h = fnv(h, node.op.mid.to_ascii_uppercase().as_bytes());
    h = fnv(h, &[0xfe]);
    h = fnv(h, node.op.suffix.to_ascii_uppercase().as_bytes());
    match node.data_type {
        Some(dt) if node.is_data_leaf() => {
            h = fnv(h, &[0x01]);
            h = fnv(h, placeholder_for(dt.kind()).as_bytes());
            h = fnv(h, dt.name().as_bytes());
        }
        _ => h = fnv(h, &[0x00]),
    }
    match &node.left {
        Some(l) => h = fnv(h, &fingerprint(l).to_le_bytes()),
        None => h = fnv(h, &[0x02]),
    }
    match &node.right {
        Some(r) => h = fnv(h, &fingerprint(r).to_le_bytes()),
        None => h = fnv(h, &[0x03]),
    }
    h
}

#[derive(Default)]
struct Bucket {
    entries: Vec<IrNode>,
    fingerprints: HashSet<u64>,
}

/// Type-keyed store of structurally distinct skeleton subtrees.
pub struct IrLibrary {
    buckets: IndexMap<NodeKind, Bucket>,
    total: usize,
    cap: usize,
}

impl IrLibrary {
    pub fn new(cap: usize) -> IrLibrary {
        IrLibrary {
            buckets: IndexMap::new(),
            total: 0,
            cap: cap.max(1),
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn bucket_len(&self, t: NodeKind) -> usize {
        self.buckets.get(&t).map_or(0, |b| b.entries.len())
    }

    pub fn types(&self) -> impl Iterator<Item = NodeKind> + '_ {
        self.buckets.keys().copied()
    }

    /// Offer every subtree of every statement to its type bucket.
    /// Duplicates (by fingerprint) are skipped; at the cap a uniformly
    /// random existing entry is evicted per insertion. Returns the number
    /// of entries actually added.
    pub fn insert(&mut self, skeleton: &IrProgram, rng: &mut impl Rng) -> usize {
        let mut added = 0;
        for stmt in &skeleton.statements {
            let mut stack = vec![stmt];
            while let Some(node) = stack.pop() {
                if self.insert_subtree(node, rng) {
                    added += 1;
                }
                if let Some(l) = &node.left {
                    stack.push(l);
                }
                if let Some(r) = &node.right {
                    stack.push(r);
                }
            }
        }
        added
    }

    fn insert_subtree(&mut self, node: &IrNode, rng: &mut impl Rng) -> bool {
        let fp = fingerprint(node);
        let bucket = self.buckets.entry(node.ir_type).or_default();
        if bucket.fingerprints.contains(&fp) {
            return false;
        }
        if self.total >= self.cap {
            self.evict_random(rng);
        }
        let bucket = self.buckets.entry(node.ir_type).or_default();
        bucket.fingerprints.insert(fp);
        bucket.entries.push(node.deep_copy());
        self.total += 1;
        true
    }

    fn evict_random(&mut self, rng: &mut impl Rng) {
        if self.total == 0 {
            return;
        }
        let mut victim = rng.gen_range(0..self.total);
        for bucket in self.buckets.values_mut() {
            if victim < bucket.entries.len() {
                let node = bucket.entries.swap_remove(victim);
                bucket.fingerprints.remove(&fingerprint(&node));
                self.total -= 1;
                return;
            }
            victim -= bucket.entries.len();
        }
    }

    /// Uniform draw from the bucket for `t`, returned as a deep copy so the
    /// caller may mutate it freely. `None` when the bucket is empty.
    pub fn sample(&self, t: NodeKind, rng: &mut impl Rng) -> Option<IrNode> {
        let bucket = self.buckets.get(&t)?;
        if bucket.entries.is_empty() {
            return None;
        }
        let idx = rng.gen_range(0..bucket.entries.len());
        Some(bucket.entries[idx].deep_copy())
    }

    /// Sample a whole-statement skeleton of any statement kind.
    pub fn sample_statement(&self, rng: &mut impl Rng) -> Option<IrNode> {
        let total: usize = self
            .buckets
            .iter()
            .filter(|(k, _)| k.is_statement())
            .map(|(_, b)| b.entries.len())
            .sum();
        if total == 0 {
            return None;
        }
        let mut idx = rng.gen_range(0..total);
        for (kind, bucket) in &self.buckets {
            if !kind.is_statement() {
                continue;
            }
            if idx < bucket.entries.len() {
                return Some(bucket.entries[idx].deep_copy());
            }
            idx -= bucket.entries.len();
        }
        None
    }

    /// Human-auditable snapshot: rendered skeleton SQL grouped by type.
    /// Statement sections are reloadable; subtree sections are informative
    /// only and get regenerated from the statement entries on reload.
    pub fn snapshot(&self) -> String {
        use std::fmt::Write as _;
        let mut keys: Vec<NodeKind> = self.buckets.keys().copied().collect();
        keys.sort();
        let mut out = String::new();
        for kind in keys {
            let bucket = &self.buckets[&kind];
            if bucket.entries.is_empty() {
                continue;
            }
            let _ = writeln!(out, "# {} ({} entries)", kind.name(), bucket.entries.len());
            for entry in &bucket.entries {
                let _ = writeln!(out, "{}", crate::ir::render_node(entry));
            }
        }
        out
    }

    /// Rebuild library contents from a snapshot. Only statement sections
    /// are replayed: each line re-parses, re-annotates and re-inserts,
    /// which also repopulates the subtree buckets.
    pub fn load_snapshot(&mut self, text: &str, rng: &mut impl Rng) -> usize {
        let mut added = 0;
        let mut in_statement_section = false;
        for line in text.lines() {
            if let Some(header) = line.strip_prefix("# ") {
                let name = header.split_whitespace().next().unwrap_or("");
                in_statement_section = crate::ir::type_by_name(name)
                    .map(NodeKind::is_statement)
                    .unwrap_or(false);
                continue;
            }
            if !in_statement_section || line.trim().is_empty() {
                continue;
            }
            let sql = format!("{line};");
            if let Ok(prog) = crate::grammar::parse_annotated(&sql) {
                let skeleton = strip_data(&crate::ir::ast_to_ir(&prog));
                added += self.insert(&skeleton, rng);
            }
        }
        added
    }
}
