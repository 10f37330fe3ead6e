//! Campaign counters, the periodic stats stream and the final summary.

use super::classify::OutcomeClass;
use serde::Serialize;

/// Running totals for one campaign. Exactly one class counter moves per
/// execution, so `executions == syntax_error + semantic_error + correct +
/// crash + timeout` at all times.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CampaignStats {
    pub executions: u64,
    pub syntax_error: u64,
    pub semantic_error: u64,
    pub correct: u64,
    pub crash: u64,
    pub timeout: u64,
    /// Error messages the pattern table could not name.
    pub unknown_messages: u64,
    pub crashes_unique: u64,
    pub queue_len: usize,
    pub library_entries: usize,
    pub global_edges: usize,
    pub candidates_generated: u64,
    pub candidates_valid: u64,
    pub instantiation_failures: u64,
    pub corpus_loaded: usize,
    pub corpus_skipped: usize,
}

impl CampaignStats {
    pub fn record(&mut self, class: OutcomeClass, unknown_message: bool) {
        self.executions += 1;
        match class {
            OutcomeClass::SyntaxError => self.syntax_error += 1,
            OutcomeClass::SemanticError => self.semantic_error += 1,
            OutcomeClass::Correct => self.correct += 1,
            OutcomeClass::Crash => self.crash += 1,
            OutcomeClass::Timeout => self.timeout += 1,
        }
        if unknown_message {
            self.unknown_messages += 1;
        }
    }

    /// Executions that passed the target's parse stage.
    pub fn syntax_ok(&self) -> u64 {
        self.semantic_error + self.correct
    }

    pub fn classes_sum(&self) -> u64 {
        self.syntax_error + self.semantic_error + self.correct + self.crash + self.timeout
    }

    pub fn correct_fraction(&self) -> f64 {
        if self.executions == 0 {
            0.0
        } else {
            self.correct as f64 / self.executions as f64
        }
    }
}

/// One line of the periodic stats stream.
#[derive(Debug, Serialize)]
pub struct StatsLine {
    pub elapsed_s: f64,
    pub execs: u64,
    pub execs_per_s: f64,
    pub global_edges: usize,
    pub queue_len: usize,
    pub library_entries: usize,
    pub syntax_ok: u64,
    pub semantic_ok: u64,
    pub correct: u64,
    pub crashes_unique: u64,
    pub timeouts: u64,
}

impl StatsLine {
    pub fn from_stats(stats: &CampaignStats, elapsed_s: f64) -> StatsLine {
        StatsLine {
            elapsed_s,
            execs: stats.executions,
            execs_per_s: if elapsed_s > 0.0 {
                stats.executions as f64 / elapsed_s
            } else {
                0.0
            },
            global_edges: stats.global_edges,
            queue_len: stats.queue_len,
            library_entries: stats.library_entries,
            syntax_ok: stats.syntax_ok(),
            semantic_ok: stats.correct,
            correct: stats.correct,
            crashes_unique: stats.crashes_unique,
            timeouts: stats.timeout,
        }
    }
}

/// Final three-way validity breakdown plus campaign totals. Contains no
/// wall-clock fields, so equal campaigns produce byte-identical summaries.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: u64,
    pub syntax_error: u64,
    pub semantics_error: u64,
    pub correct: u64,
    pub crash: u64,
    pub timeout: u64,
    pub crashes_unique: u64,
    pub unknown_messages: u64,
    pub queue_len: usize,
    pub library_entries: usize,
    pub global_edges: usize,
    pub candidates_generated: u64,
    pub candidates_valid: u64,
    pub instantiation_failures: u64,
    pub corpus_loaded: usize,
    pub corpus_skipped: usize,
}

impl Summary {
    pub fn from_stats(stats: &CampaignStats) -> Summary {
        Summary {
            total: stats.executions,
            syntax_error: stats.syntax_error,
            semantics_error: stats.semantic_error,
            correct: stats.correct,
            crash: stats.crash,
            timeout: stats.timeout,
            crashes_unique: stats.crashes_unique,
            unknown_messages: stats.unknown_messages,
            queue_len: stats.queue_len,
            library_entries: stats.library_entries,
            global_edges: stats.global_edges,
            candidates_generated: stats.candidates_generated,
            candidates_valid: stats.candidates_valid,
            instantiation_failures: stats.instantiation_failures,
            corpus_loaded: stats.corpus_loaded,
            corpus_skipped: stats.corpus_skipped,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
