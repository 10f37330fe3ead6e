//! The coverage-feedback campaign loop.
//!
//! Pipeline per iteration: pick a queue entry, mutate its skeleton into
//! candidates, instantiate each candidate, execute it against a fresh
//! database in an isolated target process, classify the result and keep
//! whatever exercises new coverage — the skeleton goes to the library, the
//! concrete query to the queue. Crashes are deduplicated by coverage
//! signature and saved with a reproducer.

use super::adapter::{AdapterError, TargetAdapter};
use super::bitmap::{coverage_signature, has_new_coverage, BitmapLenMismatch, CoverageBitmap};
use super::classify::{classify, ExecutionOutcome, OutcomeClass, PatternTable};
use super::havoc::havoc;
use super::stats::{CampaignStats, StatsLine, Summary};
use crate::grammar::parse_annotated;
use crate::instantiator::rules::RuleError;
use crate::instantiator::{default_rules, parse_rules, retry_instantiate, RelationRule};
use crate::ir::{ast_to_ir, ir_to_sql, IrProgram};
use crate::library::{strip_data, IrLibrary, DEFAULT_LIBRARY_CAP};
use crate::mutator::{generate_with_stats, MutationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};
use thiserror::Error;

pub const DEFAULT_EXEC_TIMEOUT: Duration = Duration::from_secs(2);
const STATS_INTERVAL: Duration = Duration::from_secs(5);
/// Queue entries discovered in the most recent tenth of the campaign get
/// twice the selection weight.
const RECENT_WINDOW_TENTHS: u64 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CampaignMode {
    /// Mutation plus instantiation.
    Full,
    /// Mutation only; skeletons execute with their placeholders.
    NoInstantiate,
    /// Byte-level havoc on queue entry text.
    Havoc,
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub time_budget: Duration,
    /// Optional cap on loop executions (corpus priming not counted);
    /// whichever budget runs out first ends the campaign.
    pub max_execs: Option<u64>,
    pub rng_seed: u64,
    pub bitmap_size: usize,
    pub exec_timeout: Duration,
    pub mutation: MutationConfig,
    pub rules_path: Option<PathBuf>,
    pub library_cap: usize,
    /// Exclude syntax-error outcomes from queue admission even when their
    /// coverage is new.
    pub drop_invalid_novelty: bool,
    pub mode: CampaignMode,
    pub max_instantiate_tries: u32,
    pub resume: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            corpus_dir: PathBuf::new(),
            output_dir: PathBuf::new(),
            time_budget: Duration::from_secs(60),
            max_execs: None,
            rng_seed: 0,
            bitmap_size: super::bitmap::DEFAULT_BITMAP_SIZE,
            exec_timeout: DEFAULT_EXEC_TIMEOUT,
            mutation: MutationConfig::default(),
            rules_path: None,
            library_cap: DEFAULT_LIBRARY_CAP,
            drop_invalid_novelty: false,
            mode: CampaignMode::Full,
            max_instantiate_tries: crate::instantiator::DEFAULT_MAX_TRIES,
            resume: false,
        }
    }
}

/// One saved input: the concrete query text plus, for IR-driven modes, its
/// stripped skeleton.
pub struct QueueEntry {
    pub id: usize,
    pub query_text: Vec<u8>,
    pub skeleton: Option<IrProgram>,
    /// Loop-execution counter value at admission.
    pub discovery_exec: u64,
    pub exec_count: u64,
    pub parent_id: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Bitmap(#[from] BitmapLenMismatch),
    #[error(transparent)]
    Rules(#[from] RuleError),
}

/// Crash collection with coverage-signature dedup. Usable standalone:
/// feeding the same deterministic crasher twice reports one unique crash.
pub struct CrashLog {
    dir: PathBuf,
    seen: HashSet<u64>,
}

impl CrashLog {
    pub fn new(dir: PathBuf) -> CrashLog {
        CrashLog {
            dir,
            seen: HashSet::new(),
        }
    }

    pub fn unique_count(&self) -> usize {
        self.seen.len()
    }

    /// True iff the crash's bucketized coverage signature is unseen. New
    /// signatures persist a reproducer under `<dir>/<signature>/repro.sql`
    /// along with a metadata record.
    pub fn dedup_crash(
        &mut self,
        outcome: &ExecutionOutcome,
        repro: &[u8],
        discovered_at_exec: u64,
        elapsed: Duration,
    ) -> std::io::Result<bool> {
        debug_assert_eq!(outcome.class, OutcomeClass::Crash);
        let sig = coverage_signature(&outcome.coverage);
        if !self.seen.insert(sig) {
            return Ok(false);
        }
        let dir = self.dir.join(format!("{sig:016x}"));
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("repro.sql"), repro)?;
        let meta = serde_json::json!({
            "signature": format!("{sig:016x}"),
            "detail": outcome.detail,
            "discovered_at_exec": discovered_at_exec,
            "discovered_at_s": elapsed.as_secs_f64(),
        });
        std::fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(true)
    }
}

/// Run the campaign configured by `cfg` against `adapter`. On a fatal
/// error the partial state (summary, queue, library) is still written to
/// the output directory before the error propagates.
pub fn run_campaign(
    cfg: &CampaignConfig,
    adapter: &mut dyn TargetAdapter,
) -> Result<CampaignStats, CampaignError> {
    let mut campaign = Campaign::prepare(cfg, adapter)?;
    let result = campaign.run();
    let finalize = campaign.finalize();
    match result {
        Ok(()) => {
            finalize?;
            Ok(campaign.stats)
        }
        Err(e) => {
            // keep whatever state we got to; the error wins
            let _ = finalize;
            Err(e)
        }
    }
}

/// The byte-mutation baseline: the identical loop with candidates produced
/// by havoc on queue entry text, no IR, no instantiation.
pub fn baseline_havoc_campaign(
    cfg: &CampaignConfig,
    adapter: &mut dyn TargetAdapter,
) -> Result<CampaignStats, CampaignError> {
    let mut cfg = cfg.clone();
    cfg.mode = CampaignMode::Havoc;
    run_campaign(&cfg, adapter)
}

struct Campaign<'a> {
    cfg: CampaignConfig,
    adapter: &'a mut dyn TargetAdapter,
    rules: Vec<RelationRule>,
    patterns: PatternTable,
    library: IrLibrary,
    queue: Vec<QueueEntry>,
    global: CoverageBitmap,
    crash_log: CrashLog,
    stats: CampaignStats,
    rng: ChaCha8Rng,
    started: Instant,
    next_stats_tick: Duration,
    stats_file: std::fs::File,
    cursor: u64,
    loop_execs: u64,
    next_queue_id: usize,
}

impl<'a> Campaign<'a> {
    fn prepare(
        cfg: &CampaignConfig,
        adapter: &'a mut dyn TargetAdapter,
    ) -> Result<Campaign<'a>, CampaignError> {
        cfg.mutation
            .validate()
            .map_err(CampaignError::Config)?;
        if !cfg.corpus_dir.is_dir() {
            return Err(CampaignError::Config(format!(
                "corpus directory {} does not exist",
                cfg.corpus_dir.display()
            )));
        }
        std::fs::create_dir_all(&cfg.output_dir)?;
        std::fs::create_dir_all(cfg.output_dir.join("crashes"))?;
        let rules = match &cfg.rules_path {
            Some(path) => parse_rules(&std::fs::read_to_string(path)?)?,
            None => default_rules(),
        };
        let stats_file = std::fs::File::create(cfg.output_dir.join("stats.jsonl"))?;
        let mut campaign = Campaign {
            cfg: cfg.clone(),
            rules,
            patterns: PatternTable::default(),
            library: IrLibrary::new(cfg.library_cap),
            queue: Vec::new(),
            global: CoverageBitmap::new(adapter.bitmap_len()),
            crash_log: CrashLog::new(cfg.output_dir.join("crashes")),
            stats: CampaignStats::default(),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            started: Instant::now(),
            next_stats_tick: Duration::ZERO,
            stats_file,
            cursor: 0,
            loop_execs: 0,
            next_queue_id: 0,
            adapter,
        };
        if cfg.resume {
            campaign.load_previous_state()?;
        }
        campaign.ingest_corpus()?;
        Ok(campaign)
    }

    fn load_previous_state(&mut self) -> Result<(), CampaignError> {
        let lib_path = self.cfg.output_dir.join("library.txt");
        if let Ok(text) = std::fs::read_to_string(&lib_path) {
            self.library.load_snapshot(&text, &mut self.rng);
        }
        let queue_path = self.cfg.output_dir.join("queue.txt");
        if let Ok(text) = std::fs::read_to_string(&queue_path) {
            for line in text.lines() {
                let Some((_, escaped)) = line.split_once('\t') else {
                    continue;
                };
                let query = unescape(escaped);
                self.admit_text(query.into_bytes(), None);
            }
        }
        Ok(())
    }

    /// Queue a query without novelty gating (resume path): skeletons are
    /// rebuilt by re-parsing where possible.
    fn admit_text(&mut self, bytes: Vec<u8>, parent_id: Option<usize>) {
        let skeleton = std::str::from_utf8(&bytes)
            .ok()
            .and_then(|sql| parse_annotated(sql).ok())
            .map(|prog| strip_data(&ast_to_ir(&prog)));
        if skeleton.is_none() && self.cfg.mode != CampaignMode::Havoc {
            return;
        }
        self.queue.push(QueueEntry {
            id: self.next_queue_id,
            query_text: bytes,
            skeleton,
            discovery_exec: self.loop_execs,
            exec_count: 0,
            parent_id,
        });
        self.next_queue_id += 1;
    }

    /// Parse, translate, strip and seed the library with each corpus file,
    /// then execute the original query to prime coverage and the queue.
    fn ingest_corpus(&mut self) -> Result<(), CampaignError> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&self.cfg.corpus_dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for path in paths {
            let Ok(text) = std::fs::read_to_string(&path) else {
                self.stats.corpus_skipped += 1;
                continue;
            };
            let skeleton = match parse_annotated(&text) {
                Ok(prog) => Some(strip_data(&ast_to_ir(&prog))),
                Err(_) => None,
            };
            if skeleton.is_none() && self.cfg.mode != CampaignMode::Havoc {
                self.stats.corpus_skipped += 1;
                continue;
            }
            self.stats.corpus_loaded += 1;
            if let Some(skel) = &skeleton {
                self.library.insert(skel, &mut self.rng);
            }
            self.process_execution(text.into_bytes(), skeleton, None)?;
        }
        self.stats.queue_len = self.queue.len();
        self.stats.library_entries = self.library.total();
        self.write_stats_line()?;
        Ok(())
    }

    fn budget_left(&self) -> bool {
        if self.started.elapsed() >= self.cfg.time_budget {
            return false;
        }
        match self.cfg.max_execs {
            Some(max) => self.loop_execs < max,
            None => true,
        }
    }

    fn run(&mut self) -> Result<(), CampaignError> {
        while self.budget_left() && !self.queue.is_empty() {
            let entry_idx = self.pick_entry();
            self.queue[entry_idx].exec_count += 1;
            match self.cfg.mode {
                CampaignMode::Full | CampaignMode::NoInstantiate => {
                    self.ir_candidates(entry_idx)?
                }
                CampaignMode::Havoc => self.havoc_candidates(entry_idx)?,
            }
            self.maybe_write_stats()?;
        }
        Ok(())
    }

    /// Round-robin selection where entries discovered in the most recent
    /// tenth of loop executions carry twice the weight.
    fn pick_entry(&mut self) -> usize {
        let recent_floor = self.loop_execs.saturating_mul(RECENT_WINDOW_TENTHS) / 10;
        let weight = |e: &QueueEntry| -> u64 {
            if self.loop_execs > 0 && e.discovery_exec >= recent_floor && e.discovery_exec > 0 {
                2
            } else {
                1
            }
        };
        let total: u64 = self.queue.iter().map(weight).sum();
        let mut pick = self.cursor % total.max(1);
        self.cursor = self.cursor.wrapping_add(1);
        for (i, e) in self.queue.iter().enumerate() {
            let w = weight(e);
            if pick < w {
                return i;
            }
            pick -= w;
        }
        self.queue.len() - 1
    }

    fn ir_candidates(&mut self, entry_idx: usize) -> Result<(), CampaignError> {
        let parent_id = self.queue[entry_idx].id;
        let Some(skeleton) = self.queue[entry_idx].skeleton.as_ref().map(IrProgram::deep_copy)
        else {
            return Ok(());
        };
        let (candidates, gstats) =
            generate_with_stats(&skeleton, &self.library, &self.cfg.mutation, &mut self.rng);
        self.stats.candidates_generated += gstats.attempted as u64;
        self.stats.candidates_valid += gstats.passed_validation as u64;
        for candidate in candidates {
            if !self.budget_left() {
                break;
            }
            let sql = match self.cfg.mode {
                CampaignMode::Full => {
                    match retry_instantiate(
                        &candidate,
                        &self.rules,
                        &mut self.rng,
                        self.cfg.max_instantiate_tries,
                    ) {
                        Ok(sql) => sql,
                        Err(_) => {
                            self.stats.instantiation_failures += 1;
                            continue;
                        }
                    }
                }
                _ => ir_to_sql(&candidate),
            };
            self.loop_execs += 1;
            self.process_execution(sql.into_bytes(), Some(candidate), Some(parent_id))?;
        }
        Ok(())
    }

    fn havoc_candidates(&mut self, entry_idx: usize) -> Result<(), CampaignError> {
        let parent_id = self.queue[entry_idx].id;
        let base = self.queue[entry_idx].query_text.clone();
        for _ in 0..self.cfg.mutation.max_candidates_per_input {
            if !self.budget_left() {
                break;
            }
            let other_idx = self.rng.gen_range(0..self.queue.len());
            let other = self.queue[other_idx].query_text.clone();
            let mutant = havoc(&base, Some(&other), &mut self.rng);
            self.stats.candidates_generated += 1;
            if std::str::from_utf8(&mutant)
                .is_ok_and(|s| crate::grammar::parse(s).is_ok())
            {
                self.stats.candidates_valid += 1;
            }
            self.loop_execs += 1;
            self.process_execution(mutant, None, Some(parent_id))?;
        }
        Ok(())
    }

    /// Execute, classify, record, and admit novel coverage to queue and
    /// library.
    fn process_execution(
        &mut self,
        bytes: Vec<u8>,
        skeleton: Option<IrProgram>,
        parent_id: Option<usize>,
    ) -> Result<(), CampaignError> {
        let raw = self.adapter.execute(&bytes, self.cfg.exec_timeout)?;
        let outcome = classify(raw, &self.patterns);
        self.stats.record(outcome.class, outcome.unknown_message);

        if outcome.class == OutcomeClass::Crash {
            let new = self.crash_log.dedup_crash(
                &outcome,
                &bytes,
                self.stats.executions,
                self.started.elapsed(),
            )?;
            if new {
                self.stats.crashes_unique += 1;
            }
        }

        // timeouts feed neither the map nor the queue
        if outcome.class == OutcomeClass::Timeout {
            return Ok(());
        }

        let is_new = has_new_coverage(&outcome.coverage, &mut self.global)?;
        self.stats.global_edges = self.global.count_nonzero();

        let admissible = match outcome.class {
            OutcomeClass::Correct | OutcomeClass::SemanticError => true,
            OutcomeClass::SyntaxError => !self.cfg.drop_invalid_novelty,
            OutcomeClass::Crash | OutcomeClass::Timeout => false,
        };
        if is_new && admissible {
            if let Some(skel) = &skeleton {
                self.library.insert(skel, &mut self.rng);
            }
            self.queue.push(QueueEntry {
                id: self.next_queue_id,
                query_text: bytes,
                skeleton,
                discovery_exec: self.loop_execs,
                exec_count: 0,
                parent_id,
            });
            self.next_queue_id += 1;
        }
        self.stats.queue_len = self.queue.len();
        self.stats.library_entries = self.library.total();
        Ok(())
    }

    fn maybe_write_stats(&mut self) -> Result<(), CampaignError> {
        if self.started.elapsed() >= self.next_stats_tick {
            self.write_stats_line()?;
        }
        Ok(())
    }

    fn write_stats_line(&mut self) -> Result<(), CampaignError> {
        let line = StatsLine::from_stats(&self.stats, self.started.elapsed().as_secs_f64());
        let json = serde_json::to_string(&line).expect("stats line serializes");
        writeln!(self.stats_file, "{json}")?;
        self.next_stats_tick = self.started.elapsed() + STATS_INTERVAL;
        Ok(())
    }

    /// Write the exit stats line, the summary, the queue listing and the
    /// library snapshot.
    fn finalize(&mut self) -> Result<(), CampaignError> {
        self.write_stats_line()?;
        let summary = Summary::from_stats(&self.stats);
        std::fs::write(
            self.cfg.output_dir.join("summary.json"),
            summary.to_json_pretty(),
        )?;
        let mut listing = String::new();
        for entry in &self.queue {
            listing.push_str(&format!(
                "{}\t{}\n",
                entry.id,
                escape(&String::from_utf8_lossy(&entry.query_text))
            ));
        }
        std::fs::write(self.cfg.output_dir.join("queue.txt"), listing)?;
        std::fs::write(self.cfg.output_dir.join("library.txt"), self.library.snapshot())?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\t', "\\t")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Execute one query through an adapter and classify it; the standalone
/// building block behind the campaign loop and the `classify` CLI command.
pub fn execute(
    query: &[u8],
    adapter: &mut dyn TargetAdapter,
    timeout: Duration,
    patterns: &PatternTable,
) -> Result<ExecutionOutcome, AdapterError> {
    let raw = adapter.execute(query, timeout)?;
    Ok(classify(raw, patterns))
}
