//! Coverage-guided campaign driver: seed intake, queue scheduling,
//! candidate generation, target execution, outcome classification, novelty
//! detection, crash dedup and stats emission.

pub mod adapter;
pub mod bitmap;
pub mod campaign;
pub mod classify;
pub mod havoc;
pub mod stats;

pub use adapter::{
    AdapterError, InstrumentedSqliteAdapter, MockAdapter, MockOutcome, MockRule, TargetAdapter,
    COV_LEN_ENV, COV_PATH_ENV,
};
pub use bitmap::{
    bucketize, coverage_signature, has_new_coverage, BitmapLenMismatch, CoverageBitmap,
    DEFAULT_BITMAP_SIZE,
};
pub use campaign::{
    baseline_havoc_campaign, execute, run_campaign, CampaignConfig, CampaignError, CampaignMode,
    CrashLog, QueueEntry, DEFAULT_EXEC_TIMEOUT,
};
pub use classify::{classify, ExecutionOutcome, ExitKind, OutcomeClass, PatternTable, RawExecution};
pub use havoc::havoc;
pub use stats::{CampaignStats, StatsLine, Summary};
