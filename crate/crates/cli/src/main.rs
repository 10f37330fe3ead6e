//! squirrelkit command-line interface.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use squirrelkit::fuzzer::{
    baseline_havoc_campaign, run_campaign, CampaignConfig, CampaignMode,
    InstrumentedSqliteAdapter, MockAdapter, MockOutcome, MockRule, PatternTable, TargetAdapter,
    DEFAULT_BITMAP_SIZE,
};
use squirrelkit::grammar::parse_annotated;
use squirrelkit::instantiator::{
    build_dependency_graph, default_rules, parse_rules, retry_instantiate, RelationRule,
};
use squirrelkit::ir::{ast_to_ir, dump_program, ir_to_sql};
use squirrelkit::library::{strip_data, IrLibrary, DEFAULT_LIBRARY_CAP};
use squirrelkit::mutator::{generate, MutationConfig};
use std::io::Read;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "squirrelkit",
    about = "Grammar-aware coverage-guided fuzzing toolkit for SQL engines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a coverage-guided campaign against a target.
    Fuzz(FuzzArgs),
    /// Run the byte-mutation baseline campaign (no IR, no instantiation).
    Baseline(FuzzArgs),
    /// Translate SQL to its IR dump, one assignment per node.
    Translate(InputArg),
    /// Strip concrete data from SQL and print the skeleton.
    Strip(InputArg),
    /// Apply one round of type-based mutation to a query's skeleton.
    MutateOnce(MutateArgs),
    /// Instantiate a skeleton into a concrete executable query.
    Instantiate(InstantiateArgs),
    /// Print the dependency graph of a query in edge-list form.
    DepGraph(InstantiateArgs),
    /// Execute one query through an adapter and print its outcome class.
    Classify(ClassifyArgs),
    /// Render a campaign's stats stream as plot-ready tables.
    Stats(StatsArgs),
}

#[derive(Args)]
struct InputArg {
    /// SQL file; reads stdin when absent.
    file: Option<PathBuf>,
}

impl InputArg {
    fn read(&self) -> Result<String> {
        match &self.file {
            Some(path) => std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display())),
            None => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf)?;
                Ok(buf)
            }
        }
    }
}

#[derive(Args)]
struct FuzzArgs {
    /// Directory of seed queries, one per file.
    #[arg(long)]
    corpus: PathBuf,
    /// Campaign output directory.
    #[arg(long)]
    out: PathBuf,
    /// Target adapter: instrumented-sqlite | mock.
    #[arg(long)]
    target: String,
    /// Instrumented target binary (instrumented-sqlite only); defaults to
    /// target/instrumented/sqlite3-harness.
    #[arg(long)]
    target_bin: Option<PathBuf>,
    /// Time budget in seconds.
    #[arg(long, default_value_t = 60)]
    time: u64,
    /// Optional cap on loop executions (corpus priming excluded).
    #[arg(long)]
    max_execs: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BITMAP_SIZE)]
    bitmap_size: usize,
    /// Relation-rule file; built-in SQLite rules when absent.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Per-execution timeout in milliseconds.
    #[arg(long, default_value_t = 2000)]
    timeout_ms: u64,
    /// Exclude syntax-error outcomes from queue admission.
    #[arg(long)]
    drop_invalid_novelty: bool,
    /// Disable instantiation: execute mutated skeletons as-is.
    #[arg(long)]
    no_instantiate: bool,
    /// Reload queue and library from a previous run's output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct MutateArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra donor queries for the library (defaults to the input itself).
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct InstantiateArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArg,
    /// Target adapter: instrumented-sqlite | mock.
    #[arg(long, default_value = "instrumented-sqlite")]
    target: String,
    #[arg(long)]
    target_bin: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = DEFAULT_BITMAP_SIZE)]
    bitmap_size: usize,
}

#[derive(Args)]
struct StatsArgs {
    /// Campaign output directory holding stats.jsonl.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fuzz(args) => fuzz(args, CampaignMode::Full),
        Command::Baseline(args) => fuzz(args, CampaignMode::Havoc),
        Command::Translate(input) => {
            let prog = parse_annotated(&input.read()?)?;
            print!("{}", dump_program(&ast_to_ir(&prog)));
            Ok(())
        }
        Command::Strip(input) => {
            let prog = parse_annotated(&input.read()?)?;
            println!("{}", ir_to_sql(&strip_data(&ast_to_ir(&prog))));
            Ok(())
        }
        Command::MutateOnce(args) => mutate_once(args),
        Command::Instantiate(args) => {
            let (skeleton, rules, mut rng) = instantiate_setup(&args)?;
            match retry_instantiate(&skeleton, &rules, &mut rng, 3) {
                Ok(sql) => {
                    println!("{sql}");
                    Ok(())
                }
                Err(e) => bail!("{e}"),
            }
        }
        Command::DepGraph(args) => {
            let (skeleton, rules, mut rng) = instantiate_setup(&args)?;
            let graph = build_dependency_graph(&skeleton, &rules, &mut rng);
            print!("{}", graph.dump());
            Ok(())
        }
        Command::Classify(args) => classify_one(args),
        Command::Stats(args) => render_stats(args),
    }
}

fn make_adapter(
    target: &str,
    target_bin: Option<PathBuf>,
    bitmap_size: usize,
) -> Result<Box<dyn TargetAdapter>> {
    match target {
        "instrumented-sqlite" => {
            let bin =
                target_bin.unwrap_or_else(|| PathBuf::from("target/instrumented/sqlite3-harness"));
            if !bin.exists() {
                bail!(
                    "target binary {} not found; run scripts/build_instrumented_sqlite.sh",
                    bin.display()
                );
            }
            Ok(Box::new(InstrumentedSqliteAdapter::new(bin, bitmap_size)?))
        }
        "mock" => Ok(Box::new(MockAdapter::new(
            bitmap_size,
            vec![
                MockRule {
                    needle: "RELECT".into(),
                    outcome: MockOutcome::SyntaxError,
                },
                MockRule {
                    needle: "CRASH_ME".into(),
                    outcome: MockOutcome::Crash(11),
                },
            ],
        ))),
        other => bail!("unknown target adapter {other:?}"),
    }
}

fn fuzz(args: FuzzArgs, mode: CampaignMode) -> Result<()> {
    let mode = if args.no_instantiate && mode == CampaignMode::Full {
        CampaignMode::NoInstantiate
    } else {
        mode
    };
    let cfg = CampaignConfig {
        corpus_dir: args.corpus,
        output_dir: args.out.clone(),
        time_budget: Duration::from_secs(args.time),
        max_execs: args.max_execs,
        rng_seed: args.seed,
        bitmap_size: args.bitmap_size,
        exec_timeout: Duration::from_millis(args.timeout_ms),
        mutation: MutationConfig::default(),
        rules_path: args.rules.clone(),
        library_cap: DEFAULT_LIBRARY_CAP,
        drop_invalid_novelty: args.drop_invalid_novelty,
        mode,
        max_instantiate_tries: 3,
        resume: args.resume,
    };
    let mut adapter = make_adapter(&args.target, args.target_bin, args.bitmap_size)?;
    let stats = if mode == CampaignMode::Havoc {
        baseline_havoc_campaign(&cfg, adapter.as_mut())?
    } else {
        run_campaign(&cfg, adapter.as_mut())?
    };
    eprintln!(
        "done: {} execs, {} correct, {} semantic errors, {} syntax errors, {} unique crashes, {} edges",
        stats.executions,
        stats.correct,
        stats.semantic_error,
        stats.syntax_error,
        stats.crashes_unique,
        stats.global_edges
    );
    eprintln!("outputs in {}", args.out.display());
    Ok(())
}

fn mutate_once(args: MutateArgs) -> Result<()> {
    let sql = args.input.read()?;
    let prog = parse_annotated(&sql)?;
    let skeleton = strip_data(&ast_to_ir(&prog));
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut lib = IrLibrary::new(DEFAULT_LIBRARY_CAP);
    lib.insert(&skeleton, &mut rng);
    if let Some(dir) = &args.corpus {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if let Ok(text) = std::fs::read_to_string(&path) {
                if let Ok(p) = parse_annotated(&text) {
                    lib.insert(&strip_data(&ast_to_ir(&p)), &mut rng);
                }
            }
        }
    }
    let cfg = MutationConfig {
        p_insert: 0.2,
        p_replace: 0.2,
        p_delete: 0.1,
        max_candidates_per_input: 16,
        ..MutationConfig::default()
    };
    let candidates = generate(&skeleton, &lib, &cfg, &mut rng);
    match candidates
        .iter()
        .find(|c| !c.structural_eq(&skeleton))
        .or_else(|| candidates.first())
    {
        Some(c) => {
            println!("{}", ir_to_sql(c));
            Ok(())
        }
        None => bail!("no validated candidate produced; try another --seed"),
    }
}

fn instantiate_setup(
    args: &InstantiateArgs,
) -> Result<(squirrelkit::ir::IrProgram, Vec<RelationRule>, ChaCha8Rng)> {
    let prog = parse_annotated(&args.input.read()?)?;
    let skeleton = strip_data(&ast_to_ir(&prog));
    let rules = match &args.rules {
        Some(path) => parse_rules(&std::fs::read_to_string(path)?)?,
        None => default_rules(),
    };
    Ok((skeleton, rules, ChaCha8Rng::seed_from_u64(args.seed)))
}

fn classify_one(args: ClassifyArgs) -> Result<()> {
    let sql = args.input.read()?;
    let mut adapter = make_adapter(&args.target, args.target_bin, args.bitmap_size)?;
    let outcome = squirrelkit::fuzzer::execute(
        sql.as_bytes(),
        adapter.as_mut(),
        Duration::from_millis(args.timeout_ms),
        &PatternTable::default(),
    )?;
    println!("{:?}", outcome.class);
    if !outcome.detail.is_empty() {
        eprintln!("{}", outcome.detail);
    }
    Ok(())
}

fn render_stats(args: StatsArgs) -> Result<()> {
    let path = args.out.join("stats.jsonl");
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    println!(
        "{:>9} {:>9} {:>8} {:>7} {:>6} {:>8} {:>9} {:>8} {:>7} {:>7}",
        "elapsed_s",
        "execs",
        "exec/s",
        "edges",
        "queue",
        "library",
        "syntax_ok",
        "correct",
        "crash",
        "timeout"
    );
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line)?;
        println!(
            "{:>9.1} {:>9} {:>8.1} {:>7} {:>6} {:>8} {:>9} {:>8} {:>7} {:>7}",
            v["elapsed_s"].as_f64().unwrap_or(0.0),
            v["execs"].as_u64().unwrap_or(0),
            v["execs_per_s"].as_f64().unwrap_or(0.0),
            v["global_edges"].as_u64().unwrap_or(0),
            v["queue_len"].as_u64().unwrap_or(0),
            v["library_entries"].as_u64().unwrap_or(0),
            v["syntax_ok"].as_u64().unwrap_or(0),
            v["correct"].as_u64().unwrap_or(0),
            v["crashes_unique"].as_u64().unwrap_or(0),
            v["timeouts"].as_u64().unwrap_or(0)
        );
    }
    let summary = args.out.join("summary.json");
    if let Ok(text) = std::fs::read_to_string(&summary) {
        println!("\nsummary:\n{text}");
    }
    Ok(())
}
