use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bfeq::{parse_facts, Triple, UpdateOptions, UpdateReport};
use bfeq_bench::{compare, snapshot, write_csv, CsvRow, Dataset, GenSpec, Mode, Strategy};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

/// Datalog materialisation with owl:sameAs rewriting, incremental deletion
/// and update-strategy benchmarks.
#[derive(Parser)]
#[command(name = "bfeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialise a dataset and write a snapshot directory.
    Materialise(MaterialiseArgs),
    /// Delete facts from a snapshot using one or all update strategies.
    Update(UpdateArgs),
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
    /// Check incremental deletion against the oracles on a small dataset.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct MaterialiseArgs {
    #[arg(long)]
    facts: PathBuf,
    #[arg(long)]
    rules: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Rewrite)]
    mode: Mode,
    /// Snapshot directory to create.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the JSON statistics; stdout if omitted.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Dataset name used in reports; defaults to the facts file stem.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyChoice {
    Bfeq,
    BfAxiom,
    RematEq,
    RematAxiom,
    All,
}

#[derive(Args)]
struct DeletionArgs {
    /// File of facts to delete.
    #[arg(long, conflicts_with_all = ["fraction", "sweep"])]
    delete: Option<PathBuf>,
    /// Delete a random fraction of the explicit facts.
    #[arg(long, requires = "seed", value_parser = parse_fraction)]
    fraction: Option<f64>,
    /// Run once per fraction in a comma-separated list.
    #[arg(long, requires = "seed", value_delimiter = ',', value_parser = parse_fraction, conflicts_with = "fraction")]
    sweep: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct UpdateArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyChoice,
    #[command(flatten)]
    deletions: DeletionArgs,
    /// Track explicit facts per representative during B/F≈.
    #[arg(long)]
    bookkeeping: bool,
    /// JSON file receiving the full update reports.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV file receiving one row per run; stdout if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the updated store here (single strategy and deletion set only).
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    generator: Generator,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "facts.nt")]
    out_facts: PathBuf,
    #[arg(long, global = true, default_value = "rules.dl")]
    out_rules: PathBuf,
}

#[derive(Subcommand)]
enum Generator {
    /// Blocks of `a R b, c R d` under rules making R bijective.
    Bijective {
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        /// Probability that a block gets the merging edge `a R d`.
        #[arg(long, default_value_t = 1.0)]
        bridge: f64,
    },
    /// Groups connected by a symmetric and transitive relation.
    Clique {
        #[arg(long, default_value_t = 500)]
        constants: usize,
        #[arg(long, default_value_t = 10)]
        groups: usize,
        #[arg(long, default_value_t = 0)]
        extra_edges: usize,
        /// Also make group members equal.
        #[arg(long)]
        equality: bool,
    },
    /// A path under a transitivity rule.
    Chain {
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        equalities: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    facts: PathBuf,
    #[arg(long)]
    rules: PathBuf,
    #[command(flatten)]
    deletions: DeletionArgs,
}

/// A request that cannot be served as given; reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let f: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if f > 0.0 && f <= 1.0 {
        Ok(f)
    } else {
        Err(format!("fraction {f} is outside (0, 1]"))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_dataset(facts: &Path, rules: &Path, name: Option<String>) -> Result<Dataset> {
    let name = name.unwrap_or_else(|| facts.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned()));
    Dataset::parse(&name, &read(facts)?, &read(rules)?).with_context(|| format!("loading {}", facts.display()))
}

/// Resolves the requested deletion sets.
fn deletion_sets(args: &DeletionArgs, dataset: &Dataset) -> Result<Vec<Vec<Triple>>> {
    if let Some(path) = &args.delete {
        let mut dict = dataset.dict.clone();
        let facts = parse_facts(&read(path)?, &mut dict).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(vec![facts]);
    }
    let seed = args.seed.unwrap_or_default();
    let fractions: Vec<f64> = args.fraction.into_iter().chain(args.sweep.iter().copied()).collect();
    if fractions.is_empty() {
        return Err(UsageError("give one of --delete, --fraction or --sweep".into()).into());
    }
    Ok(fractions.into_iter().map(|f| dataset.random_deletions(f, seed)).collect())
}

fn materialise_cmd(args: MaterialiseArgs) -> Result<()> {
    let dataset = load_dataset(&args.facts, &args.rules, args.dataset)?;
    let (store, stats) = bfeq_bench::materialise(&dataset.name, &dataset.explicit_set(), &dataset.program, args.mode);
    info!("materialised {} facts in {:.1} ms", stats.facts, stats.wall_ms);
    snapshot::save(&args.out, &dataset, &store)?;
    let json = serde_json::to_string_pretty(&stats)? + "\n";
    match args.stats {
        Some(path) => write(&path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn update_cmd(args: UpdateArgs) -> Result<()> {
    let (dataset, store) = snapshot::load(&args.snapshot)?;
    let strategies: Vec<Strategy> = match args.strategy {
        StrategyChoice::Bfeq => vec![Strategy::Bfeq],
        StrategyChoice::BfAxiom => vec![Strategy::BfAxiom],
        StrategyChoice::RematEq => vec![Strategy::RematEq],
        StrategyChoice::RematAxiom => vec![Strategy::RematAxiom],
        StrategyChoice::All => Strategy::ALL.to_vec(),
    };
    if let [only] = strategies[..] {
        if only.mode() != store.mode() {
            return Err(UsageError(format!(
                "strategy {only} needs a snapshot in {} mode, but {} holds a {} snapshot",
                only.mode(),
                args.snapshot.display(),
                store.mode()
            ))
            .into());
        }
    }
    let sets = deletion_sets(&args.deletions, &dataset)?;
    if args.save.is_some() && (strategies.len() != 1 || sets.len() != 1) {
        return Err(UsageError("--save needs a single strategy and a single deletion set".into()).into());
    }
    let options = UpdateOptions { bookkeeping: args.bookkeeping, trace: false };
    let mut rows = Vec::new();
    let mut reports: Vec<UpdateReport> = Vec::new();
    for deletions in &sets {
        if let [only] = strategies[..] {
            let mut store = store.clone();
            let report = bfeq_bench::run(only, &mut store, deletions, options);
            rows.push(CsvRow::new(&dataset.name, dataset.explicit.len(), dataset.program.len(), &report));
            reports.push(report);
            if let Some(dir) = &args.save {
                snapshot::save(dir, &dataset, &store)?;
            }
        } else {
            let outcomes = compare(&dataset, &strategies, deletions, options);
            if !bfeq_bench::agree(&outcomes) {
                bail!("strategies disagree on the updated store");
            }
            for o in outcomes {
                info!("{}: D = {}", o.strategy, o.report.total_derivations);
                rows.push(o.row);
                reports.push(o.report);
            }
        }
    }
    if let Some(path) = &args.report {
        write(path, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    }
    match &args.csv {
        Some(path) => write_csv(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?, &rows),
        None => write_csv(std::io::stdout().lock(), &rows),
    }
}

fn generate_cmd(args: GenerateArgs) -> Result<()> {
    let spec = match args.generator {
        Generator::Bijective { blocks, bridge } => GenSpec::Bijective { blocks, bridge },
        Generator::Clique { constants, groups, extra_edges, equality } => {
            GenSpec::Clique { constants, groups, extra_edges, equality }
        }
        Generator::Chain { length, equalities } => GenSpec::Chain { length, equalities },
    };
    let generated = spec.generate(args.seed)?;
    write(&args.out_facts, &generated.facts)?;
    write(&args.out_rules, &generated.rules)?;
    info!("wrote {} to {}", spec.name(), args.out_facts.display());
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Result<()> {
    let dataset = load_dataset(&args.facts, &args.rules, None)?;
    let sets = if args.deletions.delete.is_none() && args.deletions.fraction.is_none() && args.deletions.sweep.is_empty() {
        (1..=10).map(|k| dataset.random_deletions(f64::from(k) / 10.0, args.deletions.seed.unwrap_or_default())).collect()
    } else {
        deletion_sets(&args.deletions, &dataset)?
    };
    for deletions in &sets {
        bfeq_bench::verify(&dataset, deletions).with_context(|| format!("deleting {} facts", deletions.len()))?;
        let outcomes = compare(&dataset, &Strategy::ALL, deletions, UpdateOptions::default());
        if !bfeq_bench::agree(&outcomes) {
            bail!("strategies disagree after deleting {} facts", deletions.len());
        }
    }
    println!("ok: {} deletion sets verified", sets.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Materialise(a) => materialise_cmd(a),
        Command::Update(a) => update_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
