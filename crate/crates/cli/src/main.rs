use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use reasonkit::abductive::{parse_ratio, OrderStrategy, Rational};
use reasonkit::pipeline::{self, BatchConfig, ExplainKind};
use reasonkit::tree_format::{read_tree, write_tree};
use reasonkit::verify::{self, VerifyConfig};
use reasonkit::{Error, Instance};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "reasonkit",
    version,
    about = "Explain the decisions of Boolean decision trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate a Gini tree learner on a CSV file and save every fold's tree.
    Learn(LearnArgs),
    /// Explain tree decisions, one JSON report per instance on stdout.
    Explain(ExplainArgs),
    /// Check the algorithms against brute-force oracles on random trees.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct LearnArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    label: String,
    /// Class treated as positive (one versus all).
    #[arg(long)]
    target_class: Option<String>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, env = "REASONKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    /// Deepest literal of the decision path first.
    Path,
    /// Ascending variable index.
    Index,
}

#[derive(clap::Args)]
struct ExplainArgs {
    /// Tree file in JSON format.
    #[arg(long)]
    tree: PathBuf,
    /// One instance as a bit string, e.g. 1011.
    #[arg(
        long,
        conflicts_with = "instances",
        required_unless_present = "instances"
    )]
    instance: Option<String>,
    /// File with one bit string per line; blank lines and lines starting
    /// with '#' are skipped.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Comma-separated kinds: direct, sufficient, minimal, minimal-greedy,
    /// minimal-all, probable, contrastive, features, importance, sufficient-all.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "direct,sufficient,minimal"
    )]
    kinds: Vec<ExplainKind>,
    /// Precision threshold p/q for probable reasons; repeatable.
    #[arg(long = "delta", value_parser = parse_delta)]
    deltas: Vec<Rational>,
    /// Limit for enumerations; reports say complete=false when it is hit.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    cap: u64,
    #[arg(long, value_enum, default_value = "path")]
    order: Order,
    /// Explain at most this many instances, sampled with the seed.
    #[arg(long, default_value_t = 100)]
    sample_limit: usize,
    #[arg(long, env = "REASONKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write aggregate statistics as JSON to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write one importance CSV per instance into this directory.
    #[arg(long)]
    importance_csv: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=16))]
    max_vars: u64,
    #[arg(long, env = "REASONKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Flip one leaf off each instance's path before running the algorithms
    /// (the oracles keep the original tree). Checks are expected to fail.
    #[arg(long)]
    mutant: bool,
    /// Print the full report as JSON instead of the matrix.
    #[arg(long)]
    json: bool,
}

fn parse_delta(s: &str) -> std::result::Result<Rational, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

fn learn(args: &LearnArgs) -> Result<()> {
    let data = pipeline::ingest_csv(&args.data, &args.label, args.target_class.as_deref())
        .with_context(|| format!("reading {}", args.data.display()))?;
    let results = pipeline::cross_validate(&data, args.folds, args.seed)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut folds = Vec::new();
    for r in &results {
        let stem = args.out_dir.join(format!("fold-{}", r.fold));
        let tree_path = stem.with_extension("tree.json");
        write_tree(&r.model.tree, &tree_path)?;
        fs::write(
            stem.with_extension("features.json"),
            serde_json::to_string_pretty(&r.model.features)? + "\n",
        )?;
        let mut lines = String::new();
        for &row in &r.test_rows {
            lines += &r.model.binarize_row(&data, row).to_string();
            lines.push('\n');
        }
        fs::write(stem.with_extension("instances.txt"), lines)?;
        folds.push(json!({
            "fold": r.fold,
            "tree": tree_path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "test_rows": r.test_rows.len(),
            "accuracy": r.accuracy,
            "nodes": r.model.tree.size(),
            "features": r.model.features.len(),
        }));
    }
    let mean = results.iter().map(|r| r.accuracy).sum::<f64>() / results.len() as f64;
    let summary = json!({
        "data": args.data.file_name().map(|n| n.to_string_lossy().into_owned()),
        "rows": data.len(),
        "positive_class": data.positive_class(),
        "folds": folds,
        "seed": args.seed,
        "mean_accuracy": mean,
    });
    fs::write(
        args.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    eprintln!(
        "{} folds, mean accuracy {mean:.4}, written to {}",
        results.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn read_instances(path: &Path) -> Result<Vec<Instance>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse()
                .with_context(|| format!("{}:{}", path.display(), i + 1))
        })
        .collect()
}

fn explain(args: &ExplainArgs) -> Result<()> {
    let tree = read_tree(&args.tree).with_context(|| format!("reading {}", args.tree.display()))?;
    let instances = match (&args.instance, &args.instances) {
        (Some(bits), _) => vec![bits.parse::<Instance>()?],
        (None, Some(path)) => read_instances(path)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let config = BatchConfig {
        kinds: args.kinds.clone(),
        deltas: if args.deltas.is_empty() {
            BatchConfig::default().deltas
        } else {
            args.deltas.clone()
        },
        cap: usize::try_from(args.cap).unwrap_or(usize::MAX),
        order: match args.order {
            Order::Path => OrderStrategy::Path,
            Order::Index => OrderStrategy::Index,
        },
        sample_limit: args.sample_limit,
        seed: args.seed,
        jobs: args.jobs,
    };
    let out = pipeline::batch_explain(&tree, &instances, &config)?;

    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for r in &out.reports {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;

    if let Some(dir) = &args.importance_csv {
        fs::create_dir_all(dir)?;
        for r in &out.reports {
            if let Some(imp) = &r.importance {
                fs::write(
                    dir.join(format!("importance-{}.csv", r.index)),
                    imp.to_csv()?,
                )?;
            }
        }
    }
    if let Some(path) = &args.stats {
        fs::write(path, serde_json::to_string_pretty(&out.stats)? + "\n")?;
    }
    let failed = out.reports.iter().filter(|r| !r.errors.is_empty()).count();
    if failed > 0 {
        anyhow::bail!("{failed} of {} instances had errors", out.reports.len());
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let config = VerifyConfig {
        trials: args.trials,
        max_vars: args.max_vars as usize,
        seed: args.seed,
        mutant: args.mutant,
        ..VerifyConfig::default()
    };
    let report = verify::run(&config)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.matrix());
        let g = &report.greedy_ratio;
        println!(
            "greedy/optimal size ratio: mean {:.4}, max {:.4}, optimal on {:.1}% of {} queries",
            g.mean,
            g.max,
            100.0 * g.optimal_share,
            g.samples
        );
        let sizes: Vec<String> = report
            .probable_mean_sizes
            .iter()
            .map(|(d, s)| format!("δ={d}: {s:.3}"))
            .collect();
        println!("mean probable-reason size: {}", sizes.join(", "));
        println!(
            "{} trials: {}",
            report.trials,
            if report.all_passed() {
                "all checks passed"
            } else {
                "FAILED"
            }
        );
    }
    Ok(report.all_passed())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::TooFewRows { .. }
            | Error::InvalidFolds(_)
            | Error::InvalidDelta(_)
            | Error::ZeroCap,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Learn(a) => learn(a).map(|()| true),
        Command::Explain(a) => explain(a).map(|()| true),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
