//! `bve`: run boundary exploration strategies, report quality/diversity
//! metrics, and plot boundary visualizations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bve_core::budget::Budget;
use bve_core::derivative::OutputDistanceKind;
use bve_core::error::Error as CoreError;
use bve_core::metrics::import_external;
use bve_core::plot::{plot, PlotOptions};
use bve_core::record::{collect_record_paths, RunRecord};
use bve_core::report::{build_report, render_text, write_report_files, ExternalImport};
use bve_core::runner::{run, StrategyConfig};
use bve_core::sampler::SamplerKind;
use bve_core::sut::find_sut;
use bve_core::SelectionWeight;

#[derive(Parser)]
#[command(
    name = "bve",
    version,
    about = "Quality-diversity boundary value exploration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a search strategy and persist run records.
    Run(RunArgs),
    /// Aggregate run records (and imports) into metric tables.
    Report(ReportArgs),
    /// Emit SVG scatter plots of discovered boundaries.
    Plot(PlotArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// Config file with `key = value` lines mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subject under test, e.g. circle, bmi, date, bytecount.
    #[arg(long)]
    sut: Option<String>,
    /// Phase combination: S, SE, ST or SET.
    #[arg(long)]
    strategy: Option<String>,
    /// Sampling method: cts-bu or uniform-int64.
    #[arg(long)]
    sampler: Option<String>,
    /// Explorer parent selection: uniform, fitness or curiosity.
    #[arg(long)]
    selection: Option<String>,
    /// Wall-clock budget in seconds.
    #[arg(long, conflicts_with = "budget_evals")]
    budget_seconds: Option<f64>,
    /// Evaluation-count budget (hardware independent).
    #[arg(long)]
    budget_evals: Option<u64>,
    /// Budget split percentages as `sampler,explorer,tracer`.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Repetitions; run i derives seed `seed + i`.
    #[arg(long)]
    reps: Option<u32>,
    /// Output directory for run records.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output distance: jaccard (default) or strlendist.
    #[arg(long)]
    output_distance: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Record files or directories containing .jsonl records.
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    /// External candidate CSVs to include as comparison strategies.
    #[arg(long)]
    import: Vec<PathBuf>,
    /// Trust recorded outputs in imports instead of re-evaluating.
    #[arg(long)]
    import_trust: bool,
    /// Output directory for summary and pairwise CSVs.
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    #[arg(long)]
    sut: String,
    /// Input argument indices for the axes, e.g. `0,1`.
    #[arg(long)]
    projection: Option<String>,
    /// Explicit x-axis limits as `min,max`.
    #[arg(long, allow_hyphen_values = true)]
    xlim: Option<String>,
    /// Explicit y-axis limits as `min,max`.
    #[arg(long, allow_hyphen_values = true)]
    ylim: Option<String>,
    #[arg(long, default_value = "plots")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // bad flags are config errors
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Report(args) => cmd_report(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::InvalidConfig(_)
            | CoreError::SutNotFound(_)
            | CoreError::Schema { .. }
            | CoreError::ArityUnsupported(..)
            | CoreError::EmptyInput(_),
        ) => 1,
        Some(_) => 2,
        // flag/config parsing problems surface as InvalidConfig; anything
        // else that bubbles here is a runtime failure
        None => match e.to_string().starts_with("config:") {
            true => 1,
            false => 2,
        },
    }
}

fn config_err(msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::from(CoreError::InvalidConfig(msg.to_string()))
}

/// `key = value` lines, `#` comments; keys match the long flag names.
fn read_config_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_split(text: &str) -> anyhow::Result<(u8, u8, u8)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(config_err(format!(
            "split `{text}` must be three percentages"
        )));
    }
    let mut values = [0u8; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| config_err(format!("split component `{part}`: {e}")))?;
    }
    Ok((values[0], values[1], values[2]))
}

fn parse_pair(text: &str, what: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| config_err(format!("{what} `{text}` must be `min,max`")))?;
    let lo = a
        .trim()
        .parse()
        .map_err(|e| config_err(format!("{what}: {e}")))?;
    let hi = b
        .trim()
        .parse()
        .map_err(|e| config_err(format!("{what}: {e}")))?;
    Ok((lo, hi))
}

fn build_strategy_config(args: &RunArgs) -> anyhow::Result<(StrategyConfig, PathBuf)> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let pick = |flag: &Option<String>, key: &str| -> Option<String> {
        flag.clone().or_else(|| file.get(key).cloned())
    };
    let sut = pick(&args.sut, "sut").ok_or_else(|| config_err("missing --sut"))?;
    let strategy =
        pick(&args.strategy, "strategy").ok_or_else(|| config_err("missing --strategy"))?;

    let budget_seconds = match args.budget_seconds {
        Some(v) => Some(v),
        None => file
            .get("budget-seconds")
            .map(|v| {
                v.parse()
                    .map_err(|e| config_err(format!("budget-seconds: {e}")))
            })
            .transpose()?,
    };
    let budget_evals = match args.budget_evals {
        Some(v) => Some(v),
        None => file
            .get("budget-evals")
            .map(|v| {
                v.parse()
                    .map_err(|e| config_err(format!("budget-evals: {e}")))
            })
            .transpose()?,
    };
    let budget = match (budget_seconds, budget_evals) {
        (Some(_), Some(_)) => {
            return Err(config_err(
                "choose one of --budget-seconds / --budget-evals",
            ))
        }
        (Some(secs), None) => Budget::WallClockSeconds(secs),
        (None, Some(evals)) => Budget::EvaluationCount(evals),
        (None, None) => return Err(config_err("missing --budget-seconds or --budget-evals")),
    };

    let mut config = StrategyConfig::for_strategy(&strategy, sut, budget, 0)?;

    if let Some(sampler) = pick(&args.sampler, "sampler") {
        config.sampler = match sampler.as_str() {
            "cts-bu" | "cts_bu" => SamplerKind::CtsBituniform,
            "uniform-int64" | "rand64" => SamplerKind::UniformInt64,
            other => return Err(config_err(format!("unknown sampler `{other}`"))),
        };
    }
    if let Some(selection) = pick(&args.selection, "selection") {
        let weight = match selection.as_str() {
            "uniform" => SelectionWeight::Uniform,
            "fitness" => SelectionWeight::Fitness,
            "curiosity" => SelectionWeight::Curiosity,
            other => return Err(config_err(format!("unknown selection `{other}`"))),
        };
        if config.selection.is_none() {
            return Err(config_err(format!(
                "--selection only applies to SE/SET strategies, not {strategy}"
            )));
        }
        config.selection = Some(weight);
    }
    if let Some(split) = pick(&args.split, "split") {
        config.split = parse_split(&split)?;
    }
    if let Some(seed) = args
        .seed
        .or_else(|| file.get("seed").and_then(|v| v.parse().ok()))
    {
        config.seed = seed;
    } else {
        config.seed = 42;
    }
    if let Some(reps) = args
        .reps
        .or_else(|| file.get("reps").and_then(|v| v.parse().ok()))
    {
        config.repetitions = reps;
    }
    if let Some(dist) = pick(&args.output_distance, "output-distance") {
        config.output_distance = match dist.as_str() {
            "jaccard" => OutputDistanceKind::Jaccard2Gram,
            "strlendist" => OutputDistanceKind::StringLengthDiff,
            other => return Err(config_err(format!("unknown output distance `{other}`"))),
        };
    }
    config.validate()?;

    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    Ok((config, out))
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let (config, out) = build_strategy_config(&args)?;
    let records = run(&config, Some(&out))?;
    for record in &records {
        println!(
            "run {}: {} archive cells, {} trace populations, {} evaluations -> {}",
            record.run_index,
            record.archive_rows.len(),
            record.trace_populations.len(),
            record.evaluation_count,
            out.join(format!("{}.jsonl", record.file_stem())).display()
        );
        for note in &record.notes {
            eprintln!("note: {note}");
        }
    }
    Ok(())
}

fn load_records(inputs: &[PathBuf]) -> anyhow::Result<Vec<RunRecord>> {
    let paths = collect_record_paths(inputs)?;
    if paths.is_empty() {
        return Err(anyhow::Error::from(CoreError::EmptyInput(
            "no record files found",
        )));
    }
    paths
        .iter()
        .map(|p| RunRecord::read_from(p).map_err(anyhow::Error::from))
        .collect()
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<()> {
    let records = load_records(&args.records)?;
    let mut imports = Vec::new();
    for path in &args.import {
        let label = format!(
            "import:{}",
            path.file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_default()
        );
        // import once per SUT named in the file
        let mut names: Vec<String> = Vec::new();
        {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            for line in text.lines().skip(1) {
                if let Some(name) = line.split(',').next() {
                    let name = name.trim().to_string();
                    if !name.is_empty() && !names.contains(&name) {
                        names.push(name);
                    }
                }
            }
        }
        for name in names {
            let sut = find_sut(&name)?;
            let (candidates, warnings) = import_external(path, &sut, !args.import_trust)?;
            for w in warnings {
                eprintln!("{}:{}: warning: {}", path.display(), w.line, w.message);
            }
            imports.push(ExternalImport {
                label: label.clone(),
                sut: name,
                candidates,
            });
        }
    }
    let report = build_report(&records, &imports)?;
    print!("{}", render_text(&report));
    let paths = write_report_files(&report, &args.out)?;
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> anyhow::Result<()> {
    let records = load_records(&args.records)?;
    let sut = find_sut(&args.sut)?;
    let mut options = PlotOptions::default();
    if let Some(projection) = &args.projection {
        let (x, y) = parse_pair(projection, "projection")?;
        options.projection = (x as usize, y as usize);
    }
    if let Some(xlim) = &args.xlim {
        options.xlim = Some(parse_pair(xlim, "xlim")?);
    }
    if let Some(ylim) = &args.ylim {
        options.ylim = Some(parse_pair(ylim, "ylim")?);
    }
    let (paths, notes) = plot(&records, &sut, &options, &args.out)?;
    for note in notes {
        eprintln!("note: {note}");
    }
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}
