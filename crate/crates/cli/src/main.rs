use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cipkit::bench::{bracket_report, load_config, read_records, run_bench, NODE_SHIFT, TIME_SHIFT};
use cipkit::cutsel::Selector;
use cipkit::model::{parse_problem, FileFormat};
use cipkit::search::{solve, BranchRule, SolveStats, SolverConfig, SymmetryHandling};
use cipkit::symmetry::SymmetryMode;

#[derive(Parser)]
#[command(name = "cipkit", version, about = "Compact branch-and-cut MILP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance (.mps, .cip or .lp).
    Solve(SolveArgs),
    /// Run every instance in a directory under several seeds and configs.
    Bench(BenchArgs),
    /// Summarize bench records against a baseline config.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CutselArg {
    Hybrid,
    Dynamic,
    Ensemble,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Hybrid,
    Gmi,
    Mostfrac,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    None,
    Perm,
    Signed,
}

#[derive(Clone, Copy, ValueEnum)]
enum HandlingArg {
    None,
    Sst,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "hybrid")]
    cutsel: CutselArg,
    #[arg(long, value_enum, default_value = "hybrid")]
    branching: BranchArg,
    #[arg(long, value_enum, default_value = "none")]
    symmetry: SymmetryArg,
    #[arg(long = "symmetry-handling", value_enum, default_value = "sst")]
    symmetry_handling: HandlingArg,
    /// -1 disables, 0 runs at the root only, k > 0 every k depths.
    #[arg(long = "lagromory-freq", default_value_t = -1, allow_hyphen_values = true)]
    lagromory_freq: i64,
    /// Defaults to on when the instance has indicator constraints.
    #[arg(long = "indicator-diving", value_enum)]
    indicator_diving: Option<Switch>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    #[arg(long = "node-limit")]
    node_limit: Option<u64>,
    /// Print a JSON summary instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct BenchArgs {
    dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, num_args = 2.., required = true)]
    configs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "time-limit", default_value_t = 60.0)]
    time_limit: f64,
}

#[derive(clap::Args)]
struct ReportArgs {
    records: PathBuf,
    #[arg(long)]
    baseline: String,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    instance: String,
    status: &'a str,
    objective: Option<f64>,
    dual_bound: Option<f64>,
    solution: Option<&'a [f64]>,
    stats: &'a SolveStats,
}

fn load_problem(path: &Path) -> Result<cipkit::Problem> {
    let format = FileFormat::from_path(path)
        .with_context(|| format!("{}: unknown file extension", path.display()))?;
    parse_problem(path, format).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let p = load_problem(&args.file)?;
    let cfg = SolverConfig {
        cutsel: match args.cutsel {
            CutselArg::Hybrid => Selector::Hybrid,
            CutselArg::Dynamic => Selector::Dynamic,
            CutselArg::Ensemble => Selector::Ensemble,
        },
        branching: match args.branching {
            BranchArg::Hybrid => BranchRule::Hybrid,
            BranchArg::Gmi => BranchRule::Gmi,
            BranchArg::Mostfrac => BranchRule::Mostfrac,
        },
        symmetry: match args.symmetry {
            SymmetryArg::None => SymmetryMode::None,
            SymmetryArg::Perm => SymmetryMode::Perm,
            SymmetryArg::Signed => SymmetryMode::Signed,
        },
        symmetry_handling: match args.symmetry_handling {
            HandlingArg::None => SymmetryHandling::None,
            HandlingArg::Sst => SymmetryHandling::Sst,
        },
        lagromory_freq: args.lagromory_freq,
        indicator_diving: args.indicator_diving.map(|s| matches!(s, Switch::On)),
        seed: args.seed,
        time_limit: args.time_limit,
        node_limit: args.node_limit,
        ..SolverConfig::default()
    };
    let out = solve(&p, &cfg)?;
    let objective = out.solution.as_ref().map(|s| p.external_objective(s.objective));
    let dual_bound = out
        .stats
        .dual_bound
        .is_finite()
        .then(|| p.external_objective(out.stats.dual_bound));
    if args.json {
        let summary = SolveSummary {
            instance: p.name.clone(),
            status: out.status.as_str(),
            objective,
            dual_bound,
            solution: out.solution.as_ref().map(|s| s.values.as_slice()),
            stats: &out.stats,
        };
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(());
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.9}"));
    println!("instance      {}", p.name);
    println!("status        {}", out.status.as_str());
    println!("objective     {}", fmt(objective));
    println!("dual bound    {}", fmt(dual_bound));
    println!("gap           {}", fmt(out.stats.gap));
    println!("nodes         {}", out.stats.nodes);
    println!("lp iterations {}", out.stats.lp_iterations);
    println!("time          {:.3}s", out.stats.wall_time);
    for (origin, n) in &out.stats.cuts_kept {
        println!("cuts kept     {origin}: {n}");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut instances: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .with_context(|| format!("reading {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && FileFormat::from_path(p).is_some())
        .collect();
    instances.sort();
    if instances.is_empty() {
        bail!("no instances found in {}", args.dir.display());
    }
    let configs = args
        .configs
        .iter()
        .map(|p| load_config(p))
        .collect::<Result<Vec<_>, _>>()?;
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let mut out = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    );
    let records = run_bench(&instances, &seeds, &configs, args.time_limit, &mut out)?;
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let file = File::open(&args.records).with_context(|| format!("opening {}", args.records.display()))?;
    let records = read_records(BufReader::new(file))?;
    let table = bracket_report(&records, &args.baseline, TIME_SHIFT, NODE_SHIFT)?;
    print!("{table}");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    }
}
