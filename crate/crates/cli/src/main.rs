use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use e2evrp_core::experiments::{
    augment_2evrp_instance, fit_power_law, generate_metro_instance, summarize, sweep, write_sweep_csv, AugmentConfig,
    AxisConvention, MetroGenConfig, SweepConfig, SweepMode,
};
use e2evrp_core::model::{check_feasibility, parse_instance, parse_solution, write_instance, write_solution, Instance};
use e2evrp_core::{lns_run_with, ng_lower_bound, LnsParams, Multigraph, NgLimits, NgSets, RunStats};

/// Station counts of the density set.
const SET7_STATIONS: [u32; 10] = [2, 3, 5, 10, 15, 20, 25, 30, 40, 50];
/// Battery capacities of the range set.
const SET8_BATTERIES: [u32; 10] = [800, 900, 1000, 1100, 1200, 1300, 1400, 1500, 1600, 1700];

#[derive(Parser)]
#[command(name = "e2evrp", version, about = "Electric two-echelon vehicle routing toolkit")]
struct Cli {
    /// Report failures as a JSON object on stdout.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with the large neighbourhood search.
    Solve(SolveArgs),
    /// Generate metropolitan-style instances.
    Generate(GenerateArgs),
    /// Add charging stations and a battery to a classical instance.
    Augment(AugmentArgs),
    /// Check a solution against an instance.
    Check(CheckArgs),
    /// Run a station-density or battery sensitivity sweep.
    Sweep(SweepArgs),
    /// Compute the ng-route lower bound.
    Bound(BoundArgs),
    /// Export the reduced multigraph as CSV.
    Graph(GraphArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Seconds per run.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Iteration budget per run; makes runs reproducible.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Seed of the first run; run `r` uses `seed + r`.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: u32,
    /// JSON object overriding search parameters, or a path to one.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the best solution here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Append the aggregate row to this CSV file (header written if new).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetId {
    #[value(name = "7")]
    Seven,
    #[value(name = "8")]
    Eight,
}

#[derive(Args)]
struct GenerateArgs {
    /// Write a whole benchmark set (10 levels x `--count` seeds) to `--out-dir`.
    #[arg(long, value_enum)]
    set: Option<SetId>,
    #[arg(long, default_value_t = 20)]
    count: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    stations: usize,
    /// Battery capacity, or `inf`.
    #[arg(long, default_value = "1000")]
    battery: String,
    /// Read ellipse extents as semi-axes instead of full axis lengths.
    #[arg(long)]
    semi_axes: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentArgs {
    base: PathBuf,
    #[arg(long)]
    gamma1: f64,
    #[arg(long, default_value_t = 0.15)]
    ratio: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    solution: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Density,
    Battery,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Comma-separated levels (station counts or battery capacities).
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long)]
    max_iterations: Option<u64>,
    #[arg(long, default_value_t = 1)]
    first_seed: u64,
    /// Battery for density sweeps, station count for battery sweeps.
    #[arg(long)]
    fixed: Option<u32>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    instance: PathBuf,
    /// ng-set size.
    #[arg(long, default_value_t = 12)]
    delta: usize,
    #[arg(long, default_value_t = NgLimits::default().max_labels)]
    max_labels: usize,
}

#[derive(Args)]
struct GraphArgs {
    instance: PathBuf,
    /// Keep dominated arcs.
    #[arg(long)]
    unreduced: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure that maps to a specific exit status.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.downcast_ref::<Exit>().map_or(2, |x| x.0);
            if cli.json_errors {
                let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
                println!("{}", serde_json::json!({ "error": chain.join(": "), "exit": code }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        Command::Augment(a) => augment(a),
        Command::Check(a) => check(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Bound(a) => bound(a),
        Command::Graph(a) => graph(a),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Aggregate {
    instance: String,
    avg: Option<f64>,
    best: Option<i64>,
    t_star_avg: f64,
    runs: usize,
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let mut params = match &a.params {
        Some(p) => {
            let text = if Path::new(p).is_file() { fs::read_to_string(p)? } else { p.clone() };
            serde_json::from_str::<LnsParams>(&text).context("parsing --params")?
        }
        None => LnsParams::default(),
    };
    if let Some(t) = a.time_limit {
        params.t_max = t;
    }
    if a.max_iterations.is_some() {
        params.max_iterations = a.max_iterations;
    }
    params.validate().map_err(anyhow::Error::msg)?;
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let graph = Multigraph::new(&inst);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads).build()?;
    let results: Vec<_> = pool.install(|| {
        (0..u64::from(a.runs))
            .into_par_iter()
            .map(|r| lns_run_with(&inst, &graph, &LnsParams { seed: a.seed + r, ..params.clone() }))
            .collect()
    });
    let stats: Vec<&RunStats> = results.iter().map(|r| &r.stats).collect();
    let costs: Vec<i64> = stats.iter().filter_map(|s| s.best_cost).collect();
    let agg = Aggregate {
        instance: inst.name.clone(),
        avg: (!costs.is_empty()).then(|| costs.iter().sum::<i64>() as f64 / costs.len() as f64),
        best: costs.iter().copied().min(),
        t_star_avg: stats.iter().map(|s| s.time_to_best).sum::<f64>() / stats.len() as f64,
        runs: stats.len(),
    };
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "runs": stats, "aggregate": agg }))?);
    if let Some(csv) = &a.csv {
        let fresh = !csv.exists();
        let mut f = fs::OpenOptions::new().create(true).append(true).open(csv)?;
        if fresh {
            writeln!(f, "instance,avg,best,t_star_avg,runs")?;
        }
        let opt = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            f,
            "{},{},{},{:.3},{}",
            agg.instance,
            opt(agg.avg.map(|v| format!("{v:.2}"))),
            opt(agg.best.map(|v| v.to_string())),
            agg.t_star_avg,
            agg.runs
        )?;
    }
    let best = results
        .iter()
        .filter_map(|r| r.solution.as_ref())
        .min_by_key(|s| s.total_cost());
    match best {
        Some(sol) => {
            if let Some(out) = &a.output {
                fs::write(out, write_solution(&inst, sol))?;
            }
            Ok(())
        }
        None => Err(Exit(1, "no battery-feasible solution found within the budget".into()).into()),
    }
}

fn parse_battery(s: &str) -> Result<Option<u32>> {
    match s {
        "inf" | "-" => Ok(None),
        _ => Ok(Some(s.parse().context("--battery must be an integer or `inf`")?)),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let axes = if a.semi_axes { AxisConvention::SemiAxis } else { AxisConvention::FullLength };
    let base = MetroGenConfig {
        seed: a.seed,
        stations: a.stations,
        battery: parse_battery(&a.battery)?,
        axes,
        ..MetroGenConfig::default()
    };
    let Some(set) = a.set else {
        let inst = generate_metro_instance(&base)?;
        return emit(a.output.as_deref(), &write_instance(&inst));
    };
    let dir = a.out_dir.context("--set needs --out-dir")?;
    fs::create_dir_all(&dir)?;
    let configs: Vec<MetroGenConfig> = match set {
        SetId::Seven => SET7_STATIONS
            .iter()
            .map(|&n| MetroGenConfig { stations: n as usize, battery: Some(1000), ..base.clone() })
            .collect(),
        SetId::Eight => SET8_BATTERIES
            .iter()
            .map(|&l| MetroGenConfig { stations: 20, battery: Some(l), ..base.clone() })
            .collect(),
    };
    let mut written = 0;
    for cfg in configs {
        for seed in 1..=a.count {
            let inst = generate_metro_instance(&MetroGenConfig { seed, ..cfg.clone() })?;
            fs::write(dir.join(format!("{}.txt", inst.name)), write_instance(&inst))?;
            written += 1;
        }
    }
    println!("{written} instances written to {}", dir.display());
    Ok(())
}

fn augment(a: AugmentArgs) -> Result<()> {
    let base = read_instance(&a.base)?;
    let cfg = AugmentConfig { gamma1: a.gamma1, station_ratio: a.ratio, seed: a.seed };
    let inst = augment_2evrp_instance(base.data(), &cfg)?;
    emit(a.output.as_deref(), &write_instance(&inst))
}

fn check(a: CheckArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let text = fs::read_to_string(&a.solution).with_context(|| format!("reading {}", a.solution.display()))?;
    let sol = parse_solution(&inst, &text).with_context(|| format!("parsing {}", a.solution.display()))?;
    let verdict = check_feasibility(&inst, &sol);
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "feasible": verdict.is_ok(),
            "cost": sol.cost,
            "station_visits": sol.station_visits(&inst),
            "violations": verdict.violations,
        }))?
    );
    if verdict.is_ok() {
        Ok(())
    } else {
        let msgs: Vec<String> = verdict.violations.iter().map(|v| v.to_string()).collect();
        Err(Exit(1, format!("infeasible solution: {}", msgs.join("; "))).into())
    }
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Density => SweepMode::Density,
        ModeArg::Battery => SweepMode::Battery,
    };
    let mut generator = MetroGenConfig::default();
    match mode {
        SweepMode::Density => generator.battery = Some(a.fixed.unwrap_or(1000)),
        SweepMode::Battery => generator.stations = a.fixed.unwrap_or(20) as usize,
    }
    let cfg = SweepConfig {
        mode,
        levels: a.levels,
        first_instance_seed: a.first_seed,
        instances_per_level: a.instances,
        runs_per_instance: a.runs,
        params: LnsParams {
            t_max: a.time_limit,
            max_iterations: a.max_iterations,
            ..LnsParams::default()
        },
        generator,
        threads: a.threads,
    };
    cfg.params.validate().map_err(anyhow::Error::msg)?;
    let records = sweep(&cfg)?;
    let mut csv = Vec::new();
    write_sweep_csv(&records, &mut csv)?;
    emit(a.output.as_deref(), std::str::from_utf8(&csv)?)?;
    let summary = summarize(&records);
    for s in &summary {
        eprintln!(
            "level {:>5}: mean detour {:>7.3}%  mean station visits {:>6.2}  ({} records, {} missing)",
            s.level, s.mean_detour_pct, s.mean_station_visits, s.records, s.missing
        );
    }
    if mode == SweepMode::Density {
        let pts: Vec<(f64, f64)> = summary.iter().map(|s| (f64::from(s.level), s.mean_detour_pct)).collect();
        if let Some(fit) = fit_power_law(&pts) {
            eprintln!("power law: alpha {:.4} beta {:.4} residual {:.4}", fit.alpha, fit.beta, fit.residual);
        }
    }
    Ok(())
}

fn bound(a: BoundArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let graph = Multigraph::new(&inst);
    let ng = NgSets::nearest(&inst, a.delta)?;
    let report = ng_lower_bound(&inst, &graph, &ng, NgLimits { max_labels: a.max_labels })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn graph(a: GraphArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let g = if a.unreduced { Multigraph::build(&inst) } else { Multigraph::new(&inst) };
    let mut out = Vec::new();
    g.write_csv(&inst, &mut out)?;
    emit(a.output.as_deref(), std::str::from_utf8(&out)?)
}
