//! `covns` command line: generate benchmark scenarios, solve them with the
//! three solvers, run seeded experiment grids, and report Friedman/Holm
//! statistics.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors
//! (including missing input files).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use covns_core::benchgen::{generate_scenario, load_scenario, GenSpec, ScenarioMode};
use covns_core::harness::{run_experiment, Algorithm, ExperimentPlan};
use covns_core::multitask::{solve_covns, solve_pvns, MigrationDirection, MigrationPolicy};
use covns_core::operators::OperatorKind;
use covns_core::stats::{build_report, ResultMatrix};
use covns_core::vns::{solve_svns, VnsConfig};

#[derive(Parser)]
#[command(
    name = "covns",
    version,
    about = "Multitask community detection over weighted directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic OI/UI benchmark scenario
    Generate(GenerateArgs),
    /// Solve one scenario with covns, pvns or svns
    Solve(SolveArgs),
    /// Run an (algorithm x seed) experiment grid over a scenario
    Experiment(ExperimentArgs),
    /// Aggregate a results CSV into fitness tables, Friedman ranks and Holm p-values
    Report(ReportArgs),
}

fn parse_mode(s: &str) -> Result<ScenarioMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_direction(s: &str) -> Result<MigrationDirection, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_operator(s: &str) -> Result<OperatorKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario mode: oi (append nodes) or ui (prepend nodes)
    #[arg(long, default_value = "oi", value_parser = parse_mode)]
    mode: ScenarioMode,
    /// Node count of the base instance
    #[arg(long, default_value_t = 50)]
    base: usize,
    /// Nodes added per chained instance
    #[arg(long, default_value_t = 5)]
    increment: usize,
    /// Number of instances in the chain
    #[arg(long, default_value_t = 11)]
    count: usize,
    /// Planted community count
    #[arg(long, default_value_t = 8)]
    communities: usize,
    /// Intra-community edge probability
    #[arg(long, default_value_t = 0.85)]
    p_in: f64,
    /// Inter-community edge probability
    #[arg(long, default_value_t = 0.15)]
    p_out: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for graph files and the scenario manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// covns, pvns or svns; defaults to the manifest's algorithm field
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Scenario manifest path
    #[arg(long)]
    scenario: PathBuf,
    /// Run seed; defaults to the manifest's seed field
    #[arg(long)]
    seed: Option<u64>,
    /// Individuals per deme (N)
    #[arg(long)]
    n: Option<usize>,
    /// Evaluations per individual (budget scale)
    #[arg(long)]
    evals_scale: Option<u64>,
    /// Fraction of the per-deme budget between migration epochs
    #[arg(long)]
    freq_migr: Option<f64>,
    /// Fraction of the deme migrated per epoch
    #[arg(long)]
    prop: Option<f64>,
    /// pull (deme imports the best of another) or push (deme exports its best)
    #[arg(long, default_value = "pull", value_parser = parse_direction)]
    migration_direction: MigrationDirection,
    /// Operator subset for ablation runs
    #[arg(long, value_delimiter = ',', value_parser = parse_operator,
          default_values_t = OperatorKind::ALL)]
    operators: Vec<OperatorKind>,
    /// Where to write the best partitions JSON
    #[arg(long, default_value = "solutions.json")]
    out: PathBuf,
    /// Write per-task fitness traces (CSV) into this directory
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Print machine-readable JSON to stdout
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scenario manifest path
    #[arg(long)]
    scenario: PathBuf,
    /// Algorithms to run
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm,
          default_values_t = Algorithm::ALL)]
    algorithms: Vec<Algorithm>,
    /// Independent runs per algorithm
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Seed of run r is base_seed + r
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value_t = 10)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    evals_scale: u64,
    #[arg(long, default_value_t = 0.03)]
    freq_migr: f64,
    #[arg(long, default_value_t = 0.05)]
    prop: f64,
    #[arg(long, default_value = "pull", value_parser = parse_direction)]
    migration_direction: MigrationDirection,
    #[arg(long, value_delimiter = ',', value_parser = parse_operator,
          default_values_t = OperatorKind::ALL)]
    operators: Vec<OperatorKind>,
    /// Output directory for results.csv, per-run artifacts and summary.json
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 1 is the deterministic reference mode (results are
    /// identical either way)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Skip writing per-evaluation fitness traces
    #[arg(long)]
    no_traces: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV (columns: algorithm, instance, fitness or best_fitness)
    #[arg(long)]
    results: PathBuf,
    /// Control algorithm for the Holm post-hoc test
    #[arg(long, default_value = "covns")]
    control: String,
    /// Directory for aggregates.csv and friedman_holm.csv
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "{what} not found: {}",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = GenSpec {
        base_node_count: args.base,
        increment: args.increment,
        instance_count: args.count,
        communities: args.communities,
        p_in: args.p_in,
        p_out: args.p_out,
        mode: args.mode,
        seed: args.seed,
        ..GenSpec::default()
    };
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (scenario, manifest_path) = generate_scenario(&spec, &args.out)
        .context("scenario generation failed")?;
    println!(
        "generated {} instance(s): {} .. {}",
        scenario.instances.len(),
        scenario.instances.first().map(|i| i.name.as_str()).unwrap_or("-"),
        scenario.instances.last().map(|i| i.name.as_str()).unwrap_or("-"),
    );
    println!("{}", manifest_path.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveTaskOutput {
    instance: String,
    best_fitness: f64,
    evaluations: u64,
}

#[derive(Serialize)]
struct SolveOutput {
    algorithm: String,
    seed: u64,
    total_evaluations: u64,
    tasks: Vec<SolveTaskOutput>,
    solutions_file: String,
}

#[derive(Serialize)]
struct SolutionsFile<'a> {
    algorithm: String,
    seed: u64,
    tasks: Vec<SolutionsEntry<'a>>,
}

#[derive(Serialize)]
struct SolutionsEntry<'a> {
    instance: &'a str,
    best_fitness: f64,
    partition: &'a covns_core::Partition,
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    require_file(&args.scenario, "scenario manifest")?;
    let scenario = load_scenario(&args.scenario).context("failed to load scenario")?;
    let manifest = &scenario.manifest;

    let algorithm = match args.algorithm {
        Some(a) => a,
        None => manifest
            .algorithm
            .as_deref()
            .map(str::parse)
            .transpose()
            .map_err(|e: covns_core::Error| CliError::Usage(e.to_string()))?
            .ok_or_else(|| {
                CliError::Usage(
                    "no algorithm given: pass --algorithm or set it in the manifest".into(),
                )
            })?,
    };
    let seed = args.seed.or(manifest.seed).ok_or_else(|| {
        CliError::Usage("no seed given: pass --seed or set it in the manifest".into())
    })?;
    let n = args.n.or(manifest.n_per_deme).unwrap_or(10);
    let evals_scale = args
        .evals_scale
        .or(manifest.evals_per_individual)
        .unwrap_or(1000);
    let freq_migr = args.freq_migr.or(manifest.freq_migr).unwrap_or(0.03);
    let prop = args.prop.or(manifest.prop).unwrap_or(0.05);

    let task_count = scenario.graphs.len() as u64;
    let policy = MigrationPolicy {
        freq_migr,
        prop,
        direction: args.migration_direction,
    };
    let mut tasks = Vec::new();
    let mut traces = Vec::new();
    let total_evaluations;
    match algorithm {
        Algorithm::Covns | Algorithm::Pvns => {
            let cfg = VnsConfig {
                population_size: n,
                evaluation_budget: task_count * n as u64 * evals_scale,
                operator_set: args.operators.clone(),
                seed,
            };
            let result = if algorithm == Algorithm::Covns {
                solve_covns(&scenario.graphs, &cfg, &policy)?
            } else {
                solve_pvns(&scenario.graphs, &cfg)?
            };
            total_evaluations = result.total_evaluations;
            for (task, name) in result.per_task.into_iter().zip(&scenario.instance_names) {
                tasks.push((name.clone(), task.best));
                traces.push(task.trace);
            }
        }
        Algorithm::Svns => {
            let mut total = 0;
            for (graph, name) in scenario.graphs.iter().zip(&scenario.instance_names) {
                let cfg = VnsConfig {
                    population_size: n,
                    evaluation_budget: n as u64 * evals_scale,
                    operator_set: args.operators.clone(),
                    seed,
                };
                let result = solve_svns(graph, &cfg)?;
                total += result.evaluations;
                tasks.push((name.clone(), result.best));
                traces.push(result.trace);
            }
            total_evaluations = total;
        }
    }

    if let Some(trace_dir) = &args.trace_dir {
        std::fs::create_dir_all(trace_dir)
            .with_context(|| format!("cannot create {}", trace_dir.display()))?;
        for ((name, _), trace) in tasks.iter().zip(&traces) {
            trace.write_csv(&trace_dir.join(format!("{algorithm}_{name}.csv")))?;
        }
    }

    let solutions = SolutionsFile {
        algorithm: algorithm.to_string(),
        seed,
        tasks: tasks
            .iter()
            .map(|(name, best)| SolutionsEntry {
                instance: name,
                best_fitness: best.fitness,
                partition: &best.partition,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&solutions).context("serialize solutions")?;
    std::fs::write(&args.out, json)
        .with_context(|| format!("cannot write {}", args.out.display()))?;

    if args.json {
        let output = SolveOutput {
            algorithm: algorithm.to_string(),
            seed,
            total_evaluations,
            tasks: tasks
                .iter()
                .map(|(name, best)| SolveTaskOutput {
                    instance: name.clone(),
                    best_fitness: best.fitness,
                    evaluations: total_evaluations / task_count,
                })
                .collect(),
            solutions_file: args.out.display().to_string(),
        };
        println!("{}", serde_json::to_string_pretty(&output).context("serialize output")?);
    } else {
        for (name, best) in &tasks {
            println!("{name} best_modularity {:.6}", best.fitness);
        }
        println!("solutions written to {}", args.out.display());
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    require_file(&args.scenario, "scenario manifest")?;
    let plan = ExperimentPlan {
        manifest_path: args.scenario.clone(),
        algorithms: args.algorithms.clone(),
        run_count: args.runs,
        base_seed: args.base_seed,
        n_per_deme: args.n as usize,
        evals_per_individual: args.evals_scale,
        freq_migr: args.freq_migr,
        prop: args.prop,
        migration_direction: args.migration_direction,
        operator_set: args.operators.clone(),
        out_dir: args.out.clone(),
        save_traces: !args.no_traces,
        workers: args.workers,
    };
    let outcome = run_experiment(&plan).context("experiment failed")?;
    if args.json {
        #[derive(Serialize)]
        struct ExperimentOutput {
            results_csv: String,
            summary_json: String,
            evaluations_per_algorithm: Vec<(String, u64)>,
        }
        let output = ExperimentOutput {
            results_csv: outcome.results_csv.display().to_string(),
            summary_json: outcome.summary_json.display().to_string(),
            evaluations_per_algorithm: outcome
                .evaluations_per_algorithm
                .iter()
                .map(|(a, e)| (a.to_string(), *e))
                .collect(),
        };
        println!("{}", serde_json::to_string_pretty(&output).context("serialize output")?);
    } else {
        for (algorithm, evals) in &outcome.evaluations_per_algorithm {
            println!("{algorithm}: {evals} evaluations across {} run(s)", args.runs);
        }
        println!("results written to {}", outcome.results_csv.display());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    require_file(&args.results, "results CSV")?;
    let matrix = ResultMatrix::read_csv(&args.results)?;
    let report = build_report(&matrix, &args.control)?;
    if let Some(dir) = &args.out {
        let (aggregates, stats) = report.write_csv(dir)?;
        eprintln!("wrote {} and {}", aggregates.display(), stats.display());
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).context("serialize report")?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(error)) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
