//! Experiment orchestration: run (algorithm x scenario x seed) grids with
//! equal evaluation budgets, persist per-run artifacts, and collect a
//! result matrix for the statistics engine.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::benchgen::{load_scenario, LoadedScenario};
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::multitask::{solve_covns, solve_pvns, MigrationDirection, MigrationPolicy};
use crate::operators::OperatorKind;
use crate::partition::Partition;
use crate::stats::ResultMatrix;
use crate::vns::{solve_svns, FitnessTrace, VnsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Covns,
    Pvns,
    Svns,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Covns, Algorithm::Pvns, Algorithm::Svns];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Covns => "covns",
            Algorithm::Pvns => "pvns",
            Algorithm::Svns => "svns",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "covns" => Ok(Algorithm::Covns),
            "pvns" => Ok(Algorithm::Pvns),
            "svns" => Ok(Algorithm::Svns),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// A full experiment grid. Budgets follow the fairness rule: the
/// multitasking solvers spend `E = K * N * evals_per_individual` on the
/// whole scenario and sVNS spends `N * evals_per_individual` per task, so
/// all three consume identical totals.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub manifest_path: PathBuf,
    pub algorithms: Vec<Algorithm>,
    pub run_count: usize,
    pub base_seed: u64,
    pub n_per_deme: usize,
    pub evals_per_individual: u64,
    pub freq_migr: f64,
    pub prop: f64,
    pub migration_direction: MigrationDirection,
    pub operator_set: Vec<OperatorKind>,
    pub out_dir: PathBuf,
    pub save_traces: bool,
    pub workers: usize,
}

impl ExperimentPlan {
    pub fn new(manifest_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan {
            manifest_path: manifest_path.into(),
            algorithms: Algorithm::ALL.to_vec(),
            run_count: 20,
            base_seed: 0,
            n_per_deme: 10,
            evals_per_individual: 1000,
            freq_migr: 0.03,
            prop: 0.05,
            migration_direction: MigrationDirection::Pull,
            operator_set: OperatorKind::ALL.to_vec(),
            out_dir: out_dir.into(),
            save_traces: true,
            workers: 1,
        }
    }

    fn policy(&self) -> MigrationPolicy {
        MigrationPolicy {
            freq_migr: self.freq_migr,
            prop: self.prop,
            direction: self.migration_direction,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        if self.run_count == 0 {
            return Err(Error::InvalidConfig("run_count must be at least 1".into()));
        }
        Ok(())
    }
}

struct TaskRun {
    instance: String,
    best_fitness: f64,
    evaluations: u64,
    partition: Partition,
    trace: Option<FitnessTrace>,
}

struct AlgoRun {
    algorithm: Algorithm,
    run_index: usize,
    seed: u64,
    wall_time_ms: u64,
    tasks: Vec<TaskRun>,
}

#[derive(Serialize)]
struct TaskRunFile<'a> {
    instance: &'a str,
    best_fitness: f64,
    evaluations: u64,
    partition: &'a Partition,
}

#[derive(Serialize)]
struct AlgoRunFile<'a> {
    algorithm: Algorithm,
    run_index: usize,
    seed: u64,
    tasks: Vec<TaskRunFile<'a>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    scenario: String,
    algorithms: Vec<String>,
    run_count: usize,
    base_seed: u64,
    n_per_deme: usize,
    evals_per_individual: u64,
    budget_per_scenario: u64,
    total_evaluations_per_algorithm: Vec<(String, u64)>,
}

/// Result of a completed experiment: the in-memory matrix plus the paths of
/// the persisted artifacts.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub matrix: ResultMatrix,
    pub results_csv: PathBuf,
    pub summary_json: PathBuf,
    /// Exact evaluations spent per algorithm across all runs.
    pub evaluations_per_algorithm: Vec<(Algorithm, u64)>,
}

fn solve_one(
    algorithm: Algorithm,
    graphs: &[WeightedDigraph],
    names: &[String],
    plan: &ExperimentPlan,
    run_index: usize,
) -> Result<AlgoRun> {
    let seed = plan.base_seed + run_index as u64;
    let task_count = graphs.len() as u64;
    let scenario_budget = task_count * plan.n_per_deme as u64 * plan.evals_per_individual;
    let started = Instant::now();
    let mut tasks = Vec::with_capacity(graphs.len());
    match algorithm {
        Algorithm::Covns | Algorithm::Pvns => {
            let cfg = VnsConfig {
                population_size: plan.n_per_deme,
                evaluation_budget: scenario_budget,
                operator_set: plan.operator_set.clone(),
                seed,
            };
            let result = if algorithm == Algorithm::Covns {
                solve_covns(graphs, &cfg, &plan.policy())?
            } else {
                solve_pvns(graphs, &cfg)?
            };
            for (task, name) in result.per_task.into_iter().zip(names) {
                tasks.push(TaskRun {
                    instance: name.clone(),
                    best_fitness: task.best.fitness,
                    evaluations: task.evaluations,
                    partition: task.best.partition,
                    trace: plan.save_traces.then_some(task.trace),
                });
            }
        }
        Algorithm::Svns => {
            // Every task reuses the run's seed, so sVNS differs from pVNS
            // only through the initialization pool.
            for (graph, name) in graphs.iter().zip(names) {
                let cfg = VnsConfig {
                    population_size: plan.n_per_deme,
                    evaluation_budget: plan.n_per_deme as u64 * plan.evals_per_individual,
                    operator_set: plan.operator_set.clone(),
                    seed,
                };
                let result = solve_svns(graph, &cfg)?;
                tasks.push(TaskRun {
                    instance: name.clone(),
                    best_fitness: result.best.fitness,
                    evaluations: result.evaluations,
                    partition: result.best.partition,
                    trace: plan.save_traces.then_some(result.trace),
                });
            }
        }
    }
    let total: u64 = tasks.iter().map(|t| t.evaluations).sum();
    assert_eq!(total, scenario_budget, "budget fairness violated");
    Ok(AlgoRun {
        algorithm,
        run_index,
        seed,
        wall_time_ms: started.elapsed().as_millis() as u64,
        tasks,
    })
}

fn persist_run(out_dir: &Path, run: &AlgoRun) -> Result<()> {
    let runs_dir = out_dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    let path = runs_dir.join(format!("{}_run{:03}.json", run.algorithm, run.run_index));
    let file = AlgoRunFile {
        algorithm: run.algorithm,
        run_index: run.run_index,
        seed: run.seed,
        tasks: run
            .tasks
            .iter()
            .map(|t| TaskRunFile {
                instance: &t.instance,
                best_fitness: t.best_fitness,
                evaluations: t.evaluations,
                partition: &t.partition,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;

    for task in &run.tasks {
        if let Some(trace) = &task.trace {
            let traces_dir = out_dir.join("traces");
            fs::create_dir_all(&traces_dir).map_err(|e| Error::io(&traces_dir, e))?;
            let trace_path = traces_dir.join(format!(
                "{}_run{:03}_{}.csv",
                run.algorithm, run.run_index, task.instance
            ));
            trace.write_csv(&trace_path)?;
        }
    }
    Ok(())
}

fn write_results_csv(path: &Path, runs: &[AlgoRun]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(
        out,
        "algorithm,instance,run_index,best_fitness,evaluations_used,wall_time_ms"
    )
    .expect("vec write");
    for run in runs {
        for task in &run.tasks {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                run.algorithm,
                task.instance,
                run.run_index,
                task.best_fitness,
                task.evaluations,
                run.wall_time_ms
            )
            .expect("vec write");
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn validate_tasks(scenario: &LoadedScenario) -> Result<()> {
    for (graph, name) in scenario.graphs.iter().zip(&scenario.instance_names) {
        if graph.total_weight() <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "task {name}: graph has zero total weight and cannot be solved"
            )));
        }
        if graph.node_count() == 0 {
            return Err(Error::InvalidConfig(format!("task {name}: empty graph")));
        }
    }
    Ok(())
}

/// Runs the full grid. Runs are independent and execute on `workers`
/// threads; results are merged in deterministic (algorithm, instance, run)
/// order, so the persisted files do not depend on the worker count. On
/// failure, whatever completed is flushed and the summary is marked
/// incomplete.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    plan.validate()?;
    let scenario = load_scenario(&plan.manifest_path)?;
    validate_tasks(&scenario)?;
    fs::create_dir_all(&plan.out_dir).map_err(|e| Error::io(&plan.out_dir, e))?;

    let jobs: Vec<(Algorithm, usize)> = plan
        .algorithms
        .iter()
        .flat_map(|&a| (0..plan.run_count).map(move |r| (a, r)))
        .collect();
    let slots: Vec<Mutex<Option<Result<AlgoRun>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let next_job = AtomicUsize::new(0);
    let workers = plan.workers.max(1).min(jobs.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = next_job.fetch_add(1, Ordering::Relaxed);
                if job >= jobs.len() {
                    break;
                }
                let (algorithm, run_index) = jobs[job];
                let outcome = solve_one(
                    algorithm,
                    &scenario.graphs,
                    &scenario.instance_names,
                    plan,
                    run_index,
                );
                *slots[job].lock().expect("result slot poisoned") = Some(outcome);
            });
        }
    });

    let mut runs = Vec::with_capacity(jobs.len());
    let mut failure: Option<Error> = None;
    for slot in slots {
        match slot.into_inner().expect("result slot poisoned") {
            Some(Ok(run)) => runs.push(run),
            Some(Err(e)) if failure.is_none() => failure = Some(e),
            _ => {}
        }
    }

    let mut matrix = ResultMatrix::new();
    let mut per_algorithm: Vec<(Algorithm, u64)> =
        plan.algorithms.iter().map(|&a| (a, 0)).collect();
    for run in &runs {
        persist_run(&plan.out_dir, run)?;
        for task in &run.tasks {
            matrix.push(&run.algorithm.to_string(), &task.instance, task.best_fitness);
            if let Some(entry) = per_algorithm.iter_mut().find(|(a, _)| *a == run.algorithm) {
                entry.1 += task.evaluations;
            }
        }
    }

    let results_csv = plan.out_dir.join("results.csv");
    write_results_csv(&results_csv, &runs)?;

    let scenario_budget = scenario.graphs.len() as u64
        * plan.n_per_deme as u64
        * plan.evals_per_individual;
    let summary_json = plan.out_dir.join("summary.json");
    let summary = Summary {
        status: if failure.is_none() {
            "complete"
        } else {
            "incomplete"
        },
        error: failure.as_ref().map(|e| e.to_string()),
        scenario: plan.manifest_path.display().to_string(),
        algorithms: plan.algorithms.iter().map(|a| a.to_string()).collect(),
        run_count: plan.run_count,
        base_seed: plan.base_seed,
        n_per_deme: plan.n_per_deme,
        evals_per_individual: plan.evals_per_individual,
        budget_per_scenario: scenario_budget,
        total_evaluations_per_algorithm: per_algorithm
            .iter()
            .map(|(a, e)| (a.to_string(), *e))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::json(&summary_json, e))?;
    fs::write(&summary_json, json).map_err(|e| Error::io(&summary_json, e))?;

    if let Some(error) = failure {
        return Err(error);
    }
    Ok(ExperimentOutcome {
        matrix,
        results_csv,
        summary_json,
        evaluations_per_algorithm: per_algorithm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::{generate_scenario, GenSpec, ScenarioMode};

    fn toy_plan(dir: &Path, runs: usize) -> ExperimentPlan {
        let spec = GenSpec {
            base_node_count: 10,
            increment: 2,
            instance_count: 2,
            communities: 3,
            mode: ScenarioMode::Oi,
            seed: 5,
            ..GenSpec::default()
        };
        let (_, manifest) = generate_scenario(&spec, &dir.join("scenario")).unwrap();
        let mut plan = ExperimentPlan::new(manifest, dir.join("out"));
        plan.run_count = runs;
        plan.n_per_deme = 5;
        plan.evals_per_individual = 60;
        plan
    }

    #[test]
    fn algorithm_tokens_roundtrip() {
        for algorithm in Algorithm::ALL {
            assert_eq!(
                algorithm.to_string().parse::<Algorithm>().unwrap(),
                algorithm
            );
        }
        assert!(matches!(
            "mfea".parse::<Algorithm>(),
            Err(Error::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn smoke_plan_produces_matrix_and_equal_budgets() {
        let dir = tempfile::tempdir().unwrap();
        let plan = toy_plan(dir.path(), 1);
        let outcome = run_experiment(&plan).unwrap();
        assert_eq!(outcome.matrix.algorithms().len(), 3);
        assert_eq!(outcome.matrix.instances().len(), 2);
        let budgets: Vec<u64> = outcome
            .evaluations_per_algorithm
            .iter()
            .map(|(_, e)| *e)
            .collect();
        // K * N * scale = 2 * 5 * 60 = 600 per algorithm per run.
        assert_eq!(budgets, vec![600, 600, 600]);
        assert!(outcome.results_csv.exists());
        assert!(outcome.summary_json.exists());
        assert!(dir.path().join("out/runs/covns_run000.json").exists());
        assert!(dir
            .path()
            .join("out/traces/svns_run000_OI_12_3.csv")
            .exists());
        let summary = std::fs::read_to_string(&outcome.summary_json).unwrap();
        assert!(summary.contains("\"status\": \"complete\""));
    }

    #[test]
    fn reruns_are_deterministic_up_to_wall_time() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan_a = toy_plan(dir.path(), 2);
        plan_a.out_dir = dir.path().join("a");
        plan_a.save_traces = true;
        let mut plan_b = plan_a.clone();
        plan_b.out_dir = dir.path().join("b");
        run_experiment(&plan_a).unwrap();
        run_experiment(&plan_b).unwrap();

        let strip_wall_time = |path: &Path| {
            let text = std::fs::read_to_string(path).unwrap();
            text.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(
            strip_wall_time(&dir.path().join("a/results.csv")),
            strip_wall_time(&dir.path().join("b/results.csv"))
        );
        // Per-run artifacts carry no timing and must match byte for byte.
        for entry in std::fs::read_dir(dir.path().join("a/runs")).unwrap() {
            let entry = entry.unwrap();
            let other = dir.path().join("b/runs").join(entry.file_name());
            assert_eq!(
                std::fs::read(entry.path()).unwrap(),
                std::fs::read(other).unwrap()
            );
        }
        for entry in std::fs::read_dir(dir.path().join("a/traces")).unwrap() {
            let entry = entry.unwrap();
            let other = dir.path().join("b/traces").join(entry.file_name());
            assert_eq!(
                std::fs::read(entry.path()).unwrap(),
                std::fs::read(other).unwrap()
            );
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan_serial = toy_plan(dir.path(), 3);
        plan_serial.out_dir = dir.path().join("serial");
        plan_serial.save_traces = false;
        let mut plan_parallel = plan_serial.clone();
        plan_parallel.out_dir = dir.path().join("parallel");
        plan_parallel.workers = 4;
        run_experiment(&plan_serial).unwrap();
        run_experiment(&plan_parallel).unwrap();
        let strip = |path: PathBuf| {
            std::fs::read_to_string(path)
                .unwrap()
                .lines()
                .map(|l| l.rsplit_once(',').map(|(h, _)| h.to_string()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(
            strip(dir.path().join("serial/results.csv")),
            strip(dir.path().join("parallel/results.csv"))
        );
    }

    #[test]
    fn results_roundtrip_through_the_stats_reader() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = toy_plan(dir.path(), 2);
        plan.save_traces = false;
        let outcome = run_experiment(&plan).unwrap();
        let reread = ResultMatrix::read_csv(&outcome.results_csv).unwrap();
        for algorithm in outcome.matrix.algorithms() {
            for instance in outcome.matrix.instances() {
                assert_eq!(
                    outcome.matrix.cell(algorithm, instance).unwrap(),
                    reread.cell(algorithm, instance).unwrap()
                );
            }
        }
    }

    #[test]
    fn failed_runs_flush_partial_results_with_incomplete_marker() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = toy_plan(dir.path(), 1);
        plan.save_traces = false;
        // Per-deme budget (n * scale = 5) cannot cover the multitask
        // initialization charge (K * N = 10), so covns and pvns fail while
        // svns still completes.
        plan.evals_per_individual = 1;
        let error = run_experiment(&plan).unwrap_err();
        assert!(matches!(error, Error::InvalidConfig(_)));
        let summary =
            std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
        assert!(summary.contains("\"status\": \"incomplete\""), "{summary}");
        let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
        assert!(results.contains("svns"), "partial results missing: {results}");
        assert!(!results.contains("covns"), "failed algorithm leaked rows");
    }

    #[test]
    fn missing_manifest_fails_with_file_diagnostic() {
        let dir = tempfile::tempdir().unwrap();
        let plan = ExperimentPlan::new(dir.path().join("nope.json"), dir.path().join("out"));
        match run_experiment(&plan) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("nope.json")),
            other => panic!("expected io error, got {:?}", other.map(|_| ())),
        }
    }
}
