//! Population-based discrete VNS: the per-task iteration primitive, the
//! evaluation ledger that enforces budget accounting, and the standalone
//! sVNS solver.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::multitask;
use crate::operators::{apply_operator, OperatorKind};
use crate::partition::Partition;

/// Solver parameters. Defaults mirror the benchmark configuration: 10
/// individuals per subpopulation, 1000 evaluations per individual, all four
/// movement operators.
#[derive(Debug, Clone)]
pub struct VnsConfig {
    /// Individuals per subpopulation (N).
    pub population_size: usize,
    /// Total objective-function evaluations for the run. For the
    /// multitasking solvers this is the whole-scenario budget E; for sVNS it
    /// is the per-task budget.
    pub evaluation_budget: u64,
    pub operator_set: Vec<OperatorKind>,
    pub seed: u64,
}

impl VnsConfig {
    pub fn new(population_size: usize, evaluation_budget: u64, seed: u64) -> Self {
        VnsConfig {
            population_size,
            evaluation_budget,
            operator_set: OperatorKind::ALL.to_vec(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::InvalidConfig(
                "population_size must be positive".into(),
            ));
        }
        if self.evaluation_budget < self.population_size as u64 {
            return Err(Error::InvalidConfig(format!(
                "evaluation_budget {} is below population_size {}",
                self.evaluation_budget, self.population_size
            )));
        }
        if self.operator_set.is_empty() {
            return Err(Error::InvalidConfig("operator_set must be nonempty".into()));
        }
        Ok(())
    }
}

/// A partition together with its fitness on the owning task.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedIndividual {
    pub partition: Partition,
    pub fitness: f64,
}

/// Best-fitness-so-far recorded at every evaluation; index `i` corresponds
/// to evaluation `i + 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitnessTrace {
    best_so_far: Vec<f64>,
}

impl FitnessTrace {
    fn record(&mut self, fitness: f64) {
        let best = match self.best_so_far.last() {
            Some(&prev) if prev >= fitness => prev,
            _ => fitness,
        };
        self.best_so_far.push(best);
    }

    pub fn len(&self) -> usize {
        self.best_so_far.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best_so_far.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.best_so_far
    }

    /// Writes `evaluation_index,best_fitness_so_far` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.best_so_far.len() * 24);
        writeln!(out, "evaluation_index,best_fitness_so_far").expect("vec write");
        for (i, best) in self.best_so_far.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, best).expect("vec write");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Budget-enforcing evaluation counter for one task. Every fitness
/// evaluation goes through the ledger, which appends to the trace and keeps
/// the best-ever individual.
#[derive(Debug, Clone)]
pub struct EvalLedger {
    used: u64,
    budget: u64,
    trace: FitnessTrace,
    best: Option<EvaluatedIndividual>,
}

impl EvalLedger {
    pub fn new(budget: u64) -> Self {
        EvalLedger {
            used: 0,
            budget,
            trace: FitnessTrace::default(),
            best: None,
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn trace(&self) -> &FitnessTrace {
        &self.trace
    }

    pub fn best(&self) -> Option<&EvaluatedIndividual> {
        self.best.as_ref()
    }

    pub fn into_parts(self) -> (FitnessTrace, Option<EvaluatedIndividual>, u64) {
        (self.trace, self.best, self.used)
    }

    /// Evaluates a candidate on `graph`, charging one evaluation. Panics if
    /// the budget is already exhausted; callers check first.
    pub fn evaluate(&mut self, graph: &WeightedDigraph, partition: Partition) -> EvaluatedIndividual {
        assert!(!self.exhausted(), "evaluation budget exhausted");
        let fitness = graph
            .modularity(&partition)
            .expect("graph validated before search");
        self.used += 1;
        self.trace.record(fitness);
        let individual = EvaluatedIndividual { partition, fitness };
        if self.best.as_ref().is_none_or(|b| individual.fitness > b.fitness) {
            self.best = Some(individual.clone());
        }
        individual
    }
}

/// One VNS pass over the population: each slot draws an operator uniformly,
/// generates one successor, evaluates it, and accepts it only on strict
/// improvement. Stops mid-pass at the exact evaluation where the budget
/// runs out.
pub fn vns_iteration(
    population: &mut [EvaluatedIndividual],
    graph: &WeightedDigraph,
    operator_set: &[OperatorKind],
    rng: &mut ChaCha8Rng,
    ledger: &mut EvalLedger,
) {
    for slot in population.iter_mut() {
        if ledger.exhausted() {
            break;
        }
        let kind = operator_set[rng.gen_range(0..operator_set.len())];
        let candidate = apply_operator(kind, &slot.partition, rng);
        let evaluated = ledger.evaluate(graph, candidate);
        if evaluated.fitness > slot.fitness {
            *slot = evaluated;
        }
    }
}

/// Result of a single-task solve: best-ever individual, evaluation-indexed
/// trace, and the exact number of evaluations spent.
#[derive(Debug, Clone)]
pub struct SvnsResult {
    pub best: EvaluatedIndividual,
    pub trace: FitnessTrace,
    pub evaluations: u64,
}

/// Solves one task with the basic population-based VNS: N random
/// individuals (each initial evaluation counts against the budget), then
/// iterations until the budget is spent.
pub fn solve_svns(graph: &WeightedDigraph, cfg: &VnsConfig) -> Result<SvnsResult> {
    let outcome = multitask::run_tasks(std::slice::from_ref(graph), cfg, None)?;
    let task = outcome
        .per_task
        .into_iter()
        .next()
        .expect("single-task run yields one result");
    Ok(SvnsResult {
        best: task.best,
        trace: task.trace,
        evaluations: task.evaluations,
    })
}
