//! Multi-deme coevolution: deme construction, cross-task dimension
//! adjustment, migration, and the CoVNS / pVNS solvers.
//!
//! One deme per task; each deme runs the basic VNS loop on its own task.
//! CoVNS additionally migrates elite individuals between demes at fixed
//! evaluation-count epochs, resizing them to the destination dimension.
//! pVNS is the same driver with migration disabled, and the single-task
//! solver is the `K = 1` case, so all three consume identical budgets and
//! produce identical traces wherever their search processes coincide.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::partition::Partition;
use crate::vns::{vns_iteration, EvalLedger, EvaluatedIndividual, FitnessTrace, VnsConfig};

/// Subpopulation dedicated to one task. Individuals always have the task's
/// native length and are evaluated on that task only.
#[derive(Debug, Clone)]
pub struct Deme {
    /// 0-based task index.
    pub task_index: usize,
    pub individuals: Vec<EvaluatedIndividual>,
}

impl Deme {
    /// Best member by fitness; first slot wins ties.
    pub fn best(&self) -> &EvaluatedIndividual {
        self.individuals
            .iter()
            .reduce(|best, i| if i.fitness > best.fitness { i } else { best })
            .expect("deme is nonempty")
    }

    /// Slot index of the worst member; first slot wins ties.
    pub fn worst_slot(&self) -> usize {
        let mut worst = 0;
        for (i, individual) in self.individuals.iter().enumerate().skip(1) {
            if individual.fitness < self.individuals[worst].fitness {
                worst = i;
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MigrationDirection {
    /// Each deme replaces its own worst member with the best of a randomly
    /// chosen other deme.
    #[default]
    Pull,
    /// Each deme sends its best members to randomly chosen other demes,
    /// replacing their worst.
    Push,
}

impl std::str::FromStr for MigrationDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pull" => Ok(MigrationDirection::Pull),
            "push" => Ok(MigrationDirection::Push),
            other => Err(Error::InvalidConfig(format!(
                "unknown migration direction {other:?} (expected pull or push)"
            ))),
        }
    }
}

/// Migration schedule: an epoch runs every `freq_migr` fraction of the
/// per-deme budget, moving `max(1, round(N * prop))` individuals per deme.
#[derive(Debug, Clone)]
pub struct MigrationPolicy {
    pub freq_migr: f64,
    pub prop: f64,
    pub direction: MigrationDirection,
}

impl Default for MigrationPolicy {
    fn default() -> Self {
        MigrationPolicy {
            freq_migr: 0.03,
            prop: 0.05,
            direction: MigrationDirection::Pull,
        }
    }
}

impl MigrationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.freq_migr > 0.0 && self.freq_migr < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "freq_migr must lie in (0, 1), got {}",
                self.freq_migr
            )));
        }
        if !(self.prop > 0.0 && self.prop <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "prop must lie in (0, 1], got {}",
                self.prop
            )));
        }
        Ok(())
    }

    /// Migrants per deme per epoch; at least one, otherwise coevolution
    /// never happens at small populations.
    pub fn migrants_per_deme(&self, deme_size: usize) -> usize {
        ((deme_size as f64 * self.prop).round() as usize).max(1)
    }

    /// Evaluation-count interval between epochs for a given per-deme budget.
    pub fn epoch_step(&self, per_deme_budget: u64) -> u64 {
        ((self.freq_migr * per_deme_budget as f64).ceil() as u64).max(1)
    }
}

/// Adjusts a solution of one task dimension to another. Shrinking keeps the
/// first `target_len` labels; growing copies the tail positions from the
/// individual being replaced in the destination deme. The result is
/// repaired either way.
pub fn resize_solution(x: &Partition, target_len: usize, replaced: &Partition) -> Partition {
    assert_eq!(
        replaced.len(),
        target_len,
        "replaced individual must have the target length"
    );
    let labels = x.labels();
    let resized: Vec<u32> = match target_len.cmp(&labels.len()) {
        std::cmp::Ordering::Less => labels[..target_len].to_vec(),
        std::cmp::Ordering::Equal => labels.to_vec(),
        std::cmp::Ordering::Greater => {
            let mut grown = labels.to_vec();
            grown.extend_from_slice(&replaced.labels()[labels.len()..]);
            grown
        }
    };
    Partition::repair(&resized).expect("resize output is a valid label vector")
}

/// Shrinks (or repairs in place) a max-dimension individual to a task's
/// native length. Initialization only ever shrinks, so no `replaced`
/// individual exists yet.
fn fit_to_task(x: &Partition, target_len: usize) -> Partition {
    let labels = x.labels();
    let v = &labels[..target_len.min(labels.len())];
    Partition::repair(v).expect("truncation of a valid label vector")
}

/// Picks the `n` best indices by fitness, breaking ties toward earlier
/// indices, and returns them in their original order.
fn select_top_preserving_order(fitness: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[b]
            .partial_cmp(&fitness[a])
            .expect("fitness values are finite")
            .then(a.cmp(&b))
    });
    let mut chosen = order[..n].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Builds the K demes from one shared random pool: `total_pop` individuals
/// generated at the maximum task dimension, each evaluated on every task
/// (charged to that task's ledger), each deme keeping the best
/// `total_pop / K` for its own task. The same individual may join several
/// demes.
pub fn initialize_demes(
    tasks: &[WeightedDigraph],
    total_pop: usize,
    rng: &mut ChaCha8Rng,
    ledgers: &mut [EvalLedger],
) -> Result<Vec<Deme>> {
    let task_count = tasks.len();
    if task_count == 0 {
        return Err(Error::InvalidConfig("task list is empty".into()));
    }
    assert_eq!(ledgers.len(), task_count, "one ledger per task");
    if total_pop == 0 || !total_pop.is_multiple_of(task_count) {
        return Err(Error::InvalidConfig(format!(
            "total population {total_pop} must be a positive multiple of the task count {task_count}"
        )));
    }
    let deme_size = total_pop / task_count;
    let max_dimension = tasks.iter().map(|t| t.node_count()).max().unwrap();

    let pool: Vec<Partition> = (0..total_pop)
        .map(|_| Partition::random(max_dimension, rng))
        .collect::<Result<_>>()?;

    let mut demes = Vec::with_capacity(task_count);
    for (k, task) in tasks.iter().enumerate() {
        let evaluated: Vec<EvaluatedIndividual> = pool
            .iter()
            .map(|x| ledgers[k].evaluate(task, fit_to_task(x, task.node_count())))
            .collect();
        let fitness: Vec<f64> = evaluated.iter().map(|i| i.fitness).collect();
        let individuals = select_top_preserving_order(&fitness, deme_size)
            .into_iter()
            .map(|i| evaluated[i].clone())
            .collect();
        demes.push(Deme {
            task_index: k,
            individuals,
        });
    }
    Ok(demes)
}

/// Runs one migration epoch. Every migrant evaluation is charged to the
/// receiving deme's ledger; migrants into a deme with no budget left are
/// skipped. Demes are processed in index order, so an individual migrated
/// into an earlier deme can be re-migrated within the same epoch.
pub fn migrate(
    demes: &mut [Deme],
    tasks: &[WeightedDigraph],
    policy: &MigrationPolicy,
    ledgers: &mut [EvalLedger],
    rng: &mut ChaCha8Rng,
) {
    let task_count = demes.len();
    if task_count < 2 {
        return;
    }
    let migrants = policy.migrants_per_deme(demes[0].individuals.len());
    match policy.direction {
        MigrationDirection::Pull => {
            for k in 0..task_count {
                for _ in 0..migrants {
                    if ledgers[k].exhausted() {
                        break;
                    }
                    let pick = rng.gen_range(0..task_count - 1);
                    let source = if pick >= k { pick + 1 } else { pick };
                    let migrant = demes[source].best().partition.clone();
                    let worst = demes[k].worst_slot();
                    let resized = resize_solution(
                        &migrant,
                        tasks[k].node_count(),
                        &demes[k].individuals[worst].partition,
                    );
                    demes[k].individuals[worst] = ledgers[k].evaluate(&tasks[k], resized);
                }
            }
        }
        MigrationDirection::Push => {
            for k in 0..task_count {
                let fitness: Vec<f64> = demes[k].individuals.iter().map(|i| i.fitness).collect();
                let senders: Vec<Partition> = select_top_preserving_order(&fitness, migrants)
                    .into_iter()
                    .map(|i| demes[k].individuals[i].partition.clone())
                    .collect();
                for migrant in senders {
                    let pick = rng.gen_range(0..task_count - 1);
                    let dest = if pick >= k { pick + 1 } else { pick };
                    if ledgers[dest].exhausted() {
                        continue;
                    }
                    let worst = demes[dest].worst_slot();
                    let resized = resize_solution(
                        &migrant,
                        tasks[dest].node_count(),
                        &demes[dest].individuals[worst].partition,
                    );
                    demes[dest].individuals[worst] = ledgers[dest].evaluate(&tasks[dest], resized);
                }
            }
        }
    }
}

/// Per-task outcome: best-ever individual, evaluation-indexed trace, exact
/// evaluation count.
#[derive(Debug, Clone)]
pub struct TaskResult {
    pub best: EvaluatedIndividual,
    pub trace: FitnessTrace,
    pub evaluations: u64,
}

#[derive(Debug, Clone)]
pub struct MultitaskResult {
    pub per_task: Vec<TaskResult>,
    pub total_evaluations: u64,
}

/// The shared driver behind CoVNS, pVNS and sVNS. The total budget is split
/// evenly across demes; initialization charges each deme one evaluation per
/// pool individual; iterations then run in lockstep rounds. With a policy, a
/// migration epoch fires after any round in which a deme's cumulative count
/// crossed a multiple of the epoch step.
pub(crate) fn run_tasks(
    tasks: &[WeightedDigraph],
    cfg: &VnsConfig,
    policy: Option<&MigrationPolicy>,
) -> Result<MultitaskResult> {
    cfg.validate()?;
    if let Some(policy) = policy {
        policy.validate()?;
    }
    let task_count = tasks.len();
    if task_count == 0 {
        return Err(Error::InvalidConfig("task list is empty".into()));
    }
    for task in tasks {
        if task.total_weight() <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
    }
    let total_budget = cfg.evaluation_budget;
    if !total_budget.is_multiple_of(task_count as u64) {
        return Err(Error::InvalidConfig(format!(
            "budget {total_budget} is not divisible by the task count {task_count}"
        )));
    }
    let per_deme_budget = total_budget / task_count as u64;
    let total_pop = cfg.population_size * task_count;
    if per_deme_budget < total_pop as u64 {
        return Err(Error::InvalidConfig(format!(
            "per-deme budget {per_deme_budget} cannot cover the initialization charge {total_pop}"
        )));
    }

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ledgers: Vec<EvalLedger> = (0..task_count)
        .map(|_| EvalLedger::new(per_deme_budget))
        .collect();
    let mut demes = initialize_demes(tasks, total_pop, &mut master, &mut ledgers)?;
    // Independent per-deme streams keep deme execution order irrelevant
    // between epochs; the migration stream is separate so disabling
    // migration does not shift any deme's draws.
    let mut deme_rngs: Vec<ChaCha8Rng> = (0..task_count)
        .map(|_| ChaCha8Rng::seed_from_u64(master.gen::<u64>()))
        .collect();
    let mut migration_rng = ChaCha8Rng::seed_from_u64(master.gen::<u64>());

    let epoch_step = policy.map(|p| p.epoch_step(per_deme_budget));
    let mut next_epoch = epoch_step.unwrap_or(u64::MAX);

    while ledgers.iter().any(|l| !l.exhausted()) {
        for k in 0..task_count {
            vns_iteration(
                &mut demes[k].individuals,
                &tasks[k],
                &cfg.operator_set,
                &mut deme_rngs[k],
                &mut ledgers[k],
            );
        }
        if let (Some(policy), Some(step)) = (policy, epoch_step) {
            if task_count > 1 {
                while ledgers.iter().map(EvalLedger::used).max().unwrap() >= next_epoch {
                    migrate(&mut demes, tasks, policy, &mut ledgers, &mut migration_rng);
                    next_epoch += step;
                }
            }
        }
    }

    let mut per_task = Vec::with_capacity(task_count);
    let mut total = 0u64;
    for ledger in ledgers {
        debug_assert_eq!(ledger.used(), per_deme_budget);
        let (trace, best, used) = ledger.into_parts();
        total += used;
        per_task.push(TaskResult {
            best: best.expect("at least one evaluation per deme"),
            trace,
            evaluations: used,
        });
    }
    debug_assert_eq!(total, total_budget);
    Ok(MultitaskResult {
        per_task,
        total_evaluations: total,
    })
}

/// Coevolutionary multitasking solver: demes evolve their own tasks and
/// exchange elites at migration epochs.
pub fn solve_covns(
    tasks: &[WeightedDigraph],
    cfg: &VnsConfig,
    policy: &MigrationPolicy,
) -> Result<MultitaskResult> {
    run_tasks(tasks, cfg, Some(policy))
}

/// Parallel VNS: identical to CoVNS (shared initialization pool included)
/// with migration disabled.
pub fn solve_pvns(tasks: &[WeightedDigraph], cfg: &VnsConfig) -> Result<MultitaskResult> {
    run_tasks(tasks, cfg, None)
}
