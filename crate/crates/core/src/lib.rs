//! Simultaneous community detection over weighted directed graphs.
//!
//! This crate implements a coevolutionary variable neighborhood search
//! (CoVNS) that solves several community-detection tasks at once through
//! per-task subpopulations exchanging elite solutions, together with the
//! two baselines it is compared against (pVNS: same demes, no migration;
//! sVNS: independent per-task searches), synthetic benchmark generators
//! with planted ground truth, an experiment harness with exact
//! evaluation-budget accounting, and the Friedman/Holm statistics used to
//! compare the algorithms.
//!
//! The main flow: [`benchgen::generate_scenario`] writes a task chain,
//! [`multitask::solve_covns`] (or its siblings) searches it, and
//! [`harness::run_experiment`] plus [`stats::build_report`] turn seed grids
//! into ranked comparisons.

pub mod benchgen;
pub mod error;
pub mod graph;
pub mod harness;
pub mod multitask;
pub mod operators;
pub mod partition;
pub mod stats;
pub mod testing;
pub mod vns;

pub use benchgen::{
    extend_instance, generate_base, generate_scenario, load_scenario, GenSpec, LoadedScenario,
    MultitaskScenario, ScenarioManifest, ScenarioMode,
};
pub use error::{Error, Result};
pub use graph::{read_graph_json, write_graph_json, WeightedDigraph};
pub use harness::{run_experiment, Algorithm, ExperimentOutcome, ExperimentPlan};
pub use multitask::{
    initialize_demes, migrate, resize_solution, solve_covns, solve_pvns, Deme, MigrationDirection,
    MigrationPolicy, MultitaskResult, TaskResult,
};
pub use operators::{apply_operator, OperatorFamily, OperatorKind};
pub use partition::Partition;
pub use stats::{
    aggregate, build_report, friedman_ranks, holm_posthoc, standard_normal_cdf, CellAggregate,
    HolmComparison, ResultMatrix, StatsReport,
};
pub use vns::{
    solve_svns, vns_iteration, EvalLedger, EvaluatedIndividual, FitnessTrace, SvnsResult,
    VnsConfig,
};
