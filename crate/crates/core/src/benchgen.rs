//! Synthetic multitask benchmark generation.
//!
//! A scenario is a chain of planted-partition digraphs grown by a fixed
//! increment. In OI (ordered incremental) mode new nodes take the highest
//! indices and the predecessor's adjacency matrix survives as the leading
//! principal submatrix; in UI (unordered incremental) mode new nodes take
//! the lowest indices and every existing node shifts up, which preserves the
//! old matrix only under the index shift.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{read_graph_json, write_graph_json, WeightedDigraph};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioMode {
    Oi,
    Ui,
}

impl fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioMode::Oi => f.write_str("OI"),
            ScenarioMode::Ui => f.write_str("UI"),
        }
    }
}

impl std::str::FromStr for ScenarioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oi" => Ok(ScenarioMode::Oi),
            "ui" => Ok(ScenarioMode::Ui),
            other => Err(Error::InvalidSpec(format!(
                "unknown scenario mode {other:?} (expected oi or ui)"
            ))),
        }
    }
}

/// Generation parameters. Defaults reproduce the benchmark family: chains
/// of 11 instances from 50 to 100 nodes, 8 planted communities,
/// `p_in = 0.85`, `p_out = 0.15`, intra-community weights in `[10, 20)` and
/// inter-community weights in `[0, 10)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpec {
    pub base_node_count: usize,
    pub increment: usize,
    pub instance_count: usize,
    pub communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub intra_weight_range: (f64, f64),
    pub inter_weight_range: (f64, f64),
    pub mode: ScenarioMode,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            base_node_count: 50,
            increment: 5,
            instance_count: 11,
            communities: 8,
            p_in: 0.85,
            p_out: 0.15,
            intra_weight_range: (10.0, 20.0),
            inter_weight_range: (0.0, 10.0),
            mode: ScenarioMode::Oi,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base_node_count == 0 {
            return Err(Error::InvalidSpec("base_node_count must be positive".into()));
        }
        if self.instance_count == 0 {
            return Err(Error::InvalidSpec("instance_count must be positive".into()));
        }
        if self.instance_count > 1 && self.increment == 0 {
            return Err(Error::InvalidSpec(
                "increment must be positive for chained instances".into(),
            ));
        }
        if self.communities == 0 || self.communities > self.base_node_count {
            return Err(Error::InvalidSpec(format!(
                "communities must lie in 1..={}, got {}",
                self.base_node_count, self.communities
            )));
        }
        if !(0.0..=1.0).contains(&self.p_out)
            || !(0.0..=1.0).contains(&self.p_in)
            || self.p_out >= self.p_in
        {
            return Err(Error::InvalidSpec(format!(
                "probabilities must satisfy 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        let (intra_lo, intra_hi) = self.intra_weight_range;
        let (inter_lo, inter_hi) = self.inter_weight_range;
        if !(0.0 <= inter_lo && inter_lo < inter_hi && inter_hi <= intra_lo && intra_lo < intra_hi)
        {
            return Err(Error::InvalidSpec(format!(
                "weight ranges must be non-negative, non-empty and non-overlapping, got intra {:?} inter {:?}",
                self.intra_weight_range, self.inter_weight_range
            )));
        }
        Ok(())
    }

    fn node_count_of(&self, instance_index: usize) -> usize {
        self.base_node_count + instance_index * self.increment
    }

    fn instance_name(&self, instance_index: usize) -> String {
        format!(
            "{}_{}_{}",
            self.mode,
            self.node_count_of(instance_index),
            self.communities
        )
    }
}

/// Samples a ground-truth partition: shuffle the node list and cut it at
/// `M - 1` distinct uniformly chosen points, yielding M nonempty communities
/// of random sizes.
fn planted_partition(node_count: usize, communities: usize, rng: &mut ChaCha8Rng) -> Partition {
    let mut nodes: Vec<usize> = (0..node_count).collect();
    nodes.shuffle(rng);
    let mut cuts = rand::seq::index::sample(rng, node_count - 1, communities - 1).into_vec();
    cuts.sort_unstable();
    let mut labels = vec![0u32; node_count];
    let mut label = 1u32;
    let mut next_cut = 0;
    for (position, &node) in nodes.iter().enumerate() {
        if next_cut < cuts.len() && position == cuts[next_cut] + 1 {
            label += 1;
            next_cut += 1;
        }
        labels[node] = label;
    }
    Partition::repair(&labels).expect("planted labels are positive")
}

fn sample_edge(
    spec: &GenSpec,
    same_community: bool,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let (probability, range) = if same_community {
        (spec.p_in, spec.intra_weight_range)
    } else {
        (spec.p_out, spec.inter_weight_range)
    };
    if probability > 0.0 && rng.gen_bool(probability) {
        rng.gen_range(range.0..range.1)
    } else {
        0.0
    }
}

/// Generates the base instance of a chain: a planted ground truth plus
/// edges drawn ordered-pair by ordered-pair with `p_in`/`p_out` and the
/// intra/inter weight ranges.
pub fn generate_base(
    spec: &GenSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(WeightedDigraph, Partition)> {
    spec.validate()?;
    let n = spec.base_node_count;
    let truth = planted_partition(n, spec.communities, rng);
    let mut weights = vec![0.0; n * n];
    for v in 0..n {
        for u in 0..n {
            if v != u {
                weights[v * n + u] = sample_edge(spec, truth.same_community(v, u), rng);
            }
        }
    }
    Ok((WeightedDigraph::from_matrix(n, weights)?, truth))
}

/// Extends an instance by `added` nodes. OI appends them after the existing
/// indices and copies the old matrix block verbatim; UI prepends them,
/// shifting every existing node up by `added`. Each new node joins one of
/// the existing ground-truth communities uniformly at random and samples
/// edges to and from every node already placed, under the same edge rules.
pub fn extend_instance(
    graph: &WeightedDigraph,
    truth: &Partition,
    added: usize,
    mode: ScenarioMode,
    spec: &GenSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(WeightedDigraph, Partition)> {
    if added == 0 {
        return Err(Error::InvalidSpec("added must be at least 1".into()));
    }
    let old_n = graph.node_count();
    let new_n = old_n + added;
    let offset = match mode {
        ScenarioMode::Oi => 0,
        ScenarioMode::Ui => added,
    };
    let mut weights = vec![0.0; new_n * new_n];
    for v in 0..old_n {
        for u in 0..old_n {
            weights[(v + offset) * new_n + (u + offset)] = graph.weight(v, u);
        }
    }
    let mut labels = vec![0u32; new_n];
    for v in 0..old_n {
        labels[v + offset] = truth.label_of(v);
    }
    let community_count = truth.num_communities() as u32;
    let new_nodes: Vec<usize> = match mode {
        ScenarioMode::Oi => (old_n..new_n).collect(),
        ScenarioMode::Ui => (0..added).collect(),
    };
    let mut placed: Vec<usize> = match mode {
        ScenarioMode::Oi => (0..old_n).collect(),
        ScenarioMode::Ui => (added..new_n).collect(),
    };
    for &node in &new_nodes {
        labels[node] = rng.gen_range(1..=community_count);
        for &other in &placed {
            let same = labels[node] == labels[other];
            weights[node * new_n + other] = sample_edge(spec, same, rng);
            weights[other * new_n + node] = sample_edge(spec, same, rng);
        }
        placed.push(node);
    }
    Ok((
        WeightedDigraph::from_matrix(new_n, weights)?,
        Partition::repair(&labels)?,
    ))
}

/// One generated instance of a scenario chain.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub name: String,
    pub graph: WeightedDigraph,
    pub ground_truth: Partition,
}

/// A full generated scenario: the ordered task chain plus its spec.
#[derive(Debug, Clone)]
pub struct MultitaskScenario {
    pub instances: Vec<ScenarioInstance>,
    pub spec: GenSpec,
}

impl MultitaskScenario {
    pub fn graphs(&self) -> Vec<WeightedDigraph> {
        self.instances.iter().map(|i| i.graph.clone()).collect()
    }
}

/// Scenario manifest schema. Solver-related fields are optional defaults
/// that the CLI may override per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioManifest {
    /// Graph file paths in task order, relative to the manifest location.
    pub tasks: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_per_deme: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evals_per_individual: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub freq_migr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instances: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<ScenarioMode>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec: Option<GenSpec>,
}

/// Generates a whole scenario chain, writes one graph JSON per instance
/// (ground truth embedded) plus a manifest, and returns the in-memory
/// scenario with the manifest path.
pub fn generate_scenario(
    spec: &GenSpec,
    out_dir: &Path,
) -> Result<(MultitaskScenario, PathBuf)> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut instances = Vec::with_capacity(spec.instance_count);
    let (mut graph, mut truth) = generate_base(spec, &mut rng)?;
    instances.push(ScenarioInstance {
        name: spec.instance_name(0),
        graph: graph.clone(),
        ground_truth: truth.clone(),
    });
    for index in 1..spec.instance_count {
        let (next_graph, next_truth) =
            extend_instance(&graph, &truth, spec.increment, spec.mode, spec, &mut rng)?;
        graph = next_graph;
        truth = next_truth;
        instances.push(ScenarioInstance {
            name: spec.instance_name(index),
            graph: graph.clone(),
            ground_truth: truth.clone(),
        });
    }

    let mut task_files = Vec::with_capacity(instances.len());
    for instance in &instances {
        let file_name = format!("{}.json", instance.name);
        let path = out_dir.join(&file_name);
        write_graph_json(&path, &instance.graph, Some(&instance.ground_truth))?;
        task_files.push(file_name);
    }
    let manifest = ScenarioManifest {
        tasks: task_files,
        algorithm: None,
        seed: None,
        n_per_deme: None,
        evals_per_individual: None,
        freq_migr: None,
        prop: None,
        instances: Some(instances.iter().map(|i| i.name.clone()).collect()),
        mode: Some(spec.mode),
        spec: Some(spec.clone()),
    };
    let manifest_path = out_dir.join("scenario.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&manifest_path, e))?;
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok((MultitaskScenario {
        instances,
        spec: spec.clone(),
    }, manifest_path))
}

/// A scenario loaded back from disk: graphs in task order plus names and
/// the manifest itself.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub graphs: Vec<WeightedDigraph>,
    pub ground_truths: Vec<Option<Partition>>,
    pub instance_names: Vec<String>,
    pub manifest: ScenarioManifest,
}

/// Reads a manifest and every graph it references. Task paths resolve
/// relative to the manifest's directory.
pub fn load_scenario(manifest_path: &Path) -> Result<LoadedScenario> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: ScenarioManifest =
        serde_json::from_str(&text).map_err(|e| Error::json(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut graphs = Vec::with_capacity(manifest.tasks.len());
    let mut ground_truths = Vec::with_capacity(manifest.tasks.len());
    for task in &manifest.tasks {
        let path = base.join(task);
        let (graph, truth) = read_graph_json(&path)?;
        graphs.push(graph);
        ground_truths.push(truth);
    }
    let instance_names = manifest.instances.clone().unwrap_or_else(|| {
        manifest
            .tasks
            .iter()
            .map(|t| {
                Path::new(t)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| t.clone())
            })
            .collect()
    });
    Ok(LoadedScenario {
        graphs,
        ground_truths,
        instance_names,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;

    fn desk_spec(mode: ScenarioMode, seed: u64) -> GenSpec {
        GenSpec {
            base_node_count: 20,
            increment: 5,
            instance_count: 3,
            communities: 4,
            mode,
            seed,
            ..GenSpec::default()
        }
    }

    #[test]
    fn degenerate_probabilities_give_complete_intra_digraph() {
        let spec = GenSpec {
            base_node_count: 8,
            communities: 1,
            p_in: 1.0,
            p_out: 0.0,
            ..GenSpec::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
        assert_eq!(truth.num_communities(), 1);
        for v in 0..8 {
            for u in 0..8 {
                let w = graph.weight(v, u);
                if v == u {
                    assert_eq!(w, 0.0);
                } else {
                    assert!((10.0..20.0).contains(&w));
                }
            }
        }
    }

    #[test]
    fn planted_partition_has_requested_community_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let truth = planted_partition(50, 8, &mut rng);
            assert_eq!(truth.num_communities(), 8);
            assert!(truth.decode().iter().all(|c| !c.is_empty()));
        }
    }

    fn intra_frequency(graph: &WeightedDigraph, truth: &Partition) -> f64 {
        let n = graph.node_count();
        let mut pairs = 0usize;
        let mut edges = 0usize;
        for v in 0..n {
            for u in 0..n {
                if v != u && truth.same_community(v, u) {
                    pairs += 1;
                    if graph.weight(v, u) > 0.0 {
                        edges += 1;
                    }
                }
            }
        }
        edges as f64 / pairs as f64
    }

    #[test]
    fn intra_edge_frequency_tracks_p_in() {
        // Binomial tolerance over fixed-seed fixtures; the V = 100 instance
        // has enough intra pairs that 0.03 is several standard deviations.
        for (node_count, seed) in [(50usize, 8u64), (100, 1)] {
            let spec = GenSpec {
                base_node_count: node_count,
                seed,
                ..GenSpec::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
            let frequency = intra_frequency(&graph, &truth);
            assert!(
                (frequency - spec.p_in).abs() <= 0.03,
                "V={node_count}: intra frequency {frequency} strays from p_in"
            );
        }
    }

    #[test]
    fn ground_truth_scores_better_than_single_community() {
        let spec = GenSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
        let q = graph.modularity(&truth).unwrap();
        assert!(q > 0.0, "planted partition scored {q}");
    }

    #[test]
    fn oi_extension_preserves_leading_block_bitwise() {
        let spec = desk_spec(ScenarioMode::Oi, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
        let (bigger, _) =
            extend_instance(&graph, &truth, 5, ScenarioMode::Oi, &spec, &mut rng).unwrap();
        assert_eq!(bigger.node_count(), 25);
        for v in 0..20 {
            for u in 0..20 {
                assert_eq!(bigger.weight(v, u).to_bits(), graph.weight(v, u).to_bits());
            }
        }
    }

    #[test]
    fn ui_extension_preserves_shifted_block_bitwise() {
        let spec = desk_spec(ScenarioMode::Ui, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
        let (bigger, _) =
            extend_instance(&graph, &truth, 5, ScenarioMode::Ui, &spec, &mut rng).unwrap();
        for v in 0..20 {
            for u in 0..20 {
                assert_eq!(
                    bigger.weight(v + 5, u + 5).to_bits(),
                    graph.weight(v, u).to_bits()
                );
            }
        }
    }

    #[test]
    fn extension_rejects_zero_added_and_isolates_under_zero_probabilities() {
        let spec = desk_spec(ScenarioMode::Oi, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (graph, truth) = generate_base(&spec, &mut rng).unwrap();
        assert!(extend_instance(&graph, &truth, 0, ScenarioMode::Oi, &spec, &mut rng).is_err());
        // With both probabilities forced to zero the new node stays isolated.
        let isolated_spec = GenSpec {
            p_in: 0.0,
            p_out: 0.0,
            ..spec
        };
        let (bigger, _) = extend_instance(
            &graph,
            &truth,
            1,
            ScenarioMode::Oi,
            &isolated_spec,
            &mut rng,
        )
        .unwrap();
        let v = bigger.node_count() - 1;
        assert_eq!(bigger.in_strength(v), 0.0);
        assert_eq!(bigger.out_strength(v), 0.0);
    }

    #[test]
    fn scenario_files_follow_naming_convention() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GenSpec {
            seed: 11,
            ..GenSpec::default()
        };
        let (scenario, manifest_path) = generate_scenario(&spec, dir.path()).unwrap();
        let names: Vec<&str> = scenario.instances.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(names.len(), 11);
        assert_eq!(names[0], "OI_50_8");
        assert_eq!(names[10], "OI_100_8");
        for name in &names {
            assert!(dir.path().join(format!("{name}.json")).exists());
        }
        let loaded = load_scenario(&manifest_path).unwrap();
        assert_eq!(loaded.graphs.len(), 11);
        assert_eq!(loaded.instance_names, names);
        for (instance, loaded_graph) in scenario.instances.iter().zip(&loaded.graphs) {
            assert_eq!(&instance.graph, loaded_graph);
        }
    }

    #[test]
    fn oi_chain_overlap_holds_pairwise() {
        let dir = tempfile::tempdir().unwrap();
        let spec = desk_spec(ScenarioMode::Oi, 21);
        let (scenario, _) = generate_scenario(&spec, dir.path()).unwrap();
        for pair in scenario.instances.windows(2) {
            let small = &pair[0].graph;
            let large = &pair[1].graph;
            for v in 0..small.node_count() {
                for u in 0..small.node_count() {
                    assert_eq!(large.weight(v, u).to_bits(), small.weight(v, u).to_bits());
                }
            }
        }
    }

    #[test]
    fn ui_and_oi_share_the_base_instance_for_one_seed() {
        let dir = tempfile::tempdir().unwrap();
        let oi = desk_spec(ScenarioMode::Oi, 33);
        let ui = desk_spec(ScenarioMode::Ui, 33);
        let (oi_scenario, _) = generate_scenario(&oi, dir.path().join("oi").as_path()).unwrap();
        let (ui_scenario, _) = generate_scenario(&ui, dir.path().join("ui").as_path()).unwrap();
        assert_eq!(oi_scenario.instances[0].graph, ui_scenario.instances[0].graph);
        assert_ne!(oi_scenario.instances[1].graph, ui_scenario.instances[1].graph);
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let spec = desk_spec(ScenarioMode::Ui, 55);
        generate_scenario(&spec, dir_a.path()).unwrap();
        generate_scenario(&spec, dir_b.path()).unwrap();
        let mut names: Vec<String> = fs::read_dir(dir_a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = fs::read(dir_a.path().join(&name)).unwrap();
            let b = fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(a, b, "file {name} differs between regenerations");
        }
    }

    #[test]
    fn spec_validation_catches_bad_parameters() {
        let bad_probabilities = GenSpec {
            p_out: 0.9,
            ..GenSpec::default()
        };
        assert!(bad_probabilities.validate().is_err());
        let too_many_communities = GenSpec {
            communities: 200,
            ..GenSpec::default()
        };
        assert!(too_many_communities.validate().is_err());
        let overlapping_ranges = GenSpec {
            intra_weight_range: (5.0, 20.0),
            ..GenSpec::default()
        };
        assert!(overlapping_ranges.validate().is_err());
    }

    #[test]
    fn manifest_accepts_solver_fields() {
        let json = r#"{
            "tasks": ["a.json", "b.json"],
            "algorithm": "covns",
            "seed": 3,
            "n_per_deme": 10,
            "evals_per_individual": 1000,
            "freq_migr": 0.03,
            "prop": 0.05
        }"#;
        let manifest: ScenarioManifest = serde_json::from_str(json).unwrap();
        assert_eq!(manifest.tasks.len(), 2);
        assert_eq!(manifest.algorithm.as_deref(), Some("covns"));
        assert_eq!(manifest.n_per_deme, Some(10));
    }
}
