//! Independent oracles and fixture helpers used by the test suites.
//!
//! Everything here recomputes results from first principles (naive double
//! loops, exhaustive enumeration) and deliberately avoids the cached fields
//! and incremental paths of the main implementation, so tests compare two
//! independent routes.

use rand::Rng;

use crate::graph::WeightedDigraph;
use crate::partition::Partition;

/// Brute-force directed weighted modularity: a direct transcription of the
/// objective with strengths recomputed by naive summation on every call.
#[allow(clippy::needless_range_loop)] // naive transcription on purpose
pub fn modularity_oracle(g: &WeightedDigraph, p: &Partition) -> f64 {
    let n = g.node_count();
    let mut total = 0.0;
    for v in 0..n {
        for u in 0..n {
            total += g.weight(v, u);
        }
    }
    let mut s_in = vec![0.0; n];
    let mut s_out = vec![0.0; n];
    for v in 0..n {
        for u in 0..n {
            s_out[v] += g.weight(v, u);
            s_in[v] += g.weight(u, v);
        }
    }
    let mut q = 0.0;
    for v in 0..n {
        for u in 0..n {
            if p.label_of(v) == p.label_of(u) {
                q += g.weight(v, u) - s_in[v] * s_out[u] / total;
            }
        }
    }
    q / total
}

/// Enumerates every set partition of `n` elements as canonical label
/// vectors (restricted growth strings). Returns `Bell(n)` partitions.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut labels = vec![1u32; n];
    enumerate(&mut labels, 1, 1, &mut out);
    out
}

fn enumerate(labels: &mut Vec<u32>, position: usize, max_label: u32, out: &mut Vec<Partition>) {
    if position == labels.len() {
        out.push(Partition::repair(labels).expect("canonical by construction"));
        return;
    }
    for label in 1..=max_label + 1 {
        labels[position] = label;
        enumerate(labels, position + 1, max_label.max(label), out);
    }
    labels[position] = 1;
}

/// Exhaustive optimum of the modularity objective over all `Bell(V)`
/// partitions, evaluated with the brute-force oracle.
pub fn exhaustive_optimum(g: &WeightedDigraph) -> (Partition, f64) {
    let mut best: Option<(Partition, f64)> = None;
    for p in all_partitions(g.node_count()) {
        let q = modularity_oracle(g, &p);
        if best.as_ref().is_none_or(|(_, b)| q > *b) {
            best = Some((p, q));
        }
    }
    best.expect("at least one partition exists")
}

/// Random dense digraph: each ordered pair gains an edge with the given
/// density, weight uniform in `[0, 10)`.
pub fn random_graph(node_count: usize, density: f64, rng: &mut impl Rng) -> WeightedDigraph {
    let mut weights = vec![0.0; node_count * node_count];
    for v in 0..node_count {
        for u in 0..node_count {
            if v != u && rng.gen_bool(density) {
                weights[v * node_count + u] = rng.gen_range(0.0..10.0);
            }
        }
    }
    WeightedDigraph::from_matrix(node_count, weights).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_match_bell_numbers() {
        assert_eq!(all_partitions(1).len(), 1);
        assert_eq!(all_partitions(4).len(), 15);
        assert_eq!(all_partitions(5).len(), 52);
        assert_eq!(all_partitions(6).len(), 203);
    }

    #[test]
    fn enumerated_partitions_are_distinct_and_canonical() {
        let partitions = all_partitions(5);
        let unique: std::collections::HashSet<_> =
            partitions.iter().map(|p| p.labels().to_vec()).collect();
        assert_eq!(unique.len(), partitions.len());
        for p in &partitions {
            assert_eq!(
                Partition::repair(p.labels()).unwrap().labels(),
                p.labels()
            );
        }
    }
}
