//! Label-based partition encoding with canonical repair.
//!
//! A partition over `V` nodes is a vector of positive integer labels where
//! equal labels mean same community. Two raw vectors can encode the same
//! partition (e.g. `[2,3,3,...]` and `[3,4,4,...]`); [`Partition::repair`]
//! removes the ambiguity by renumbering labels in first-occurrence order, so
//! node 1 always carries label 1 and every later label is at most
//! `max-so-far + 1`.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A canonical community assignment. `labels()[v]` is the 1-based community
/// label of node `v + 1`; labels cover `1..=M` with no gaps.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u32>,
}

impl Partition {
    /// Canonicalizes a raw label vector, preserving the induced set
    /// partition. Idempotent.
    pub fn repair(raw: &[u32]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyLabels);
        }
        let mut remap: HashMap<u32, u32> = HashMap::with_capacity(raw.len());
        let mut next = 0u32;
        let mut labels = Vec::with_capacity(raw.len());
        for (position, &label) in raw.iter().enumerate() {
            if label == 0 {
                return Err(Error::NonPositiveLabel { position });
            }
            let canonical = *remap.entry(label).or_insert_with(|| {
                next += 1;
                next
            });
            labels.push(canonical);
        }
        Ok(Partition { labels })
    }

    /// Single community containing every node.
    pub fn single_community(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyLabels);
        }
        Ok(Partition {
            labels: vec![1; node_count],
        })
    }

    /// Uniform random partition: each node draws a label in `[1, V]`
    /// independently, then the vector is repaired.
    pub fn random(node_count: usize, rng: &mut impl Rng) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyLabels);
        }
        let raw: Vec<u32> = (0..node_count)
            .map(|_| rng.gen_range(1..=node_count as u32))
            .collect();
        Self::repair(&raw)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Label of node at 0-based position `v`.
    pub fn label_of(&self, v: usize) -> u32 {
        self.labels[v]
    }

    /// Number of communities M (labels cover `1..=M`).
    pub fn num_communities(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0) as usize
    }

    /// Expands the label vector into explicit communities. Community `m`
    /// (0-based position `m - 1`) lists its member node ids, 1-based and
    /// ascending, matching the node numbering used by graph files.
    pub fn decode(&self) -> Vec<Vec<usize>> {
        let mut communities = vec![Vec::new(); self.num_communities()];
        for (v, &label) in self.labels.iter().enumerate() {
            communities[(label - 1) as usize].push(v + 1);
        }
        communities
    }

    /// True iff `self` and `other` place nodes `a` and `b` (0-based) in the
    /// same community.
    pub fn same_community(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({:?})", self.labels)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u32>::deserialize(deserializer)?;
        Partition::repair(&raw).map_err(D::Error::custom)
    }
}
