//! Successor-generation operators for the VNS loop.
//!
//! Four moves exist: `CE1`, `CE3`, `CC1` and `CC3`. Each extracts one or
//! three randomly chosen nodes from their communities and re-inserts them one
//! at a time. `CE` re-inserts only into communities that already exist at
//! re-insertion time; `CC` may also open a fresh singleton community. The
//! result is always repaired to canonical form.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::Error;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorFamily {
    /// Re-insert into existing communities only.
    Ce,
    /// Re-insert into existing communities or a fresh one.
    Cc,
}

/// One of the four concrete movement operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Ce1,
    Ce3,
    Cc1,
    Cc3,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::Ce1,
        OperatorKind::Ce3,
        OperatorKind::Cc1,
        OperatorKind::Cc3,
    ];

    pub fn family(self) -> OperatorFamily {
        match self {
            OperatorKind::Ce1 | OperatorKind::Ce3 => OperatorFamily::Ce,
            OperatorKind::Cc1 | OperatorKind::Cc3 => OperatorFamily::Cc,
        }
    }

    /// Number of nodes extracted per application.
    pub fn arity(self) -> usize {
        match self {
            OperatorKind::Ce1 | OperatorKind::Cc1 => 1,
            OperatorKind::Ce3 | OperatorKind::Cc3 => 3,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            OperatorKind::Ce1 => "ce1",
            OperatorKind::Ce3 => "ce3",
            OperatorKind::Cc1 => "cc1",
            OperatorKind::Cc3 => "cc3",
        };
        f.write_str(token)
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ce1" => Ok(OperatorKind::Ce1),
            "ce3" => Ok(OperatorKind::Ce3),
            "cc1" => Ok(OperatorKind::Cc1),
            "cc3" => Ok(OperatorKind::Cc3),
            other => Err(Error::InvalidConfig(format!(
                "unknown operator {other:?} (expected ce1, ce3, cc1 or cc3)"
            ))),
        }
    }
}

/// Applies one movement operator and returns the repaired successor.
///
/// `arity` distinct nodes are chosen uniformly (all nodes when `V < arity`)
/// and processed sequentially: the node is extracted (a community emptied by
/// the extraction vanishes), then a target community is drawn uniformly from
/// the candidate set. For `CE` the candidates are the surviving communities,
/// excluding the node's previous one whenever an alternative exists; for `CC`
/// a fresh singleton community joins the candidates.
pub fn apply_operator(kind: OperatorKind, p: &Partition, rng: &mut impl Rng) -> Partition {
    let node_count = p.len();
    let picks = kind.arity().min(node_count);
    let chosen = rand::seq::index::sample(rng, node_count, picks);

    let mut labels = p.labels().to_vec();
    // Fresh ids are max-in-use + 1, so labels stay within 1..=V+arity; size
    // the count table for the worst case (every extraction opens a fresh
    // community).
    let mut counts = vec![0usize; node_count + picks + 2];
    for &label in &labels {
        counts[label as usize] += 1;
    }

    for node in chosen.iter() {
        let old = labels[node] as usize;
        counts[old] -= 1;

        let mut candidates: Vec<usize> = (1..counts.len()).filter(|&l| counts[l] > 0).collect();
        if kind.family() == OperatorFamily::Ce && candidates.len() > 1 {
            candidates.retain(|&l| l != old);
        }
        if kind.family() == OperatorFamily::Cc {
            let fresh = (1..counts.len()).rev().find(|&l| counts[l] > 0).unwrap_or(0) + 1;
            candidates.push(fresh);
        }

        let new = if candidates.is_empty() {
            old // lone node under CE: nowhere else to go
        } else {
            candidates[rng.gen_range(0..candidates.len())]
        };
        labels[node] = new as u32;
        counts[new] += 1;
    }

    Partition::repair(&labels).expect("operator output is a valid label vector")
}
