//! Cheapest explicit-entailments query for a fixed canonical q-partition:
//! a minimum-cost minimal hitting set of the ⊆-minimal traits.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::dpi::{Dpi, QPartition, Query, SentenceId};
use crate::error::{Error, Result};

/// Query cost measure over sentence sets. All three are monotone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Qcm {
    Sum,
    Max,
    #[default]
    Card,
}

impl FromStr for Qcm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Qcm::Sum),
            "max" => Ok(Qcm::Max),
            "card" => Ok(Qcm::Card),
            other => Err(Error::Config(format!("unknown query cost measure {other:?}"))),
        }
    }
}

impl fmt::Display for Qcm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qcm::Sum => "sum",
            Qcm::Max => "max",
            Qcm::Card => "card",
        })
    }
}

impl Qcm {
    pub fn cost<'a>(self, dpi: &Dpi, ids: impl IntoIterator<Item = &'a SentenceId>) -> f64 {
        let costs = ids.into_iter().map(|&id| dpi.cost(id));
        match self {
            Qcm::Sum => costs.sum(),
            Qcm::Max => costs.fold(0.0, f64::max),
            Qcm::Card => costs.count() as f64,
        }
    }
}

/// The ⊆-minimal sets among D_i ∖ U_{D+} for D_i ∈ D−.
pub fn min_traits(qp: &QPartition) -> Vec<BTreeSet<SentenceId>> {
    let u = qp.union_dplus();
    let traits: BTreeSet<BTreeSet<SentenceId>> = qp
        .dminus
        .iter()
        .map(|d| d.ids().difference(&u).copied().collect())
        .collect();
    traits
        .iter()
        .filter(|t| !traits.iter().any(|o| o != *t && o.is_subset(t)))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostedQuery {
    pub ids: BTreeSet<SentenceId>,
    pub query: Query,
    pub cost: f64,
}

struct Node {
    cost: f64,
    path: Vec<SentenceId>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // min-heap on (cost, id list)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.path.cmp(&self.path))
    }
}

/// A minimal hitting set of `traits` with least cost; ties go to the
/// lexicographically smallest id list.
pub fn cheapest_hitting_set(
    dpi: &Dpi,
    traits: &[BTreeSet<SentenceId>],
    qcm: Qcm,
) -> Result<(BTreeSet<SentenceId>, f64)> {
    if traits.iter().any(BTreeSet::is_empty) {
        return Err(Error::Precondition("an empty trait cannot be hit".into()));
    }
    let hits_all = |h: &BTreeSet<SentenceId>| traits.iter().all(|t| !t.is_disjoint(h));
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<SentenceId>> = HashSet::new();
    heap.push(Node {
        cost: 0.0,
        path: Vec::new(),
    });
    let mut best: Option<(Vec<SentenceId>, f64)> = None;
    while let Some(node) = heap.pop() {
        if let Some((_, c)) = &best {
            if node.cost > *c + 1e-12 {
                break;
            }
        }
        let set: BTreeSet<SentenceId> = node.path.iter().copied().collect();
        match traits.iter().find(|t| t.is_disjoint(&set)) {
            None => {
                let minimal = set.iter().all(|id| {
                    let mut smaller = set.clone();
                    smaller.remove(id);
                    !hits_all(&smaller)
                });
                if minimal && best.as_ref().is_none_or(|(p, _)| node.path < *p) {
                    best = Some((node.path.clone(), node.cost));
                }
            }
            Some(open) => {
                for &id in open {
                    let mut child = node.path.clone();
                    child.push(id);
                    child.sort();
                    if seen.insert(child.clone()) {
                        let cost = qcm.cost(dpi, &child);
                        heap.push(Node { cost, path: child });
                    }
                }
            }
        }
    }
    let (path, cost) = best.expect("non-empty traits always have a hitting set");
    Ok((path.into_iter().collect(), cost))
}

/// The cost-optimal minimal query whose q-partition is `qp`.
pub fn optimal_query_for_qp(dpi: &Dpi, qp: &QPartition, qcm: Qcm) -> Result<CostedQuery> {
    let traits = min_traits(qp);
    if traits.is_empty() {
        return Err(Error::Precondition("the q-partition has an empty D−".into()));
    }
    let (ids, cost) = cheapest_hitting_set(dpi, &traits, qcm)?;
    let query = Query::new(dpi.sentences_of(&ids)?)?;
    Ok(CostedQuery { ids, query, cost })
}
