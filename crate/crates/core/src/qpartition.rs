//! Canonical q-partitions and the search for the best one under a query
//! selection measure. Nothing here calls the reasoner: canonical
//! q-partitions are determined by set relations between diagnoses alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diagnosis::LeadingDiagnoses;
use crate::dpi::{intersection_of, union_of, Diagnosis, Dpi, QPartition, Query, SentenceId};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Query selection measure; both have optimum 0 and lower is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Expected information gain, as distance from a 50/50 answer split.
    Ent,
    /// Split-in-half: imbalance in the number of eliminated diagnoses.
    Spl,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ent" => Ok(Measure::Ent),
            "spl" => Ok(Measure::Spl),
            other => Err(Error::Config(format!("unknown query selection measure {other:?}"))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Ent => "ent",
            Measure::Spl => "spl",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QsmConfig {
    pub measure: Measure,
    /// A q-partition within this distance of the optimum ends the search.
    pub threshold: f64,
    /// Skip successors of nodes that can only get worse.
    pub pruning: bool,
}

impl QsmConfig {
    pub fn new(measure: Measure, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::Config(format!("threshold {threshold} must be non-negative")));
        }
        Ok(QsmConfig {
            measure,
            threshold,
            pruning: true,
        })
    }
}

impl Default for QsmConfig {
    fn default() -> Self {
        QsmConfig {
            measure: Measure::Ent,
            threshold: 0.01,
            pruning: true,
        }
    }
}

/// Discrimination sentences U_D ∖ I_D.
pub fn discrimination_sentences(leading: &[Diagnosis]) -> BTreeSet<SentenceId> {
    let u = union_of(leading);
    let i = intersection_of(leading);
    u.difference(&i).copied().collect()
}

/// The canonical query of a seed: the discrimination sentences outside U_seed.
pub fn canonical_query(dpi: &Dpi, leading: &[Diagnosis], seed: &[Diagnosis]) -> Result<Option<Query>> {
    if seed.is_empty() || seed.len() >= leading.len() || !seed.iter().all(|s| leading.contains(s)) {
        return Err(Error::Precondition(
            "the seed must be a non-empty proper subset of the leading diagnoses".into(),
        ));
    }
    let ids = canonical_query_ids(leading, &union_of(seed));
    if ids.is_empty() {
        return Ok(None);
    }
    Ok(Some(Query::new(dpi.sentences_of(&ids)?)?))
}

/// Discrimination sentences not in `union_dplus`.
pub fn canonical_query_ids(leading: &[Diagnosis], union_dplus: &BTreeSet<SentenceId>) -> BTreeSet<SentenceId> {
    discrimination_sentences(leading)
        .difference(union_dplus)
        .copied()
        .collect()
}

/// True iff ⟨dplus, dminus, ∅⟩ is a canonical q-partition of their union.
pub fn is_cqp(dplus: &BTreeSet<Diagnosis>, dminus: &BTreeSet<Diagnosis>) -> bool {
    if dplus.is_empty() || dminus.is_empty() {
        return false;
    }
    let u_plus = union_of(dplus);
    let u_all = union_of(dplus.iter().chain(dminus));
    u_plus.len() < u_all.len() && dminus.iter().all(|d| !d.is_subset(&u_plus))
}

/// A canonical q-partition as a search state.
#[derive(Clone, Debug, PartialEq)]
pub struct CqpNode {
    pub dplus: BTreeSet<Diagnosis>,
    pub dminus: BTreeSet<Diagnosis>,
    pub union_dplus: BTreeSet<SentenceId>,
    /// Diagnoses that must not be moved into D+ below this node.
    pub forbidden: BTreeSet<Diagnosis>,
    /// The class moved to reach this node.
    pub moved: BTreeSet<Diagnosis>,
}

impl CqpNode {
    fn new(dplus: BTreeSet<Diagnosis>, dminus: BTreeSet<Diagnosis>, moved: BTreeSet<Diagnosis>) -> Self {
        CqpNode {
            union_dplus: union_of(&dplus),
            dplus,
            dminus,
            forbidden: BTreeSet::new(),
            moved,
        }
    }

    /// D_i ∖ U_{D+} for every D_i in D−.
    pub fn traits(&self) -> BTreeMap<Diagnosis, BTreeSet<SentenceId>> {
        self.dminus
            .iter()
            .map(|d| (d.clone(), d.ids().difference(&self.union_dplus).copied().collect()))
            .collect()
    }

    pub fn to_qpartition(&self) -> QPartition {
        QPartition {
            dplus: self.dplus.clone(),
            dminus: self.dminus.clone(),
            dzero: BTreeSet::new(),
        }
    }
}

/// ⟨{D}, D ∖ {D}⟩ for every leading diagnosis, in leading order.
pub fn s_init(leading: &[Diagnosis]) -> Vec<CqpNode> {
    leading
        .iter()
        .map(|d| {
            let dplus: BTreeSet<Diagnosis> = [d.clone()].into();
            let dminus = leading.iter().filter(|e| *e != d).cloned().collect();
            CqpNode::new(dplus.clone(), dminus, dplus)
        })
        .collect()
}

/// One successor per trait class with a ⊆-minimal trait, moving the class
/// to D+. Classes touching `node.forbidden` are skipped; nothing is
/// returned when a single class is left.
pub fn s_next(node: &CqpNode) -> Vec<CqpNode> {
    let mut classes: BTreeMap<BTreeSet<SentenceId>, BTreeSet<Diagnosis>> = BTreeMap::new();
    for (d, t) in node.traits() {
        classes.entry(t).or_default().insert(d);
    }
    if classes.len() <= 1 {
        return Vec::new();
    }
    let traits: Vec<&BTreeSet<SentenceId>> = classes.keys().collect();
    let mut out = Vec::new();
    for (t, class) in &classes {
        let minimal = !traits.iter().any(|o| *o != t && o.is_subset(t));
        if !minimal || class.iter().any(|d| node.forbidden.contains(d)) {
            continue;
        }
        let mut dplus = node.dplus.clone();
        dplus.extend(class.iter().cloned());
        let dminus = node.dminus.difference(class).cloned().collect();
        let mut child = CqpNode::new(dplus, dminus, class.clone());
        child.forbidden = node.forbidden.clone();
        out.push(child);
    }
    out
}

/// Probability that the answer is positive: p(D+) + p(D0)/2.
pub fn p_true(qp: &QPartition, probs: &LeadingDiagnoses) -> f64 {
    probs.mass(&qp.dplus) + probs.mass(&qp.dzero) / 2.0
}

fn entropy_gap(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    1.0 + term(p) + term(1.0 - p)
}

pub fn qsm_value(measure: Measure, qp: &QPartition, probs: &LeadingDiagnoses) -> f64 {
    match measure {
        Measure::Ent => entropy_gap(p_true(qp, probs)).max(0.0),
        Measure::Spl => {
            (qp.dplus.len() as f64 - qp.dminus.len() as f64).abs() + qp.dzero.len() as f64
        }
    }
}

fn heuristic(measure: Measure, node: &CqpNode, probs: &LeadingDiagnoses) -> f64 {
    match measure {
        Measure::Ent => (probs.mass(&node.dplus) - 0.5).abs(),
        Measure::Spl => {
            let n = (node.dplus.len() + node.dminus.len()) as f64;
            (node.dplus.len() as f64 - n / 2.0).abs()
        }
    }
}

fn prunable(measure: Measure, node: &CqpNode, probs: &LeadingDiagnoses) -> bool {
    match measure {
        Measure::Ent => probs.mass(&node.dplus) >= 0.5,
        Measure::Spl => {
            let n = (node.dplus.len() + node.dminus.len()) as f64;
            node.dplus.len() as f64 >= n / 2.0
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub generated: usize,
    pub expanded: usize,
}

impl SearchStats {
    pub fn branching_factor(&self) -> f64 {
        if self.expanded == 0 {
            0.0
        } else {
            self.generated as f64 / self.expanded as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub qp: QPartition,
    pub value: f64,
    /// Whether `qp` meets the threshold, as opposed to being the best of a full search.
    pub goal: bool,
    pub stats: SearchStats,
}

struct Search<'a> {
    probs: &'a LeadingDiagnoses,
    qsm: QsmConfig,
    excluded: &'a [QPartition],
    never_goal: bool,
    best: Option<(QPartition, f64)>,
    stats: SearchStats,
    visited: Vec<QPartition>,
}

impl Search<'_> {
    fn is_goal(&self, value: f64) -> bool {
        !self.never_goal && value <= self.qsm.threshold
    }

    /// Visits the ordered successors of one node depth-first; returns the goal if found.
    fn explore(&mut self, mut succ: Vec<CqpNode>) -> Option<(QPartition, f64)> {
        let m = self.qsm.measure;
        succ.sort_by(|a, b| {
            heuristic(m, a, self.probs)
                .total_cmp(&heuristic(m, b, self.probs))
                .then_with(|| a.moved.len().cmp(&b.moved.len()))
                .then_with(|| a.moved.cmp(&b.moved))
        });
        let mut done: BTreeSet<Diagnosis> = BTreeSet::new();
        for mut node in succ {
            if node.moved.iter().any(|d| done.contains(d)) {
                continue;
            }
            node.forbidden.extend(done.iter().cloned());
            self.stats.generated += 1;
            let qp = node.to_qpartition();
            let value = qsm_value(m, &qp, self.probs);
            if self.never_goal {
                self.visited.push(qp.clone());
            }
            if !self.excluded.contains(&qp) {
                if self.best.as_ref().is_none_or(|(_, b)| value < *b - 1e-12) {
                    self.best = Some((qp.clone(), value));
                }
                if self.is_goal(value) {
                    return Some((qp, value));
                }
            }
            if self.qsm.pruning && prunable(m, &node, self.probs) {
                continue;
            }
            self.stats.expanded += 1;
            let children = s_next(&node);
            if let Some(hit) = self.explore(children) {
                return Some(hit);
            }
            done.extend(node.moved.iter().cloned());
        }
        None
    }
}

/// Depth-first, locally best-first search over canonical q-partitions.
/// Returns the first one within the threshold of the optimum, otherwise the
/// best one seen. Q-partitions in `excluded` are never returned.
pub fn search_optimal_qp(
    probs: &LeadingDiagnoses,
    qsm: QsmConfig,
    excluded: &[QPartition],
) -> Result<SearchOutcome> {
    let leading = probs.diagnoses();
    if leading.len() < 2 {
        return Err(Error::Precondition("at least two leading diagnoses are needed".into()));
    }
    let mut search = Search {
        probs,
        qsm,
        excluded,
        never_goal: false,
        best: None,
        stats: SearchStats::default(),
        visited: Vec::new(),
    };
    if let Some((qp, value)) = search.explore(s_init(&leading)) {
        return Ok(SearchOutcome {
            qp,
            value,
            goal: true,
            stats: search.stats,
        });
    }
    let (qp, value) = search
        .best
        .ok_or_else(|| Error::Precondition("every canonical q-partition is excluded".into()))?;
    Ok(SearchOutcome {
        qp,
        value,
        goal: false,
        stats: search.stats,
    })
}

/// Every node of the unpruned, goal-free search tree, in visiting order.
pub fn explore_all(probs: &LeadingDiagnoses, measure: Measure) -> Vec<QPartition> {
    let mut search = Search {
        probs,
        qsm: QsmConfig {
            measure,
            threshold: 0.0,
            pruning: false,
        },
        excluded: &[],
        never_goal: true,
        best: None,
        stats: SearchStats::default(),
        visited: Vec::new(),
    };
    search.explore(s_init(&probs.diagnoses()));
    search.visited
}

/// All canonical q-partitions, one per distinct union of a non-empty proper
/// subset of `leading` (the union of all of `leading` excluded).
pub fn enumerate_cqps(leading: &[Diagnosis], cap: usize) -> Result<Vec<QPartition>> {
    if leading.len() > cap {
        return Err(Error::Config(format!(
            "{} diagnoses exceed the enumeration cap of {cap}",
            leading.len()
        )));
    }
    let n = leading.len();
    let u_all = union_of(leading);
    let mut unions = BTreeSet::new();
    for mask in 1u64..(1u64 << n) - 1 {
        let u = union_of((0..n).filter(|i| mask >> i & 1 == 1).map(|i| &leading[i]));
        if u != u_all {
            unions.insert(u);
        }
    }
    Ok(unions
        .into_iter()
        .map(|u| {
            let dplus = leading.iter().filter(|d| d.is_subset(&u)).cloned();
            QPartition::from_dplus(leading, dplus)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn d(ids: &[u32]) -> Diagnosis {
        Diagnosis::from_ids(ids)
    }

    fn set(ds: &[&Diagnosis]) -> BTreeSet<Diagnosis> {
        ds.iter().map(|&x| x.clone()).collect()
    }

    fn skewed() -> LeadingDiagnoses {
        LeadingDiagnoses::from_weights(fixtures::exk_min_diagnoses().into_iter().zip(fixtures::EXK_SKEWED_PROBS))
    }

    #[test]
    fn canonical_queries_for_three_diagnoses() {
        let exk = fixtures::exk();
        let all = fixtures::exk_min_diagnoses();
        let lead = vec![all[0].clone(), all[4].clone(), all[5].clone()];
        let cq = |seed: &[&Diagnosis]| {
            let seed: Vec<Diagnosis> = seed.iter().map(|&x| x.clone()).collect();
            canonical_query(&exk, &lead, &seed)
                .unwrap()
                .map(|q| {
                    let mut ids: Vec<u32> = q.sentences().iter().map(|f| exk.id_of(f).unwrap().0).collect();
                    ids.sort();
                    ids
                })
        };
        assert_eq!(cq(&[&lead[1], &lead[2]]), Some(vec![2]));
        assert_eq!(cq(&[&lead[0], &lead[1]]), None);
        assert_eq!(cq(&[&lead[1]]), Some(vec![2, 3]));
        assert!(canonical_query(&exk, &lead, &[]).is_err());
        assert!(canonical_query(&exk, &lead, &lead).is_err());
    }

    #[test]
    fn cqp_criterion() {
        let a = fixtures::exk_min_diagnoses();
        assert!(is_cqp(&set(&[&a[0], &a[1], &a[2]]), &set(&[&a[3], &a[4], &a[5]])));
        assert!(!is_cqp(&set(&[&a[0], &a[1], &a[4]]), &set(&[&a[2], &a[3], &a[5]])));
        for node in s_init(&a) {
            assert!(is_cqp(&node.dplus, &node.dminus));
        }
    }

    #[test]
    fn successor_generation() {
        let a = fixtures::exk_min_diagnoses();
        assert_eq!(s_init(&a).len(), 6);
        let d5 = &s_init(&a)[4];
        let next: Vec<BTreeSet<Diagnosis>> = s_next(d5).into_iter().map(|n| n.moved).collect();
        assert_eq!(next, vec![set(&[&a[3]]), set(&[&a[5]])]);

        let stuck = CqpNode::new(set(&[&a[1], &a[2], &a[3], &a[4]]), set(&[&a[0], &a[5]]), BTreeSet::new());
        assert!(s_next(&stuck).is_empty());

        let three = CqpNode::new(set(&[&a[3], &a[4]]), set(&[&a[0], &a[1], &a[2], &a[5]]), BTreeSet::new());
        let moved: Vec<BTreeSet<Diagnosis>> = s_next(&three).into_iter().map(|n| n.moved).collect();
        assert_eq!(moved.len(), 3);
        assert!(moved.contains(&set(&[&a[0], &a[5]])));
    }

    #[test]
    fn measures() {
        let lead = skewed();
        let a = fixtures::exk_min_diagnoses();
        let qp = QPartition::from_dplus(&a, [a[3].clone(), a[4].clone()]);
        assert!((p_true(&qp, &lead) - 0.48).abs() < 1e-12);
        assert!((qsm_value(Measure::Ent, &qp, &lead) - 0.001154).abs() < 1e-6);
        let half = LeadingDiagnoses::from_weights([(d(&[1]), 1.0), (d(&[2]), 1.0)]);
        let qp = QPartition::from_dplus(&half.diagnoses(), [d(&[1])]);
        assert!(qsm_value(Measure::Ent, &qp, &half).abs() < 1e-12);
        let qp = QPartition::from_dplus(&a, a[..3].to_vec());
        assert_eq!(qsm_value(Measure::Spl, &qp, &lead), 0.0);
    }

    #[test]
    fn entropy_search_on_skewed_exk() {
        let a = fixtures::exk_min_diagnoses();
        let out = search_optimal_qp(&skewed(), QsmConfig::default(), &[]).unwrap();
        assert!(out.goal);
        assert_eq!(out.qp, QPartition::from_dplus(&a, [a[3].clone(), a[4].clone()]));
        assert!(out.value > 0.0005 && out.value < 0.002);
    }

    #[test]
    fn circuit_search_returns_best_after_full_exploration() {
        let circuit = fixtures::circuit_reduced().dpi;
        let lead = crate::hs_tree(&circuit, 10, None).unwrap();
        let out = search_optimal_qp(&lead, QsmConfig::default(), &[]).unwrap();
        assert!(!out.goal);
        assert_eq!(out.qp.dplus, [d(&[1])].into());
        assert_eq!(out.qp.dminus, [d(&[2, 4]), d(&[2, 5])].into());
    }

    #[test]
    fn two_diagnoses_split_perfectly() {
        let lead = LeadingDiagnoses::from_weights([(d(&[1]), 0.7), (d(&[2]), 0.3)]);
        let out = search_optimal_qp(&lead, QsmConfig::new(Measure::Spl, 0.0).unwrap(), &[]).unwrap();
        assert!(out.goal);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn exclusion_moves_to_next_best() {
        let first = search_optimal_qp(&skewed(), QsmConfig::default(), &[]).unwrap();
        let second = search_optimal_qp(&skewed(), QsmConfig::default(), std::slice::from_ref(&first.qp)).unwrap();
        assert_ne!(first.qp, second.qp);
    }

    #[test]
    fn cqp_counts() {
        assert_eq!(enumerate_cqps(&fixtures::exk_min_diagnoses(), 20).unwrap().len(), 29);
        for n in 2..=8u32 {
            let lead: Vec<Diagnosis> = (1..=n).map(|i| d(&[i])).collect();
            assert_eq!(enumerate_cqps(&lead, 20).unwrap().len(), (1 << n) - 2);
        }
        let many: Vec<Diagnosis> = (1..=21).map(|i| d(&[i])).collect();
        assert!(enumerate_cqps(&many, 20).is_err());
    }

    #[test]
    fn unpruned_search_visits_every_cqp_once() {
        let lead = LeadingDiagnoses::with_priors(&fixtures::exk(), fixtures::exk_min_diagnoses());
        let visited = explore_all(&lead, Measure::Ent);
        let unique: BTreeSet<_> = visited.iter().cloned().collect();
        assert_eq!(unique.len(), visited.len());
        let all: BTreeSet<_> = enumerate_cqps(&lead.diagnoses(), 20).unwrap().into_iter().collect();
        assert_eq!(unique, all);
    }
}
