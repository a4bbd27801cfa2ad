//! Minimal conflicts and probability-ordered minimal diagnoses.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::dpi::{Diagnosis, Dpi, SentenceId};
use crate::error::{Error, Result};
use crate::quickxplain::quickxplain;

/// A set of K sentences that, together with B and U_P, violates the
/// requirements or a negative test case.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conflict(BTreeSet<SentenceId>);

impl Conflict {
    pub fn ids(&self) -> &BTreeSet<SentenceId> {
        &self.0
    }

    pub fn raw(&self) -> Vec<u32> {
        self.0.iter().map(|i| i.0).collect()
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Diagnosis::new(self.0.iter().copied()).fmt(f)
    }
}

/// A ⊆-minimal conflict inside `candidate`, or `None` if `candidate` is
/// not a conflict.
pub fn min_conflict(dpi: &Dpi, candidate: &BTreeSet<SentenceId>) -> Option<Conflict> {
    if !dpi.violates(&dpi.kb_with(candidate)) {
        return None;
    }
    let items: Vec<SentenceId> = candidate.iter().copied().collect();
    let found = quickxplain(&items, |s| dpi.violates(&dpi.kb_with(&s.iter().copied().collect())));
    Some(Conflict(found.into_iter().collect()))
}

/// p(D) = ∏_{α∈D} p(α) · ∏_{α∈K∖D} (1 − p(α)).
pub fn diagnosis_prob(dpi: &Dpi, d: &Diagnosis) -> f64 {
    dpi.ids()
        .map(|id| {
            let p = dpi.fault_prob(id);
            if d.contains(id) {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

/// Minimal diagnoses sorted by descending probability (ties by id list),
/// with probabilities normalized over the list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LeadingDiagnoses {
    entries: Vec<(Diagnosis, f64)>,
}

impl LeadingDiagnoses {
    /// Sorts and normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: impl IntoIterator<Item = (Diagnosis, f64)>) -> Self {
        let mut entries: Vec<(Diagnosis, f64)> = weights.into_iter().collect();
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if total > 0.0 {
            for (_, w) in &mut entries {
                *w /= total;
            }
        }
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        LeadingDiagnoses { entries }
    }

    /// Product-form priors from the DPI's fault probabilities.
    pub fn with_priors(dpi: &Dpi, diags: impl IntoIterator<Item = Diagnosis>) -> Self {
        Self::from_weights(diags.into_iter().map(|d| {
            let p = diagnosis_prob(dpi, &d);
            (d, p)
        }))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Diagnosis, f64)] {
        &self.entries
    }

    pub fn diagnoses(&self) -> Vec<Diagnosis> {
        self.entries.iter().map(|(d, _)| d.clone()).collect()
    }

    pub fn prob(&self, d: &Diagnosis) -> f64 {
        self.entries
            .iter()
            .find(|(e, _)| e == d)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Total probability of `set`.
    pub fn mass<'a>(&self, set: impl IntoIterator<Item = &'a Diagnosis>) -> f64 {
        set.into_iter().map(|d| self.prob(d)).sum()
    }

    pub fn best(&self) -> Option<&(Diagnosis, f64)> {
        self.entries.first()
    }
}

#[derive(Debug)]
struct Node {
    key: f64,
    exact: bool,
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
    // max-heap: higher key first, then exact entries, then smaller id list
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| self.exact.cmp(&other.exact))
            .then_with(|| other.path.cmp(&self.path))
    }
}

/// Up to `limit` minimal diagnoses in descending probability order.
///
/// Best-first hitting-set tree: a node is keyed by an upper bound on the
/// probability of any superset of its path (its own probability, times the
/// odds of every remaining sentence more likely faulty than not). Conflicts
/// are reused across nodes; duplicate paths and supersets of found
/// diagnoses are closed. Once `budget` is exceeded the diagnoses found so
/// far are returned if there are at least two.
pub fn hs_tree(dpi: &Dpi, limit: usize, budget: Option<Duration>) -> Result<LeadingDiagnoses> {
    dpi.check_valid()?;
    let start = Instant::now();
    let all = dpi.id_set();
    let odds = |id: SentenceId| {
        let p = dpi.fault_prob(id);
        p / (1.0 - p)
    };
    let bound = |path: &[SentenceId], p: f64| -> f64 {
        dpi.ids()
            .filter(|id| !path.contains(id) && dpi.fault_prob(*id) > 0.5)
            .fold(p, |acc, id| acc * odds(id))
    };

    let mut conflicts: Vec<Conflict> = Vec::new();
    let mut found: Vec<(Diagnosis, f64)> = Vec::new();
    let mut seen: HashSet<Vec<SentenceId>> = HashSet::new();
    let mut heap = BinaryHeap::new();
    let root_p = diagnosis_prob(dpi, &Diagnosis::default());
    heap.push(Node {
        key: bound(&[], root_p),
        exact: false,
        path: Vec::new(),
    });
    seen.insert(Vec::new());

    while let Some(node) = heap.pop() {
        if found.len() >= limit {
            break;
        }
        if let Some(b) = budget {
            if start.elapsed() > b {
                if found.len() >= 2 {
                    break;
                }
                return Err(Error::Budget { found: found.len() });
            }
        }
        let path_set: BTreeSet<SentenceId> = node.path.iter().copied().collect();
        if found.iter().any(|(d, _)| d.is_subset(&path_set)) {
            continue;
        }
        let d = Diagnosis::new(path_set.iter().copied());
        if node.exact {
            found.push((d, node.key));
            continue;
        }
        if !dpi.violates(&dpi.kb_without(&path_set)) {
            // upward closure of diagnoses makes single deletions sufficient
            let minimal = path_set.iter().all(|id| {
                let mut smaller = path_set.clone();
                smaller.remove(id);
                dpi.violates(&dpi.kb_without(&smaller))
            });
            if minimal {
                heap.push(Node {
                    key: diagnosis_prob(dpi, &d),
                    exact: true,
                    path: node.path,
                });
            }
            continue;
        }
        let label = match conflicts.iter().find(|c| c.ids().is_disjoint(&path_set)) {
            Some(c) => c.clone(),
            None => {
                let rest: BTreeSet<SentenceId> = all.difference(&path_set).copied().collect();
                let c = min_conflict(dpi, &rest).expect("a non-diagnosis leaves a conflict");
                conflicts.push(c.clone());
                c
            }
        };
        let p = diagnosis_prob(dpi, &d);
        for &id in label.ids() {
            let mut child = node.path.clone();
            child.push(id);
            child.sort();
            if !seen.insert(child.clone()) {
                continue;
            }
            let cp = p * odds(id);
            heap.push(Node {
                key: bound(&child, cp),
                exact: false,
                path: child,
            });
        }
    }
    Ok(LeadingDiagnoses::from_weights(found))
}

/// Every minimal diagnosis.
pub fn all_min_diagnoses(dpi: &Dpi) -> Result<Vec<Diagnosis>> {
    let mut out = hs_tree(dpi, usize::MAX, None)?.diagnoses();
    out.sort();
    Ok(out)
}

/// Every minimal conflict, as the minimal hitting sets of all minimal diagnoses.
pub fn all_min_conflicts(dpi: &Dpi) -> Result<Vec<Conflict>> {
    let diags = all_min_diagnoses(dpi)?;
    if diags.iter().any(Diagnosis::is_empty) {
        return Ok(Vec::new());
    }
    let sets: Vec<BTreeSet<SentenceId>> = diags.iter().map(|d| d.ids().clone()).collect();
    let mut out: Vec<Conflict> = minimal_hitting_sets(&sets).into_iter().map(Conflict).collect();
    out.sort();
    Ok(out)
}

/// All ⊆-minimal hitting sets of a family of non-empty sets.
pub fn minimal_hitting_sets<T: Ord + Clone>(sets: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let mut found: Vec<BTreeSet<T>> = Vec::new();
    let mut frontier = vec![BTreeSet::new()];
    let mut seen = BTreeSet::new();
    while let Some(h) = frontier.pop() {
        if found.iter().any(|f| f.is_subset(&h)) {
            continue;
        }
        match sets.iter().find(|s| s.is_disjoint(&h)) {
            None => {
                found.retain(|f| !h.is_subset(f));
                found.push(h);
            }
            Some(s) => {
                for x in s {
                    let mut child = h.clone();
                    child.insert(x.clone());
                    if seen.insert(child.clone()) {
                        frontier.push(child);
                    }
                }
            }
        }
    }
    let minimal: Vec<BTreeSet<T>> = found
        .iter()
        .filter(|h| !found.iter().any(|o| o != *h && o.is_subset(h)))
        .cloned()
        .collect();
    minimal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(v: &[u32]) -> BTreeSet<SentenceId> {
        v.iter().map(|&i| SentenceId(i)).collect()
    }

    #[test]
    fn min_conflict_examples() {
        let exk = fixtures::exk();
        let c = min_conflict(&exk, &exk.id_set()).unwrap();
        let expected = fixtures::exk_min_conflicts();
        assert!(expected.contains(&c.raw()), "{c}");
        assert!(min_conflict(&exk, &ids(&[1])).is_none());
        let circuit = fixtures::circuit_reduced().dpi;
        let c = min_conflict(&circuit, &circuit.id_set()).unwrap();
        assert!([vec![1, 2], vec![1, 4, 5]].contains(&c.raw()));
    }

    #[test]
    fn exk_diagnoses_and_conflicts() {
        let exk = fixtures::exk();
        let mut expected = fixtures::exk_min_diagnoses();
        expected.sort();
        assert_eq!(all_min_diagnoses(&exk).unwrap(), expected);
        let conflicts: Vec<Vec<u32>> = all_min_conflicts(&exk).unwrap().iter().map(Conflict::raw).collect();
        assert_eq!(conflicts, fixtures::exk_min_conflicts());
    }

    #[test]
    fn leading_order_and_limit() {
        let exk = fixtures::exk();
        let top = hs_tree(&exk, 4, None).unwrap();
        assert_eq!(top.len(), 4);
        // the four two-element diagnoses are each 9x as likely as the three-element ones
        for (d, p) in top.entries() {
            assert_eq!(d.len(), 2);
            assert!((p - 0.25).abs() < 1e-12);
        }
        let all = hs_tree(&exk, 10, None).unwrap();
        assert_eq!(all.len(), 6);
        let sum: f64 = all.entries().iter().map(|e| e.1).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let d1 = Diagnosis::from_ids(&[2, 3]);
        let d5 = Diagnosis::from_ids(&[1, 4, 7]);
        assert!((diagnosis_prob(&exk, &d1) / diagnosis_prob(&exk, &d5) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn circuit_probabilities() {
        let circuit = fixtures::circuit_reduced().dpi;
        let lead = hs_tree(&circuit, 10, None).unwrap();
        let got: Vec<(Vec<u32>, f64)> = lead.entries().iter().map(|(d, p)| (d.raw(), *p)).collect();
        assert_eq!(got[0].0, vec![1]);
        assert_eq!(got[1].0, vec![2, 4]);
        assert_eq!(got[2].0, vec![2, 5]);
        for (g, want) in got.iter().zip([0.93, 0.05, 0.02]) {
            assert!((g.1 - want).abs() < 0.005, "{g:?}");
        }
    }

    #[test]
    fn high_fault_probabilities_keep_order_exact() {
        let mut exk = fixtures::exk();
        exk.set_fault_prob(SentenceId(4), 0.9).unwrap();
        exk.set_fault_prob(SentenceId(7), 0.8).unwrap();
        let lead = hs_tree(&exk, 10, None).unwrap();
        assert_eq!(lead.len(), 6);
        assert_eq!(lead.entries()[0].0, Diagnosis::from_ids(&[1, 4, 7]));
        let by_prior: Vec<f64> = lead.entries().iter().map(|(d, _)| diagnosis_prob(&exk, d)).collect();
        assert!(by_prior.windows(2).all(|w| w[0] >= w[1]));
        let top2 = hs_tree(&exk, 2, None).unwrap();
        assert_eq!(top2.diagnoses(), lead.diagnoses()[..2].to_vec());
    }

    #[test]
    fn empty_diagnosis_when_nothing_is_wrong() {
        let dpi = crate::parse_dpi("[K]\n1: A\n2: A -> B\n").unwrap();
        let lead = hs_tree(&dpi, 10, None).unwrap();
        assert_eq!(lead.diagnoses(), vec![Diagnosis::default()]);
    }

    #[test]
    fn zero_budget_is_an_error() {
        let exk = fixtures::exk();
        assert!(matches!(
            hs_tree(&exk, 10, Some(Duration::ZERO)),
            Err(Error::Budget { found: 0 })
        ));
    }

    #[test]
    fn hitting_sets_of_small_family() {
        let fam = vec![ids(&[1, 2]), ids(&[2, 3]), ids(&[4])];
        let mut mhs = minimal_hitting_sets(&fam);
        mhs.sort();
        assert_eq!(mhs, vec![ids(&[1, 3, 4]), ids(&[2, 4])]);
    }
}
