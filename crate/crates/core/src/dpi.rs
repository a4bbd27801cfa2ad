//! Diagnosis problem instances, diagnoses, queries and q-partitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{self, Formula, KbView, Requirement};

pub const DEFAULT_FAULT_PROB: f64 = 0.1;
pub const DEFAULT_COST: f64 = 1.0;

/// Stable 1-based identity of a sentence of the faulty knowledge base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentenceId(pub u32);

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A non-empty set of sentences that must (positive) or must not (negative)
/// be entailed. Read as the conjunction of its members.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TestCase(KbView);

impl TestCase {
    pub fn new(sentences: impl IntoIterator<Item = Formula>) -> Result<Self> {
        let set: KbView = sentences.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidDpi("test case must not be empty".into()));
        }
        Ok(TestCase(set))
    }

    pub fn single(f: Formula) -> Self {
        TestCase(std::iter::once(f).collect())
    }

    pub fn sentences(&self) -> &KbView {
        &self.0
    }
}

/// A set of sentence ids of the faulty knowledge base assumed to be faulty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnosis(BTreeSet<SentenceId>);

impl Diagnosis {
    pub fn new(ids: impl IntoIterator<Item = SentenceId>) -> Self {
        Diagnosis(ids.into_iter().collect())
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Diagnosis(ids.iter().map(|&i| SentenceId(i)).collect())
    }

    pub fn ids(&self) -> &BTreeSet<SentenceId> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: SentenceId) -> bool {
        self.0.contains(&id)
    }

    pub fn is_subset(&self, other: &BTreeSet<SentenceId>) -> bool {
        self.0.is_subset(other)
    }

    pub fn raw(&self) -> Vec<u32> {
        self.0.iter().map(|i| i.0).collect()
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<SentenceId> for Diagnosis {
    fn from_iter<T: IntoIterator<Item = SentenceId>>(iter: T) -> Self {
        Diagnosis(iter.into_iter().collect())
    }
}

/// A non-empty set of sentences posed to the oracle.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query(KbView);

impl Query {
    pub fn new(sentences: impl IntoIterator<Item = Formula>) -> Result<Self> {
        let set: KbView = sentences.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Precondition("query must not be empty".into()));
        }
        Ok(Query(set))
    }

    pub fn sentences(&self) -> &KbView {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_test_case(&self) -> TestCase {
        TestCase(self.0.clone())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", parts.join("; "))
    }
}

/// The split ⟨D+, D−, D0⟩ of a set of leading diagnoses induced by a
/// sentence set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPartition {
    pub dplus: BTreeSet<Diagnosis>,
    pub dminus: BTreeSet<Diagnosis>,
    pub dzero: BTreeSet<Diagnosis>,
}

impl QPartition {
    /// The q-partition with `dplus` given and every other leading diagnosis in D−.
    pub fn from_dplus(leading: &[Diagnosis], dplus: impl IntoIterator<Item = Diagnosis>) -> Self {
        let dplus: BTreeSet<Diagnosis> = dplus.into_iter().collect();
        let dminus = leading.iter().filter(|d| !dplus.contains(d)).cloned().collect();
        QPartition {
            dplus,
            dminus,
            dzero: BTreeSet::new(),
        }
    }

    /// Both answer outcomes eliminate at least one diagnosis.
    pub fn is_discriminating(&self) -> bool {
        !self.dplus.is_empty() && !self.dminus.is_empty()
    }

    pub fn union_dplus(&self) -> BTreeSet<SentenceId> {
        union_of(self.dplus.iter())
    }
}

impl fmt::Display for QPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |s: &BTreeSet<Diagnosis>| {
            s.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        };
        write!(f, "<[{}],[{}],[{}]>", cell(&self.dplus), cell(&self.dminus), cell(&self.dzero))
    }
}

/// Union of the id sets of `diags`.
pub fn union_of<'a>(diags: impl IntoIterator<Item = &'a Diagnosis>) -> BTreeSet<SentenceId> {
    diags.into_iter().flat_map(|d| d.ids().iter().copied()).collect()
}

/// Intersection of the id sets of `diags`; empty for an empty input.
pub fn intersection_of<'a>(diags: impl IntoIterator<Item = &'a Diagnosis>) -> BTreeSet<SentenceId> {
    let mut it = diags.into_iter();
    let Some(first) = it.next() else {
        return BTreeSet::new();
    };
    it.fold(first.ids().clone(), |acc, d| acc.intersection(d.ids()).copied().collect())
}

/// A knowledge-base debugging problem ⟨K, B, P, N⟩ under requirements R,
/// with per-sentence fault probabilities and measurement costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Dpi {
    kb: Vec<(SentenceId, Formula)>,
    background: Vec<Formula>,
    positive: Vec<TestCase>,
    negative: Vec<TestCase>,
    requirements: BTreeSet<Requirement>,
    fault_probs: BTreeMap<SentenceId, f64>,
    costs: BTreeMap<SentenceId, f64>,
}

impl Dpi {
    /// Builds a DPI with requirement {consistency}, checking structural
    /// invariants (unique ids, K ∩ B = ∅). Validity is checked separately by
    /// [`Dpi::check_valid`].
    pub fn new(
        kb: Vec<(SentenceId, Formula)>,
        background: Vec<Formula>,
        positive: Vec<TestCase>,
        negative: Vec<TestCase>,
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut sentences = BTreeSet::new();
        for (id, f) in &kb {
            if !ids.insert(*id) {
                return Err(Error::InvalidDpi(format!("duplicate sentence id {id}")));
            }
            if !sentences.insert(f) {
                return Err(Error::InvalidDpi(format!("sentence {f} occurs twice in K")));
            }
        }
        let mut bg = Vec::new();
        for f in background {
            if sentences.contains(&f) {
                return Err(Error::InvalidDpi(format!("sentence {f} occurs in both K and B")));
            }
            if !bg.contains(&f) {
                bg.push(f);
            }
        }
        Ok(Dpi {
            kb,
            background: bg,
            positive,
            negative,
            requirements: [Requirement::Consistency].into_iter().collect(),
            fault_probs: BTreeMap::new(),
            costs: BTreeMap::new(),
        })
    }

    /// Numbers `kb` sentences 1, 2, ... in order.
    pub fn from_sentences(
        kb: Vec<Formula>,
        background: Vec<Formula>,
        positive: Vec<TestCase>,
        negative: Vec<TestCase>,
    ) -> Result<Self> {
        let kb = kb
            .into_iter()
            .enumerate()
            .map(|(i, f)| (SentenceId(i as u32 + 1), f))
            .collect();
        Dpi::new(kb, background, positive, negative)
    }

    pub fn with_requirements(mut self, reqs: BTreeSet<Requirement>) -> Result<Self> {
        if !reqs.contains(&Requirement::Consistency) {
            return Err(Error::Config("requirements must include consistency".into()));
        }
        self.requirements = reqs;
        Ok(self)
    }

    pub fn set_fault_prob(&mut self, id: SentenceId, p: f64) -> Result<()> {
        self.sentence(id)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDpi(format!(
                "fault probability {p} of sentence {id} must lie strictly between 0 and 1"
            )));
        }
        self.fault_probs.insert(id, p);
        Ok(())
    }

    pub fn set_cost(&mut self, id: SentenceId, c: f64) -> Result<()> {
        self.sentence(id)?;
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidDpi(format!("cost {c} of sentence {id} must be non-negative")));
        }
        self.costs.insert(id, c);
        Ok(())
    }

    pub fn kb(&self) -> &[(SentenceId, Formula)] {
        &self.kb
    }

    pub fn ids(&self) -> impl Iterator<Item = SentenceId> + '_ {
        self.kb.iter().map(|(id, _)| *id)
    }

    pub fn id_set(&self) -> BTreeSet<SentenceId> {
        self.ids().collect()
    }

    pub fn background(&self) -> &[Formula] {
        &self.background
    }

    pub fn positive(&self) -> &[TestCase] {
        &self.positive
    }

    pub fn negative(&self) -> &[TestCase] {
        &self.negative
    }

    pub fn requirements(&self) -> &BTreeSet<Requirement> {
        &self.requirements
    }

    pub fn explicit_fault_probs(&self) -> &BTreeMap<SentenceId, f64> {
        &self.fault_probs
    }

    pub fn explicit_costs(&self) -> &BTreeMap<SentenceId, f64> {
        &self.costs
    }

    pub fn fault_prob(&self, id: SentenceId) -> f64 {
        self.fault_probs.get(&id).copied().unwrap_or(DEFAULT_FAULT_PROB)
    }

    pub fn cost(&self, id: SentenceId) -> f64 {
        self.costs.get(&id).copied().unwrap_or(DEFAULT_COST)
    }

    pub fn sentence(&self, id: SentenceId) -> Result<&Formula> {
        self.kb
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, f)| f)
            .ok_or(Error::UnknownSentence(id.0))
    }

    /// The id of a K sentence structurally equal to `f`.
    pub fn id_of(&self, f: &Formula) -> Option<SentenceId> {
        self.kb.iter().find(|(_, g)| g == f).map(|(id, _)| *id)
    }

    pub fn sentences_of<'a>(&self, ids: impl IntoIterator<Item = &'a SentenceId>) -> Result<KbView> {
        ids.into_iter().map(|&id| self.sentence(id).cloned()).collect()
    }

    /// U_P: all sentences occurring in positive test cases.
    pub fn union_positive(&self) -> KbView {
        self.positive.iter().flat_map(|p| p.sentences().iter().cloned()).collect()
    }

    /// Variables of K, B and U_P in order of first occurrence.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (_, f) in &self.kb {
            f.vars_in_order(&mut out);
        }
        for f in &self.background {
            f.vars_in_order(&mut out);
        }
        for p in &self.positive {
            for f in p.sentences() {
                f.vars_in_order(&mut out);
            }
        }
        out
    }

    /// The same problem with `q` added as a positive test case.
    pub fn with_positive(&self, q: TestCase) -> Dpi {
        let mut next = self.clone();
        next.positive.push(q);
        next
    }

    /// The same problem with `q` added as a negative test case.
    pub fn with_negative(&self, q: TestCase) -> Dpi {
        let mut next = self.clone();
        next.negative.push(q);
        next
    }

    fn negative_sets(&self) -> impl Iterator<Item = &KbView> {
        self.negative.iter().map(TestCase::sentences)
    }

    /// True iff `kb` violates R or entails some negative test case.
    pub fn violates(&self, kb: &KbView) -> bool {
        logic::violates(kb, &self.requirements, self.negative_sets())
    }

    /// (K ∖ ids) ∪ B ∪ U_P for an arbitrary id set.
    pub fn kb_without(&self, removed: &BTreeSet<SentenceId>) -> KbView {
        let mut out: KbView = self
            .kb
            .iter()
            .filter(|(id, _)| !removed.contains(id))
            .map(|(_, f)| f.clone())
            .collect();
        out.extend(self.background.iter().cloned());
        out.extend(self.union_positive());
        out
    }

    /// C ∪ B ∪ U_P for a subset C of K.
    pub fn kb_with(&self, kept: &BTreeSet<SentenceId>) -> KbView {
        let mut out: KbView = self
            .kb
            .iter()
            .filter(|(id, _)| kept.contains(id))
            .map(|(_, f)| f.clone())
            .collect();
        out.extend(self.background.iter().cloned());
        out.extend(self.union_positive());
        out
    }

    fn check_ids(&self, d: &Diagnosis) -> Result<()> {
        for id in d.ids() {
            self.sentence(*id)?;
        }
        Ok(())
    }

    /// The solution KB (K ∖ D) ∪ B ∪ U_P.
    pub fn solution_kb(&self, d: &Diagnosis) -> Result<KbView> {
        self.check_ids(d)?;
        Ok(self.kb_without(d.ids()))
    }

    /// True iff removing `d` from K yields a solution KB.
    pub fn is_diagnosis(&self, d: &Diagnosis) -> Result<bool> {
        Ok(!self.violates(&self.solution_kb(d)?))
    }

    /// A diagnosis exists iff B ∪ U_P meets R and entails no negative test case.
    pub fn check_valid(&self) -> Result<()> {
        let mut base: KbView = self.background.iter().cloned().collect();
        base.extend(self.union_positive());
        if self.violates(&base) {
            return Err(Error::InvalidDpi(
                "no diagnosis exists: background and positive test cases violate the requirements or a negative test case".into(),
            ));
        }
        Ok(())
    }

    /// The q-partition that `x` induces on `leading`.
    pub fn partition(&self, leading: &[Diagnosis], x: &KbView) -> Result<QPartition> {
        let mut qp = QPartition::default();
        for d in leading {
            let kb = self.solution_kb(d)?;
            if logic::entails(&kb, x) {
                qp.dplus.insert(d.clone());
                continue;
            }
            let mut extended = kb;
            extended.extend(x.iter().cloned());
            if self.violates(&extended) {
                qp.dminus.insert(d.clone());
            } else {
                qp.dzero.insert(d.clone());
            }
        }
        Ok(qp)
    }

    /// True iff `x` is non-empty and both D+ and D− of its partition are non-empty.
    pub fn is_query(&self, leading: &[Diagnosis], x: &KbView) -> Result<bool> {
        if x.is_empty() {
            return Ok(false);
        }
        Ok(self.partition(leading, x)?.is_discriminating())
    }
}
