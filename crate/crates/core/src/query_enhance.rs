//! Query enhancement: enrich a canonical query with simple implicit
//! entailments (literals and variable-to-literal implications), then shrink
//! it back to a ⊆-minimal, preference-optimal query with the same
//! q-partition.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::dpi::{Diagnosis, Dpi, QPartition, Query, SentenceId};
use crate::error::{Error, Result};
use crate::logic::{Formula, KbSolver, KbView};
use crate::qpartition::canonical_query_ids;
use crate::quickxplain::quickxplain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntailmentKind {
    Literal,
    Implication,
}

impl FromStr for EntailmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "literals" | "literal" => Ok(EntailmentKind::Literal),
            "implications" | "implication" => Ok(EntailmentKind::Implication),
            other => Err(Error::Config(format!("unknown entailment type {other:?}"))),
        }
    }
}

impl fmt::Display for EntailmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntailmentKind::Literal => "literals",
            EntailmentKind::Implication => "implications",
        })
    }
}

/// Which entailments to look for, over which variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntailmentFilter {
    pub kinds: BTreeSet<EntailmentKind>,
    /// Defaults to the variables of K, B and U_P.
    pub vocabulary: Option<Vec<String>>,
    /// Upper bound on the number of expansion sentences kept.
    pub max_expansion: Option<usize>,
}

impl Default for EntailmentFilter {
    fn default() -> Self {
        EntailmentFilter {
            kinds: [EntailmentKind::Literal, EntailmentKind::Implication].into(),
            vocabulary: None,
            max_expansion: None,
        }
    }
}

impl EntailmentFilter {
    /// Parses a comma-separated kind list such as `literals,implications`.
    pub fn parse_kinds(s: &str) -> Result<Self> {
        let kinds = s.split(',').map(str::parse).collect::<Result<BTreeSet<_>>>()?;
        Ok(EntailmentFilter {
            kinds,
            ..Self::default()
        })
    }
}

/// One pool member, kept in structured form so it can be tested with assumptions.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Candidate {
    Lit(String, bool),
    Imp(String, String, bool),
}

impl Candidate {
    fn formula(&self) -> Formula {
        match self {
            Candidate::Lit(v, pos) => Formula::literal(v, *pos),
            Candidate::Imp(v, w, pos) => Formula::implies(Formula::var(v), Formula::literal(w, *pos)),
        }
    }
}

fn pool(vocabulary: &[String], kinds: &BTreeSet<EntailmentKind>) -> Vec<Candidate> {
    let mut out = Vec::new();
    if kinds.contains(&EntailmentKind::Literal) {
        for v in vocabulary {
            out.push(Candidate::Lit(v.clone(), true));
            out.push(Candidate::Lit(v.clone(), false));
        }
    }
    if kinds.contains(&EntailmentKind::Implication) {
        for v in vocabulary {
            for w in vocabulary.iter().filter(|w| *w != v) {
                out.push(Candidate::Imp(v.clone(), w.clone(), true));
                out.push(Candidate::Imp(v.clone(), w.clone(), false));
            }
        }
    }
    out
}

/// The candidate formulas for `vocabulary`: all literals (positive before
/// negative, in vocabulary order), then all implications `v -> l` with
/// `l` a literal over a different variable.
pub fn candidate_pool(vocabulary: &[String], kinds: &BTreeSet<EntailmentKind>) -> Vec<Formula> {
    pool(vocabulary, kinds).iter().map(Candidate::formula).collect()
}

fn entailed(solver: &KbSolver, c: &Candidate) -> bool {
    match c {
        Candidate::Lit(v, pos) => solver.entails([&Formula::literal(v, *pos)]),
        Candidate::Imp(v, w, pos) => solver.entails_implication((v, true), (w, *pos)),
    }
}

fn ent_et_candidates(kb: &KbView, vocabulary: &[String], kinds: &BTreeSet<EntailmentKind>) -> Result<Vec<Candidate>> {
    let solver = KbSolver::with_vocabulary(kb, vocabulary.iter().map(String::as_str));
    if !solver.is_consistent() {
        return Err(Error::Precondition("an inconsistent KB entails every candidate".into()));
    }
    Ok(pool(vocabulary, kinds).into_iter().filter(|c| entailed(&solver, c)).collect())
}

/// Pool members entailed by `kb`, in pool order.
pub fn ent_et(kb: &KbView, vocabulary: &[String], kinds: &BTreeSet<EntailmentKind>) -> Result<Vec<Formula>> {
    Ok(ent_et_candidates(kb, vocabulary, kinds)?.iter().map(Candidate::formula).collect())
}

#[derive(Clone, Debug)]
pub struct Expansion {
    /// The canonical query of D+, as sentence ids of K.
    pub canonical_ids: BTreeSet<SentenceId>,
    pub canonical: Query,
    /// New sentences entailed once the canonical query is added, in pool order.
    pub expansion: Vec<Formula>,
}

impl Expansion {
    pub fn expanded_query(&self) -> KbView {
        let mut q = self.canonical.sentences().clone();
        q.extend(self.expansion.iter().cloned());
        q
    }
}

/// Adds to Q_can(D+) every filter-typed sentence that (K∖U_D) ∪ Q_can ∪ B ∪ U_P
/// entails but (K∖U_D) ∪ B ∪ U_P does not, excluding members of K ∪ B ∪ U_P.
pub fn expand_query(dpi: &Dpi, leading: &[Diagnosis], qp: &QPartition, filter: &EntailmentFilter) -> Result<Expansion> {
    if !qp.dzero.is_empty() {
        return Err(Error::Precondition("expansion needs a q-partition with empty D0".into()));
    }
    let u_plus = qp.union_dplus();
    let canonical_ids = canonical_query_ids(leading, &u_plus);
    let canonical = Query::new(dpi.sentences_of(&canonical_ids)?)?;
    let vocabulary = filter.vocabulary.clone().unwrap_or_else(|| dpi.vocabulary());

    let u_all: BTreeSet<SentenceId> = crate::dpi::union_of(leading);
    let with_q = dpi.kb_without(&u_all.difference(&canonical_ids).copied().collect());
    let without_q = dpi.kb_without(&u_all);
    let before = ent_et_candidates(&without_q, &vocabulary, &filter.kinds)?;
    let after = ent_et_candidates(&with_q, &vocabulary, &filter.kinds)?;

    let known: KbView = dpi.kb_without(&BTreeSet::new());
    let mut expansion: Vec<Formula> = after
        .iter()
        .filter(|c| !before.contains(c))
        .map(Candidate::formula)
        .filter(|f| !canonical.sentences().contains(f) && !known.contains(f))
        .collect();
    if let Some(cap) = filter.max_expansion {
        expansion.truncate(cap);
    }
    Ok(Expansion {
        canonical_ids,
        canonical,
        expansion,
    })
}

/// Expansion sentences first (pool order), then the canonical query's
/// sentences by ascending cost and id.
pub fn default_order(dpi: &Dpi, exp: &Expansion) -> Vec<Formula> {
    let mut ids: Vec<SentenceId> = exp.canonical_ids.iter().copied().collect();
    ids.sort_by(|a, b| dpi.cost(*a).total_cmp(&dpi.cost(*b)).then(a.cmp(b)));
    let mut out = exp.expansion.clone();
    out.extend(ids.iter().map(|&id| dpi.sentence(id).expect("canonical ids lie in K").clone()));
    out
}

/// True iff adding `q_sub` to the solution KB of every D− member violates
/// the requirements or a negative test case.
pub fn is_qp_const(dpi: &Dpi, qp: &QPartition, q_sub: &[Formula]) -> Result<bool> {
    for d in &qp.dminus {
        let mut kb = dpi.solution_kb(d)?;
        kb.extend(q_sub.iter().cloned());
        if !dpi.violates(&kb) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct MinimizedQuery {
    pub query: Query,
    /// Verdicts of the partition-preservation checks in call order.
    pub trace: Vec<bool>,
}

/// Shrinks `q_sorted` to a ⊆-minimal subquery with q-partition `qp`,
/// preferring earlier sentences.
pub fn min_q(dpi: &Dpi, qp: &QPartition, q_sorted: &[Formula]) -> Result<MinimizedQuery> {
    let leading: Vec<Diagnosis> = qp.dplus.iter().chain(&qp.dminus).cloned().collect();
    let full: KbView = q_sorted.iter().cloned().collect();
    if full.is_empty() || dpi.partition(&leading, &full)? != *qp {
        return Err(Error::Precondition("the sorted query does not induce the given q-partition".into()));
    }
    let mut trace = Vec::new();
    let mut failure = None;
    let found = quickxplain(q_sorted, |sub| match is_qp_const(dpi, qp, sub) {
        Ok(v) => {
            trace.push(v);
            v
        }
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MinimizedQuery {
        query: Query::new(found)?,
        trace,
    })
}

/// Expands and minimizes; `None` when there is nothing to add, in which
/// case the cost-optimal query should be used instead.
pub fn enhanced_query(
    dpi: &Dpi,
    leading: &[Diagnosis],
    qp: &QPartition,
    filter: &EntailmentFilter,
) -> Result<Option<Query>> {
    let exp = expand_query(dpi, leading, qp, filter)?;
    if exp.expansion.is_empty() {
        return Ok(None);
    }
    let order = default_order(dpi, &exp);
    Ok(Some(min_q(dpi, qp, &order)?.query))
}
