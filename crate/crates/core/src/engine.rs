//! The interactive loop: leading diagnoses, goal check, query, answer,
//! update, until the diagnostic goal holds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::diagnosis::{diagnosis_prob, hs_tree, LeadingDiagnoses};
use crate::dpi::{Diagnosis, Dpi, QPartition, Query, TestCase};
use crate::error::{Error, Result};
use crate::logic::{entails, Formula, KbView};
use crate::qpartition::{p_true, search_optimal_qp, QsmConfig, SearchOutcome};
use crate::query_cost::{optimal_query_for_qp, Qcm};
use crate::query_enhance::{enhanced_query, EntailmentFilter};

pub const DEFAULT_N_LEADING: usize = 10;
const MAX_ITERATIONS: usize = 10_000;

/// When to stop asking.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Goal {
    /// Only one minimal diagnosis is left.
    #[default]
    Single,
    /// The best diagnosis has at least this probability.
    Threshold(f64),
    /// The best diagnosis is at least this many times as probable as the runner-up.
    Ratio(f64),
}

impl Goal {
    pub fn validate(self) -> Result<Self> {
        match self {
            Goal::Threshold(t) if !(t > 0.0 && t <= 1.0) => {
                Err(Error::Config(format!("probability threshold {t} must lie in (0, 1]")))
            }
            Goal::Ratio(k) if !(k >= 1.0 && k.is_finite()) => {
                Err(Error::Config(format!("probability ratio {k} must be at least 1")))
            }
            g => Ok(g),
        }
    }

    pub fn met(&self, leading: &LeadingDiagnoses) -> bool {
        let e = leading.entries();
        if e.len() <= 1 {
            return true;
        }
        match *self {
            Goal::Single => false,
            Goal::Threshold(t) => e[0].1 >= t,
            Goal::Ratio(k) => e[0].1 >= k * e[1].1,
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Single => f.write_str("single"),
            Goal::Threshold(t) => write!(f, "threshold:{t}"),
            Goal::Ratio(k) => write!(f, "ratio:{k}"),
        }
    }
}

impl FromStr for Goal {
    type Err = Error;

    /// `single`, `threshold:<p>` or `ratio:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown goal {s:?}"));
        let goal = match s.split_once(':') {
            None if s == "single" => Goal::Single,
            Some(("threshold", v)) => Goal::Threshold(v.parse().map_err(|_| bad())?),
            Some(("ratio", v)) => Goal::Ratio(v.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        goal.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub n_leading: usize,
    pub qsm: QsmConfig,
    pub qcm: Qcm,
    /// Enrich queries with implicit entailments before minimizing them.
    pub enhance: bool,
    pub goal: Goal,
    pub filter: EntailmentFilter,
    pub time_budget: Option<Duration>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            n_leading: DEFAULT_N_LEADING,
            qsm: QsmConfig::default(),
            qcm: Qcm::default(),
            enhance: false,
            goal: Goal::Single,
            filter: EntailmentFilter::default(),
            time_budget: None,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_leading < 2 {
            return Err(Error::Config("at least two leading diagnoses are needed".into()));
        }
        self.goal.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    True,
    False,
    Skip,
}

impl FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true" | "yes" => Ok(Answer::True),
            "false" | "no" => Ok(Answer::False),
            "skip" => Ok(Answer::Skip),
            other => Err(Error::Session(format!("unknown answer {other:?}"))),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::True => "true",
            Answer::False => "false",
            Answer::Skip => "skip",
        })
    }
}

/// A computed query together with the partition it induces.
#[derive(Clone, Debug)]
pub struct PlannedQuery {
    pub query: Query,
    pub qp: QPartition,
    pub value: f64,
    pub p_true: f64,
    pub search: SearchOutcome,
}

/// Best canonical q-partition (avoiding `excluded`), then the cheapest or
/// enhanced query for it.
pub fn calc_query(
    dpi: &Dpi,
    leading: &LeadingDiagnoses,
    config: &SessionConfig,
    excluded: &[QPartition],
) -> Result<PlannedQuery> {
    let search = search_optimal_qp(leading, config.qsm, excluded)?;
    let diags = leading.diagnoses();
    let enhanced = if config.enhance {
        enhanced_query(dpi, &diags, &search.qp, &config.filter)?
    } else {
        None
    };
    let query = match enhanced {
        Some(q) => q,
        None => optimal_query_for_qp(dpi, &search.qp, config.qcm)?.query,
    };
    Ok(PlannedQuery {
        query,
        qp: search.qp.clone(),
        value: search.value,
        p_true: p_true(&search.qp, leading),
        search,
    })
}

/// (p_true, p_false) of a q-partition under `probs`.
pub fn answer_probability(qp: &QPartition, probs: &LeadingDiagnoses) -> (f64, f64) {
    let t = p_true(qp, probs);
    (t, 1.0 - t)
}

#[derive(Clone, Debug)]
pub struct Pending {
    pub iteration: usize,
    pub query: Query,
    pub qp: QPartition,
    pub p_true: f64,
    pub value: f64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub leading: Vec<(Diagnosis, f64)>,
    pub query: Query,
    pub qp: QPartition,
    pub answer: Answer,
    pub p_true: f64,
    pub extra: Vec<Formula>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Running,
    Done(Diagnosis),
}

/// A diagnosis session over an evolving DPI.
#[derive(Clone, Debug)]
pub struct Session {
    original: Dpi,
    dpi: Dpi,
    config: SessionConfig,
    weights: BTreeMap<Diagnosis, f64>,
    leading: LeadingDiagnoses,
    pending: Option<Pending>,
    skipped: Vec<QPartition>,
    history: Vec<HistoryEntry>,
    status: Status,
    iteration: usize,
}

impl Session {
    pub fn new(dpi: Dpi, config: SessionConfig) -> Result<Session> {
        config.validate()?;
        dpi.check_valid()?;
        let leading = hs_tree(&dpi, config.n_leading, config.time_budget)?;
        let weights = leading
            .entries()
            .iter()
            .map(|(d, _)| (d.clone(), diagnosis_prob(&dpi, d)))
            .collect();
        Self::start(dpi, config, weights)
    }

    /// Starts from given leading diagnoses and (unnormalized) weights
    /// instead of computing them.
    pub fn with_leading(dpi: Dpi, config: SessionConfig, leading: LeadingDiagnoses) -> Result<Session> {
        config.validate()?;
        dpi.check_valid()?;
        let weights = leading.entries().iter().cloned().collect();
        Self::start(dpi, config, weights)
    }

    fn start(dpi: Dpi, config: SessionConfig, weights: BTreeMap<Diagnosis, f64>) -> Result<Session> {
        let mut s = Session {
            original: dpi.clone(),
            dpi,
            config,
            leading: LeadingDiagnoses::from_weights(weights.clone()),
            weights,
            pending: None,
            skipped: Vec::new(),
            history: Vec::new(),
            status: Status::Running,
            iteration: 0,
        };
        s.advance()?;
        Ok(s)
    }

    fn advance(&mut self) -> Result<()> {
        if self.config.goal.met(&self.leading) {
            let best = self.leading.best().map(|(d, _)| d.clone()).unwrap_or_default();
            self.status = Status::Done(best);
            self.pending = None;
            return Ok(());
        }
        let started = Instant::now();
        let planned = match calc_query(&self.dpi, &self.leading, &self.config, &self.skipped) {
            Ok(p) => p,
            Err(Error::Precondition(_)) if !self.skipped.is_empty() => {
                // every alternative was skipped: start over
                self.skipped.clear();
                calc_query(&self.dpi, &self.leading, &self.config, &[])?
            }
            Err(e) => return Err(e),
        };
        self.iteration += 1;
        self.pending = Some(Pending {
            iteration: self.iteration,
            query: planned.query,
            qp: planned.qp,
            p_true: planned.p_true,
            value: planned.value,
            elapsed: started.elapsed(),
        });
        Ok(())
    }

    pub fn step(&mut self, answer: Answer) -> Result<()> {
        self.step_with(answer, Vec::new())
    }

    /// Applies an answer; `extra` sentences volunteered by the oracle are
    /// added as one more positive test case. On error the session is unchanged.
    pub fn step_with(&mut self, answer: Answer, extra: Vec<Formula>) -> Result<()> {
        if let Status::Done(_) = self.status {
            return Err(Error::Session("the session is finished".into()));
        }
        let pending = self
            .pending
            .clone()
            .ok_or_else(|| Error::Session("no pending query".into()))?;
        let mut next = self.clone();
        next.history.push(HistoryEntry {
            iteration: pending.iteration,
            leading: self.leading.entries().to_vec(),
            query: pending.query.clone(),
            qp: pending.qp.clone(),
            answer,
            p_true: pending.p_true,
            extra: extra.clone(),
            elapsed: pending.elapsed,
        });
        match answer {
            Answer::Skip => next.skipped.push(pending.qp.clone()),
            Answer::True | Answer::False => {
                let positive = answer == Answer::True;
                let tc = pending.query.to_test_case();
                next.dpi = if positive {
                    next.dpi.with_positive(tc)
                } else {
                    next.dpi.with_negative(tc)
                };
                let (keep, drop) = if positive {
                    (&pending.qp.dplus, &pending.qp.dminus)
                } else {
                    (&pending.qp.dminus, &pending.qp.dplus)
                };
                next.weights.retain(|d, _| !drop.contains(d));
                for (d, w) in next.weights.iter_mut() {
                    if !keep.contains(d) {
                        *w *= 0.5;
                    }
                }
                next.skipped.clear();
            }
        }
        if !extra.is_empty() {
            next.dpi = next.dpi.with_positive(TestCase::new(extra)?);
        }
        if answer != Answer::Skip || next.dpi != self.dpi {
            next.dpi
                .check_valid()
                .map_err(|_| Error::Session("the answers contradict each other: no diagnosis is left".into()))?;
            next.refresh_leading()?;
        }
        next.advance()?;
        *self = next;
        Ok(())
    }

    /// Survivors keep their weights; fresh diagnoses enter with their prior.
    fn refresh_leading(&mut self) -> Result<()> {
        let fresh = hs_tree(&self.dpi, self.config.n_leading, self.config.time_budget)?;
        let fresh_set: Vec<Diagnosis> = fresh.diagnoses();
        self.weights.retain(|d, _| self.dpi.is_diagnosis(d).unwrap_or(false));
        for d in fresh_set {
            let prior = diagnosis_prob(&self.dpi, &d);
            self.weights.entry(d).or_insert(prior);
        }
        let mut ranked: Vec<(Diagnosis, f64)> = self.weights.iter().map(|(d, w)| (d.clone(), *w)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(self.config.n_leading);
        self.weights = ranked.into_iter().collect();
        self.leading = LeadingDiagnoses::from_weights(self.weights.clone());
        Ok(())
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn original_dpi(&self) -> &Dpi {
        &self.original
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn leading(&self) -> &LeadingDiagnoses {
        &self.leading
    }

    pub fn pending(&self) -> Option<&Pending> {
        self.pending.as_ref()
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn diagnosis(&self) -> Option<&Diagnosis> {
        match &self.status {
            Status::Done(d) => Some(d),
            Status::Running => None,
        }
    }

    /// Number of true/false answers given so far.
    pub fn answered(&self) -> usize {
        self.history.iter().filter(|h| h.answer != Answer::Skip).count()
    }

    fn sentence_json(&self, f: &Formula) -> Value {
        let cost = self.original.id_of(f).map(|id| self.original.cost(id));
        json!({ "text": f.to_string(), "cost": cost })
    }

    fn leading_json(&self, entries: &[(Diagnosis, f64)]) -> Value {
        entries
            .iter()
            .map(|(d, p)| {
                let texts: Vec<String> = d
                    .ids()
                    .iter()
                    .filter_map(|&id| self.original.sentence(id).ok())
                    .map(|f| f.to_string())
                    .collect();
                json!({ "ids": d.raw(), "sentences": texts, "probability": round6(*p) })
            })
            .collect()
    }

    fn history_json(&self, h: &HistoryEntry) -> Value {
        json!({
            "iteration": h.iteration,
            "leading": self.leading_json(&h.leading),
            "query": h.query.sentences().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "qpartition": qp_json(&h.qp),
            "answer": h.answer.to_string(),
            "p_true": round6(h.p_true),
            "extra": h.extra.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "timings": { "query_ms": round6(h.elapsed.as_secs_f64() * 1e3) },
        })
    }

    /// The full state, as served to oracles.
    pub fn state_json(&self) -> Value {
        let pending = self.pending.as_ref().map(|p| {
            json!({
                "iteration": p.iteration,
                "query": p.query.sentences().iter().map(|f| self.sentence_json(f)).collect::<Vec<_>>(),
                "p_true": round6(p.p_true),
                "p_false": round6(1.0 - p.p_true),
                "measure": round6(p.value),
                "qpartition": qp_json(&p.qp),
            })
        });
        let (status, diagnosis) = match &self.status {
            Status::Running => ("running", Value::Null),
            Status::Done(d) => ("done", json!(d.raw())),
        };
        json!({
            "status": status,
            "diagnosis": diagnosis,
            "leading": self.leading_json(self.leading.entries()),
            "pending": pending,
            "history": self.history.iter().map(|h| self.history_json(h)).collect::<Vec<_>>(),
        })
    }

    /// One object per posed query.
    pub fn transcript_json(&self) -> Value {
        Value::Array(self.history.iter().map(|h| self.history_json(h)).collect())
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn qp_json(qp: &QPartition) -> Value {
    let cell = |s: &std::collections::BTreeSet<Diagnosis>| s.iter().map(Diagnosis::raw).collect::<Vec<_>>();
    json!({ "dplus": cell(&qp.dplus), "dminus": cell(&qp.dminus), "dzero": cell(&qp.dzero) })
}

/// Answers queries by entailment from a reference KB.
#[derive(Clone, Debug)]
pub enum Oracle {
    /// The intended KB itself.
    Reference(KbView),
    /// The solution KB of this diagnosis w.r.t. the session's original DPI.
    Target(Diagnosis),
}

impl Oracle {
    pub fn answer(&self, original: &Dpi, q: &Query) -> Result<bool> {
        Ok(match self {
            Oracle::Reference(kb) => entails(kb, q.sentences()),
            Oracle::Target(d) => entails(&original.solution_kb(d)?, q.sentences()),
        })
    }
}

/// Runs a session against a simulated oracle until the goal holds.
pub fn run(dpi: Dpi, oracle: &Oracle, config: SessionConfig) -> Result<Session> {
    let mut session = Session::new(dpi, config)?;
    for _ in 0..MAX_ITERATIONS {
        let Some(p) = session.pending() else {
            return Ok(session);
        };
        let yes = oracle.answer(session.original_dpi(), &p.query)?;
        session.step(if yes { Answer::True } else { Answer::False })?;
    }
    Err(Error::Session(format!("no result after {MAX_ITERATIONS} queries")))
}
