//! Propositional formulas, their text syntax and the reasoning backend.

mod formula;
mod parser;
pub mod sat;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use formula::{conjunction, Formula};
pub use parser::parse;
use sat::{Cnf, Lit};

use crate::error::{Error, Result};

/// A duplicate-free set of sentences, ordered structurally.
pub type KbView = BTreeSet<Formula>;

/// A knowledge base encoded once, so that many entailment questions can be
/// asked against it without re-encoding.
#[derive(Clone, Debug)]
pub struct KbSolver {
    cnf: Cnf,
}

impl KbSolver {
    pub fn new<'a>(kb: impl IntoIterator<Item = &'a Formula>) -> Self {
        Self::with_vocabulary(kb, std::iter::empty::<&str>())
    }

    /// Like [`KbSolver::new`], additionally registering `extra` variable names
    /// that may appear in later questions.
    pub fn with_vocabulary<'a, 'b>(
        kb: impl IntoIterator<Item = &'a Formula>,
        extra: impl IntoIterator<Item = &'b str>,
    ) -> Self {
        let kb: Vec<&Formula> = kb.into_iter().collect();
        let mut names: BTreeSet<String> = extra.into_iter().map(str::to_string).collect();
        for f in &kb {
            names.extend(f.vars());
        }
        let mut cnf = Cnf::with_vars(names);
        for f in kb {
            cnf.assert_formula(f);
        }
        KbSolver { cnf }
    }

    pub fn is_consistent(&self) -> bool {
        sat::solve(self.cnf.num_vars(), &self.cnf.clauses, &[])
    }

    /// `kb ⊨ ∧goal`.
    pub fn entails<'a>(&self, goal: impl IntoIterator<Item = &'a Formula>) -> bool {
        let goal: Vec<Formula> = goal.into_iter().cloned().collect();
        if goal.is_empty() {
            return true;
        }
        // literal conjunctions go in as assumptions; everything else is encoded
        if let Some(lits) = self.literal_goal(&goal) {
            return lits
                .into_iter()
                .all(|l| !sat::solve(self.cnf.num_vars(), &self.cnf.clauses, &[l.negate()]));
        }
        let mut cnf = self.cnf.clone();
        cnf.assert_negated(&Formula::and(goal));
        !sat::solve(cnf.num_vars(), &cnf.clauses, &[])
    }

    /// Entailment of the implication `premise -> conclusion` between two
    /// literals, answered with assumptions only.
    pub fn entails_implication(&self, premise: (&str, bool), conclusion: (&str, bool)) -> bool {
        let (Some(a), Some(b)) = (self.lit(premise), self.lit(conclusion)) else {
            let f = Formula::implies(
                Formula::literal(premise.0, premise.1),
                Formula::literal(conclusion.0, conclusion.1),
            );
            return self.entails([&f]);
        };
        !sat::solve(self.cnf.num_vars(), &self.cnf.clauses, &[a, b.negate()])
    }

    fn lit(&self, (name, positive): (&str, bool)) -> Option<Lit> {
        self.cnf.var_index(name).map(|var| Lit { var, positive })
    }

    fn literal_goal(&self, goal: &[Formula]) -> Option<Vec<Lit>> {
        goal.iter()
            .map(|g| g.as_literal().and_then(|l| self.lit(l)))
            .collect()
    }
}

/// True iff the conjunction of `kb` is satisfiable.
pub fn is_consistent<'a>(kb: impl IntoIterator<Item = &'a Formula>) -> bool {
    KbSolver::new(kb).is_consistent()
}

/// True iff `kb` entails the conjunction of `goal`. An empty goal is always entailed.
pub fn entails<'a, 'b>(
    kb: impl IntoIterator<Item = &'a Formula>,
    goal: impl IntoIterator<Item = &'b Formula>,
) -> bool {
    let goal: Vec<&Formula> = goal.into_iter().collect();
    let extra: Vec<String> = goal.iter().flat_map(|g| g.vars()).collect();
    KbSolver::with_vocabulary(kb, extra.iter().map(String::as_str)).entails(goal)
}

/// A logical requirement a repaired knowledge base must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Consistency,
}

impl FromStr for Requirement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "consistency" => Ok(Requirement::Consistency),
            other => Err(Error::Config(format!("unsupported requirement {other:?}"))),
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Consistency => f.write_str("consistency"),
        }
    }
}

/// True iff `kb` breaks one of `requirements` or entails one of the
/// `negatives` (each read as the conjunction of its sentences).
pub fn violates<'a, 'b>(
    kb: impl IntoIterator<Item = &'a Formula>,
    requirements: &BTreeSet<Requirement>,
    negatives: impl IntoIterator<Item = &'b KbView>,
) -> bool {
    let negatives: Vec<&KbView> = negatives.into_iter().collect();
    let extra: Vec<String> = negatives
        .iter()
        .flat_map(|n| n.iter().flat_map(|f| f.vars()))
        .collect();
    let solver = KbSolver::with_vocabulary(kb, extra.iter().map(String::as_str));
    // consistency is the only requirement and is implied by every other check
    let consistent = solver.is_consistent();
    if requirements.contains(&Requirement::Consistency) && !consistent {
        return true;
    }
    negatives.into_iter().any(|n| solver.entails(n))
}
