//! Tseitin CNF encoding and a DPLL satisfiability procedure.
//!
//! Variables are numbered so that named variables come first in
//! lexicographic order, followed by auxiliary definition variables. The
//! solver always branches on the lowest-numbered open variable, positive
//! phase first, which makes every run reproducible.

use std::collections::BTreeMap;

use super::formula::Formula;

/// A literal: variable index (0-based) and polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Lit { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Lit { var, positive: false }
    }

    pub fn negate(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

pub type Clause = Vec<Lit>;

/// Clause database plus the name table for the original variables.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    names: BTreeMap<String, usize>,
    num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    /// Creates an empty database whose named variables are exactly `names`
    /// (deduplicated and sorted).
    pub fn with_vars<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut sorted: Vec<String> = names.into_iter().map(Into::into).collect();
        sorted.sort();
        sorted.dedup();
        let names: BTreeMap<String, usize> =
            sorted.into_iter().enumerate().map(|(i, n)| (n, i)).collect();
        Cnf {
            num_vars: names.len(),
            names,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    fn fresh(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    fn var_of(&mut self, name: &str) -> usize {
        if let Some(&i) = self.names.get(name) {
            return i;
        }
        // late variables are appended after the original block
        let i = self.fresh();
        self.names.insert(name.to_string(), i);
        i
    }

    /// Asserts `f` (adds clauses forcing it true).
    pub fn assert_formula(&mut self, f: &Formula) {
        match f {
            Formula::True => {}
            Formula::False => self.clauses.push(Vec::new()),
            Formula::And(fs) => fs.iter().for_each(|g| self.assert_formula(g)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Or(fs) => fs.iter().for_each(|g| self.assert_negated(g)),
                Formula::Not(g) => self.assert_formula(g),
                Formula::Implies(a, b) => {
                    self.assert_formula(a);
                    self.assert_negated(b);
                }
                _ => {
                    let l = self.encode(f);
                    self.clauses.push(vec![l]);
                }
            },
            Formula::Or(fs) => {
                let clause = fs.iter().map(|g| self.encode(g)).collect();
                self.clauses.push(clause);
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                self.clauses.push(vec![la.negate(), lb]);
            }
            _ => {
                let l = self.encode(f);
                self.clauses.push(vec![l]);
            }
        }
    }

    /// Asserts `!f`. Negations are pushed inward before encoding.
    pub fn assert_negated(&mut self, f: &Formula) {
        self.assert_formula(&negation_normal(f, true));
    }

    /// Returns a literal equivalent to `f` under the added definitions.
    pub fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Var(v) => Lit::pos(self.var_of(v)),
            Formula::Not(inner) => self.encode(inner).negate(),
            Formula::True | Formula::False => {
                let t = self.fresh();
                self.clauses.push(vec![Lit::pos(t)]);
                if matches!(f, Formula::True) {
                    Lit::pos(t)
                } else {
                    Lit::neg(t)
                }
            }
            Formula::And(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| self.encode(g)).collect();
                let x = Lit::pos(self.fresh());
                for &l in &ls {
                    self.clauses.push(vec![x.negate(), l]);
                }
                let mut back: Clause = ls.iter().map(|l| l.negate()).collect();
                back.push(x);
                self.clauses.push(back);
                x
            }
            Formula::Or(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| self.encode(g)).collect();
                let x = Lit::pos(self.fresh());
                for &l in &ls {
                    self.clauses.push(vec![l.negate(), x]);
                }
                let mut fwd = ls.clone();
                fwd.push(x.negate());
                self.clauses.push(fwd);
                x
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let x = Lit::pos(self.fresh());
                self.clauses.push(vec![x.negate(), la.negate(), lb]);
                self.clauses.push(vec![la, x]);
                self.clauses.push(vec![lb.negate(), x]);
                x
            }
            Formula::Iff(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let x = Lit::pos(self.fresh());
                self.clauses.push(vec![x.negate(), la.negate(), lb]);
                self.clauses.push(vec![x.negate(), la, lb.negate()]);
                self.clauses.push(vec![x, la, lb]);
                self.clauses.push(vec![x, la.negate(), lb.negate()]);
                x
            }
        }
    }
}

/// Negation normal form of `f` (or of `!f` when `negate`), keeping `<->`
/// as an opaque node that the encoder handles.
pub fn negation_normal(f: &Formula, negate: bool) -> Formula {
    match (f, negate) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Var(_), false) => f.clone(),
        (Formula::Var(_), true) => Formula::not(f.clone()),
        (Formula::Not(g), n) => negation_normal(g, !n),
        (Formula::And(fs), false) => Formula::and(fs.iter().map(|g| negation_normal(g, false)).collect()),
        (Formula::And(fs), true) => Formula::or(fs.iter().map(|g| negation_normal(g, true)).collect()),
        (Formula::Or(fs), false) => Formula::or(fs.iter().map(|g| negation_normal(g, false)).collect()),
        (Formula::Or(fs), true) => Formula::and(fs.iter().map(|g| negation_normal(g, true)).collect()),
        (Formula::Implies(a, b), false) => {
            Formula::or(vec![negation_normal(a, true), negation_normal(b, false)])
        }
        (Formula::Implies(a, b), true) => {
            Formula::and(vec![negation_normal(a, false), negation_normal(b, true)])
        }
        (Formula::Iff(a, b), false) => Formula::iff(negation_normal(a, false), negation_normal(b, false)),
        (Formula::Iff(a, b), true) => Formula::iff(negation_normal(a, false), negation_normal(b, true)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Val {
    Unset,
    True,
    False,
}

fn lit_value(assign: &[Val], l: Lit) -> Val {
    match (assign[l.var], l.positive) {
        (Val::Unset, _) => Val::Unset,
        (Val::True, true) | (Val::False, false) => Val::True,
        _ => Val::False,
    }
}

fn set(assign: &mut [Val], l: Lit) {
    assign[l.var] = if l.positive { Val::True } else { Val::False };
}

/// Decides satisfiability of `clauses` over `num_vars` variables under the
/// given assumption literals.
pub fn solve(num_vars: usize, clauses: &[Clause], assumptions: &[Lit]) -> bool {
    let mut assign = vec![Val::Unset; num_vars];
    for &a in assumptions {
        match lit_value(&assign, a) {
            Val::False => return false,
            Val::Unset => set(&mut assign, a),
            Val::True => {}
        }
    }
    dpll(clauses, &mut assign)
}

fn dpll(clauses: &[Clause], assign: &mut Vec<Val>) -> bool {
    // unit propagation and pure literal elimination to a fixpoint
    loop {
        let mut changed = false;
        let mut open = false;
        for clause in clauses {
            let mut unset = None;
            let mut n_unset = 0;
            let mut sat = false;
            for &l in clause {
                match lit_value(assign, l) {
                    Val::True => {
                        sat = true;
                        break;
                    }
                    Val::Unset => {
                        n_unset += 1;
                        unset = Some(l);
                    }
                    Val::False => {}
                }
            }
            if sat {
                continue;
            }
            match n_unset {
                0 => return false,
                1 => {
                    set(assign, unset.unwrap());
                    changed = true;
                }
                _ => open = true,
            }
        }
        if changed {
            continue;
        }
        if !open {
            return true;
        }
        // polarity bits per variable among unsatisfied clauses: 1 = pos, 2 = neg
        let mut polarity = vec![0u8; assign.len()];
        for clause in clauses {
            if clause.iter().any(|&l| lit_value(assign, l) == Val::True) {
                continue;
            }
            for &l in clause {
                if assign[l.var] == Val::Unset {
                    polarity[l.var] |= if l.positive { 1 } else { 2 };
                }
            }
        }
        let mut pure = false;
        for (v, &p) in polarity.iter().enumerate() {
            if p == 1 || p == 2 {
                set(assign, Lit { var: v, positive: p == 1 });
                pure = true;
            }
        }
        if pure {
            continue;
        }
        let branch = polarity.iter().position(|&p| p != 0);
        let Some(var) = branch else {
            return true;
        };
        let saved = assign.clone();
        set(assign, Lit::pos(var));
        if dpll(clauses, assign) {
            return true;
        }
        *assign = saved;
        set(assign, Lit::neg(var));
        return dpll(clauses, assign);
    }
}
