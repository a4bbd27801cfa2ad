//! Brute-force oracles and random instance generators shared by the
//! property suites and the acceptance run.
#![allow(dead_code)]

pub mod suites;

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use seqdiag::{Diagnosis, Dpi, Formula, KbView, QPartition, SentenceId, TestCase};

// ---- truth tables ----

enum Tt {
    Const(bool),
    Var(usize),
    Not(Box<Tt>),
    And(Vec<Tt>),
    Or(Vec<Tt>),
    Implies(Box<Tt>, Box<Tt>),
    Iff(Box<Tt>, Box<Tt>),
}

impl Tt {
    fn eval(&self, a: u32) -> bool {
        match self {
            Tt::Const(b) => *b,
            Tt::Var(i) => a >> i & 1 == 1,
            Tt::Not(f) => !f.eval(a),
            Tt::And(fs) => fs.iter().all(|f| f.eval(a)),
            Tt::Or(fs) => fs.iter().any(|f| f.eval(a)),
            Tt::Implies(l, r) => !l.eval(a) || r.eval(a),
            Tt::Iff(l, r) => l.eval(a) == r.eval(a),
        }
    }
}

struct Table {
    index: HashMap<String, usize>,
}

impl Table {
    fn compile(&mut self, f: &Formula) -> Tt {
        match f {
            Formula::True => Tt::Const(true),
            Formula::False => Tt::Const(false),
            Formula::Var(v) => {
                let n = self.index.len();
                Tt::Var(*self.index.entry(v.clone()).or_insert(n))
            }
            Formula::Not(g) => Tt::Not(Box::new(self.compile(g))),
            Formula::And(gs) => Tt::And(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Or(gs) => Tt::Or(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Implies(l, r) => Tt::Implies(Box::new(self.compile(l)), Box::new(self.compile(r))),
            Formula::Iff(l, r) => Tt::Iff(Box::new(self.compile(l)), Box::new(self.compile(r))),
        }
    }
}

/// Satisfiability of `fs` together with the negated conjunction of `goals`.
fn tt_sat<'a>(fs: impl IntoIterator<Item = &'a Formula>, goals: Option<&[&Formula]>) -> bool {
    let mut t = Table { index: HashMap::new() };
    let mut compiled: Vec<Tt> = fs.into_iter().map(|f| t.compile(f)).collect();
    if let Some(goals) = goals {
        compiled.push(Tt::Not(Box::new(Tt::And(goals.iter().map(|g| t.compile(g)).collect()))));
    }
    let n = t.index.len();
    assert!(n <= 20, "truth table over {n} variables");
    (0..1u32 << n).any(|a| compiled.iter().all(|f| f.eval(a)))
}

pub fn tt_consistent<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> bool {
    tt_sat(fs, None)
}

pub fn tt_entails<'a, 'b>(kb: impl IntoIterator<Item = &'a Formula>, goals: impl IntoIterator<Item = &'b Formula>) -> bool {
    let goals: Vec<&Formula> = goals.into_iter().collect();
    !tt_sat(kb, Some(&goals))
}

/// Inconsistent, or entails some negative test case of `dpi`.
pub fn tt_violates(dpi: &Dpi, kb: &KbView) -> bool {
    !tt_consistent(kb) || dpi.negative().iter().any(|n| tt_entails(kb, n.sentences()))
}

pub fn tt_is_diagnosis(dpi: &Dpi, d: &BTreeSet<SentenceId>) -> bool {
    !tt_violates(dpi, &dpi.kb_without(d))
}

/// Every subset of K whose removal repairs `dpi`.
pub fn tt_all_diagnoses(dpi: &Dpi) -> BTreeSet<BTreeSet<SentenceId>> {
    let ids: Vec<SentenceId> = dpi.ids().collect();
    (0u32..1 << ids.len())
        .map(|m| (0..ids.len()).filter(|i| m >> i & 1 == 1).map(|i| ids[i]).collect::<BTreeSet<_>>())
        .filter(|d| tt_is_diagnosis(dpi, d))
        .collect()
}

pub fn tt_min_diagnoses(dpi: &Dpi) -> Vec<Diagnosis> {
    let all = tt_all_diagnoses(dpi);
    all.iter()
        .filter(|d| !all.iter().any(|o| o != *d && o.is_subset(d)))
        .map(|d| Diagnosis::new(d.iter().copied()))
        .collect()
}

// ---- q-partitions ----

/// Partition of `leading` by `x`, membership decided by truth tables.
pub fn tt_partition(dpi: &Dpi, leading: &[Diagnosis], x: &KbView) -> QPartition {
    let mut qp = QPartition::default();
    for d in leading {
        let kb = dpi.kb_without(d.ids());
        if tt_entails(&kb, x) {
            qp.dplus.insert(d.clone());
        } else {
            let mut ext = kb;
            ext.extend(x.iter().cloned());
            if tt_violates(dpi, &ext) {
                qp.dminus.insert(d.clone());
            } else {
                qp.dzero.insert(d.clone());
            }
        }
    }
    qp
}

fn union(ds: &[&Diagnosis]) -> BTreeSet<SentenceId> {
    ds.iter().flat_map(|d| d.ids().iter().copied()).collect()
}

/// Canonical q-partitions straight from the definition: for every seed S,
/// Q = (U_D ∖ U_S) ∩ Disc; a diagnosis lands in D+ iff it misses Q.
pub fn brute_force_cqps(leading: &[Diagnosis]) -> BTreeSet<QPartition> {
    let n = leading.len();
    let all: Vec<&Diagnosis> = leading.iter().collect();
    let u_all = union(&all);
    let inter: BTreeSet<SentenceId> = u_all
        .iter()
        .copied()
        .filter(|id| leading.iter().all(|d| d.contains(*id)))
        .collect();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) - 1 {
        let seed: Vec<&Diagnosis> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &leading[i]).collect();
        let u_s = union(&seed);
        let q: BTreeSet<SentenceId> = u_all.difference(&u_s).filter(|id| !inter.contains(id)).copied().collect();
        if q.is_empty() {
            continue;
        }
        let dplus: BTreeSet<Diagnosis> = leading.iter().filter(|d| d.ids().is_disjoint(&q)).cloned().collect();
        let seed: BTreeSet<Diagnosis> = seed.into_iter().cloned().collect();
        if dplus == seed {
            out.insert(QPartition {
                dminus: leading.iter().filter(|d| !dplus.contains(d)).cloned().collect(),
                dplus,
                dzero: BTreeSet::new(),
            });
        }
    }
    out
}

pub fn entropy_gap(qp: &QPartition, probs: &[(Diagnosis, f64)]) -> f64 {
    let total: f64 = probs.iter().map(|e| e.1).sum();
    let p: f64 = probs.iter().filter(|e| qp.dplus.contains(&e.0)).map(|e| e.1).sum::<f64>() / total;
    let h = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    1.0 + h(p) + h(1.0 - p)
}

pub fn split_gap(qp: &QPartition) -> f64 {
    (qp.dplus.len() as f64 - qp.dminus.len() as f64).abs() + qp.dzero.len() as f64
}

// ---- generators ----

pub const VARS: [&str; 5] = ["A", "B", "C", "D", "E"];

pub fn random_formula<R: Rng>(rng: &mut R, vars: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let v = Formula::var(*vars.choose(rng).unwrap());
        return if rng.gen_bool(0.4) { Formula::not(v) } else { v };
    }
    let sub = |rng: &mut R| random_formula(rng, vars, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(sub(rng)),
        1 => {
            let k = rng.gen_range(2..=3);
            Formula::and((0..k).map(|_| sub(rng)).collect())
        }
        2 => {
            let k = rng.gen_range(2..=3);
            Formula::or((0..k).map(|_| sub(rng)).collect())
        }
        3 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

fn random_literal<R: Rng>(rng: &mut R, vars: &[&str]) -> Formula {
    Formula::literal(*vars.choose(rng).unwrap(), rng.gen_bool(0.5))
}

/// A valid faulty DPI with 4..=`max_k` sentences over five variables and
/// at least two minimal diagnoses.
pub fn random_dpi<R: Rng>(rng: &mut R, max_k: usize) -> (Dpi, Vec<Diagnosis>) {
    loop {
        let k = rng.gen_range(4..=max_k);
        let kb: Vec<Formula> = (0..k).map(|_| random_formula(rng, &VARS, 2)).collect();
        let background: Vec<Formula> = (0..rng.gen_range(0..=1)).map(|_| random_literal(rng, &VARS)).collect();
        let negative: Vec<TestCase> = (0..rng.gen_range(0..=2))
            .map(|_| TestCase::new((0..rng.gen_range(1..=2)).map(|_| random_literal(rng, &VARS))).unwrap())
            .collect();
        let Ok(dpi) = Dpi::from_sentences(kb, background, vec![], negative) else {
            continue;
        };
        if dpi.check_valid().is_err() || !tt_violates(&dpi, &dpi.kb_without(&BTreeSet::new())) {
            continue;
        }
        let mins = tt_min_diagnoses(&dpi);
        if mins.len() >= 2 {
            return (dpi, mins);
        }
    }
}

/// `n` distinct pairwise ⊆-incomparable non-empty subsets of 1..=`sentences`.
pub fn random_antichain<R: Rng>(rng: &mut R, sentences: u32, n: usize) -> Vec<Diagnosis> {
    let mut out: Vec<BTreeSet<u32>> = Vec::new();
    for _ in 0..1000 {
        if out.len() == n {
            break;
        }
        let size = rng.gen_range(1..=3.min(sentences));
        let mut ids: Vec<u32> = (1..=sentences).collect();
        ids.shuffle(rng);
        let d: BTreeSet<u32> = ids[..size as usize].iter().copied().collect();
        if out.iter().all(|o| !o.is_subset(&d) && !d.is_subset(o)) {
            out.push(d);
        }
    }
    out.into_iter()
        .map(|d| Diagnosis::new(d.into_iter().map(SentenceId)))
        .collect()
}

pub fn random_subset<T: Clone, R: Rng>(rng: &mut R, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}
