//! One randomized instance per call for each invariant family; an `Err`
//! describes the counterexample.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use seqdiag::diagnosis::all_min_diagnoses;
use seqdiag::engine::{Answer, Oracle, Session, SessionConfig};
use seqdiag::logic::{entails, is_consistent};
use seqdiag::qpartition::{enumerate_cqps, explore_all, search_optimal_qp, Measure, QsmConfig};
use seqdiag::query_enhance::{expand_query, min_q, EntailmentFilter};
use seqdiag::{fixtures, Diagnosis, Formula, KbView, LeadingDiagnoses, QPartition};

use super::*;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Partition cells are disjoint, cover the leading diagnoses, and agree
/// with truth-table classification.
pub fn partition_cover<R: Rng>(rng: &mut R) -> Check {
    let (dpi, mins) = random_dpi(rng, 7);
    let mut leading = random_subset(rng, &mins, 0.7);
    if leading.len() < 2 {
        leading = mins.clone();
    }
    let kb: Vec<Formula> = dpi.kb().iter().map(|e| e.1.clone()).collect();
    let mut x: KbView = random_subset(rng, &kb, 0.3).into_iter().collect();
    for _ in 0..rng.gen_range(0..=2) {
        x.insert(random_formula(rng, &VARS, 2));
    }
    if x.is_empty() {
        x.insert(kb[0].clone());
    }
    let qp = dpi.partition(&leading, &x).map_err(|e| e.to_string())?;
    let cells = [&qp.dplus, &qp.dminus, &qp.dzero];
    let total: usize = cells.iter().map(|c| c.len()).sum();
    let covered: BTreeSet<Diagnosis> = cells.iter().flat_map(|c| c.iter().cloned()).collect();
    let want: BTreeSet<Diagnosis> = leading.iter().cloned().collect();
    ensure(total == leading.len() && covered == want, || format!("not a disjoint cover: {qp:?}"))?;
    let oracle = tt_partition(&dpi, &leading, &x);
    ensure(qp == oracle, || format!("{x:?}: got {qp:?}, truth table {oracle:?}"))
}

/// Subsets of K as queries: D0 is empty and D+ is exactly the diagnoses
/// disjoint from the query.
pub fn explicit_entailments<R: Rng>(rng: &mut R) -> Check {
    let exk = fixtures::exk();
    let leading = fixtures::exk_min_diagnoses();
    let ids: Vec<_> = exk.ids().collect();
    let mut x = random_subset(rng, &ids, 0.4);
    if x.is_empty() {
        x.push(*ids.choose(rng).unwrap());
    }
    let xs: BTreeSet<_> = x.iter().copied().collect();
    let q = exk.sentences_of(&xs).map_err(|e| e.to_string())?;
    let qp = exk.partition(&leading, &q).map_err(|e| e.to_string())?;
    ensure(qp.dzero.is_empty(), || format!("{xs:?}: D0 = {:?}", qp.dzero))?;
    for d in &leading {
        let disjoint = d.ids().is_disjoint(&xs);
        ensure(disjoint == qp.dplus.contains(d), || format!("{xs:?}: {d:?} misplaced"))?;
    }
    Ok(())
}

/// Search visits exactly the brute-force canonical q-partitions, once
/// each, and returns an optimum for both measures.
pub fn search_vs_brute_force<R: Rng>(rng: &mut R) -> Check {
    let sentences = rng.gen_range(4..=10);
    let n = rng.gen_range(2..=8);
    let diags = random_antichain(rng, sentences, n);
    if diags.len() < 2 {
        return Ok(());
    }
    let weights: Vec<(Diagnosis, f64)> = diags.iter().map(|d| (d.clone(), rng.gen_range(0.01..1.0))).collect();
    let lead = LeadingDiagnoses::from_weights(weights.clone());
    let oracle = brute_force_cqps(&diags);

    let visited = explore_all(&lead, Measure::Ent);
    let unique: BTreeSet<QPartition> = visited.iter().cloned().collect();
    ensure(unique.len() == visited.len(), || "a q-partition was visited twice".into())?;
    ensure(unique == oracle, || format!("visited {} vs {} canonical", unique.len(), oracle.len()))?;
    let listed: BTreeSet<QPartition> = enumerate_cqps(&diags, 20).map_err(|e| e.to_string())?.into_iter().collect();
    ensure(listed == oracle, || "enumeration differs from brute force".into())?;

    for (measure, score) in [
        (Measure::Ent, &(|qp: &QPartition| entropy_gap(qp, &weights)) as &dyn Fn(&QPartition) -> f64),
        (Measure::Spl, &|qp: &QPartition| split_gap(qp)),
    ] {
        let best = oracle.iter().map(score).fold(f64::INFINITY, f64::min);
        let out = search_optimal_qp(&lead, QsmConfig::new(measure, 0.0).unwrap(), &[]).map_err(|e| e.to_string())?;
        ensure(oracle.contains(&out.qp), || "search returned a non-canonical partition".into())?;
        ensure((score(&out.qp) - best).abs() < 1e-9, || {
            format!("{measure}: search {} vs optimum {best}", score(&out.qp))
        })?;
    }
    Ok(())
}

/// min_q on a random ordering of at most ten candidate sentences returns the
/// least preserving subset in antilexicographic order, which is ⊆-minimal.
pub fn min_q_antilex<R: Rng>(rng: &mut R) -> Check {
    let exk = fixtures::exk();
    let lead = fixtures::exk_min_diagnoses();
    let cqps = enumerate_cqps(&lead, 20).map_err(|e| e.to_string())?;
    let qp = cqps.choose(rng).unwrap().clone();
    let exp = expand_query(&exk, &lead, &qp, &EntailmentFilter::default()).map_err(|e| e.to_string())?;
    let mut pool: Vec<Formula> = exp.canonical.sentences().iter().cloned().collect();
    let mut extra = exp.expansion.clone();
    extra.shuffle(rng);
    pool.extend(extra.into_iter().take(10usize.saturating_sub(pool.len())));
    pool.truncate(10);
    pool.shuffle(rng);
    let full: KbView = pool.iter().cloned().collect();
    if exk.partition(&lead, &full).map_err(|e| e.to_string())? != qp {
        return Ok(());
    }

    // brute force: D− members must be violated, D+ members are entailed for any subset
    let preserves = |mask: u32| {
        let sub: Vec<&Formula> = (0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| &pool[i]).collect();
        qp.dminus.iter().all(|d| {
            let mut kb = exk.kb_without(d.ids());
            kb.extend(sub.iter().map(|f| (*f).clone()));
            exk.violates(&kb)
        })
    };
    let best = (1u32..1 << pool.len()).find(|&m| preserves(m)).ok_or("no preserving subset")?;
    for i in 0..pool.len() {
        if best >> i & 1 == 1 {
            ensure(!preserves(best & !(1 << i)), || "antilex optimum is not minimal".into())?;
        }
    }
    let want: KbView = (0..pool.len()).filter(|i| best >> i & 1 == 1).map(|i| pool[i].clone()).collect();
    let got = min_q(&exk, &qp, &pool).map_err(|e| e.to_string())?;
    ensure(got.query.sentences() == &want, || format!("min_q {:?} vs brute force {want:?}", got.query))
}

/// Answering with a simulated oracle keeps the leading distribution
/// normalized, only ever removes diagnoses, and ends at the target.
pub fn bayes_shrinkage<R: Rng>(rng: &mut R) -> Check {
    let (dpi, mins) = random_dpi(rng, 7);
    let target = mins.choose(rng).unwrap().clone();
    let oracle = Oracle::Target(target.clone());
    let mut s = Session::new(dpi.clone(), SessionConfig::default()).map_err(|e| e.to_string())?;
    let mut before = tt_all_diagnoses(&dpi);
    for _ in 0..50 {
        let total: f64 = s.leading().entries().iter().map(|e| e.1).sum();
        ensure((total - 1.0).abs() < 1e-9, || format!("leading mass {total}"))?;
        ensure(s.leading().entries().iter().all(|e| e.1 >= 0.0), || "negative probability".into())?;
        let Some(p) = s.pending() else { break };
        let yes = oracle.answer(s.original_dpi(), &p.query).map_err(|e| e.to_string())?;
        s.step(if yes { Answer::True } else { Answer::False }).map_err(|e| e.to_string())?;
        let after = tt_all_diagnoses(s.dpi());
        ensure(after.is_subset(&before) && after.len() < before.len(), || {
            format!("diagnoses {} -> {}", before.len(), after.len())
        })?;
        ensure(after.contains(target.ids()), || "target eliminated".into())?;
        before = after;
    }
    ensure(s.diagnosis() == Some(&target), || format!("ended at {:?}, target {target:?}", s.diagnosis()))
}

/// The SAT-based checks agree with truth tables on up to fourteen variables.
pub fn sat_vs_truth_table<R: Rng>(rng: &mut R) -> Check {
    const NAMES: [&str; 14] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n"];
    let vars = &NAMES[..rng.gen_range(1..=14)];
    let kb: Vec<Formula> = (0..rng.gen_range(1..=5)).map(|_| random_formula(rng, vars, 3)).collect();
    let goal = random_formula(rng, vars, 2);
    ensure(is_consistent(&kb) == tt_consistent(&kb), || format!("consistency of {kb:?}"))?;
    ensure(entails(&kb, [&goal]) == tt_entails(&kb, [&goal]), || format!("{kb:?} |= {goal}"))
}

/// Every discriminating empty-D0 q-partition found by the maximal query of a
/// seed over a sub-selection of ExK diagnoses is canonical. Returns the
/// number of partitions examined.
pub fn empty_d0_scan() -> Result<usize, String> {
    let exk = fixtures::exk();
    let all = all_min_diagnoses(&exk).map_err(|e| e.to_string())?;
    let mut examined = 0;
    for mask in 0u32..1 << all.len() {
        let lead: Vec<Diagnosis> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i].clone()).collect();
        if lead.len() < 2 {
            continue;
        }
        let cqps: BTreeSet<QPartition> = enumerate_cqps(&lead, 20).map_err(|e| e.to_string())?.into_iter().collect();
        for seed in 1u32..(1 << lead.len()) - 1 {
            let u_s: BTreeSet<_> = (0..lead.len())
                .filter(|i| seed >> i & 1 == 1)
                .flat_map(|i| lead[i].ids().iter().copied())
                .collect();
            let keep: BTreeSet<_> = exk.id_set().difference(&u_s).copied().collect();
            if keep.is_empty() {
                continue;
            }
            let q = exk.sentences_of(&keep).map_err(|e| e.to_string())?;
            let qp = exk.partition(&lead, &q).map_err(|e| e.to_string())?;
            if qp.is_discriminating() && qp.dzero.is_empty() {
                examined += 1;
                ensure(cqps.contains(&qp), || format!("non-canonical q-partition {qp:?}"))?;
            }
        }
    }
    Ok(examined)
}
