//! Self-check against the worked examples bundled in [`crate::fixtures`].

use std::collections::BTreeSet;
use std::fmt;

use crate::diagnosis::{all_min_conflicts, all_min_diagnoses, hs_tree, LeadingDiagnoses};
use crate::dpi::{Diagnosis, Dpi, QPartition, SentenceId};
use crate::engine::{run, Oracle, SessionConfig};
use crate::fixtures;
use crate::logic::{entails, parse, Formula, KbView};
use crate::qpartition::{canonical_query, enumerate_cqps, search_optimal_qp, QsmConfig, DEFAULT_ENUMERATION_CAP};
use crate::query_cost::{optimal_query_for_qp, Qcm};
use crate::query_enhance::{enhanced_query, expand_query, min_q, EntailmentFilter};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {}: {}", self.name, self.detail)
    }
}

type Outcome = std::result::Result<String, String>;

fn check(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check { name, passed, detail }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: crate::Error) -> String {
    e.to_string()
}

fn ids(ds: &[&[u32]]) -> Vec<Diagnosis> {
    ds.iter().map(|d| Diagnosis::from_ids(d)).collect()
}

fn show(ids: &BTreeSet<SentenceId>) -> String {
    let v: Vec<String> = ids.iter().map(|i| i.0.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn exk_goal_qp() -> QPartition {
    let a = fixtures::exk_min_diagnoses();
    QPartition::from_dplus(&a, [a[3].clone(), a[4].clone()])
}

pub fn exk_conflicts_and_diagnoses() -> Check {
    check("ExK minimal conflicts and diagnoses", || {
        let exk = fixtures::exk();
        let diags: BTreeSet<Diagnosis> = all_min_diagnoses(&exk).map_err(e2s)?.into_iter().collect();
        let want: BTreeSet<Diagnosis> = fixtures::exk_min_diagnoses().into_iter().collect();
        ensure(diags == want, || format!("diagnoses {diags:?}"))?;
        let conflicts: BTreeSet<Vec<u32>> = all_min_conflicts(&exk).map_err(e2s)?.iter().map(|c| c.raw()).collect();
        let want: BTreeSet<Vec<u32>> = fixtures::exk_min_conflicts().into_iter().collect();
        ensure(conflicts == want, || format!("conflicts {conflicts:?}"))?;
        Ok(format!("{} conflicts, {} diagnoses", conflicts.len(), diags.len()))
    })
}

pub fn exk_canonical_queries() -> Check {
    check("canonical queries for {D1,D5,D6}", || {
        let exk = fixtures::exk();
        let a = fixtures::exk_min_diagnoses();
        let lead = vec![a[0].clone(), a[4].clone(), a[5].clone()];
        // (seed indices into lead, expected CQ ids)
        let rows: [(&[usize], Option<&[u32]>); 6] = [
            (&[1, 2], Some(&[2])),
            (&[0, 2], Some(&[1])),
            (&[0, 1], None),
            (&[0], Some(&[1, 4, 7])),
            (&[1], Some(&[2, 3])),
            (&[2], Some(&[1, 2])),
        ];
        for (seed, want) in rows {
            let seed: Vec<Diagnosis> = seed.iter().map(|&i| lead[i].clone()).collect();
            let got = canonical_query(&exk, &lead, &seed).map_err(e2s)?;
            match (got, want) {
                (None, None) => {}
                (Some(q), Some(want)) => {
                    let got: BTreeSet<u32> = q.sentences().iter().filter_map(|f| exk.id_of(f)).map(|i| i.0).collect();
                    let want: BTreeSet<u32> = want.iter().copied().collect();
                    ensure(got == want, || format!("seed {seed:?}: CQ {got:?}"))?;
                    let qp = exk.partition(&lead, q.sentences()).map_err(e2s)?;
                    let dplus: BTreeSet<Diagnosis> = seed.iter().cloned().collect();
                    ensure(qp.dplus == dplus && qp.dzero.is_empty(), || format!("seed {seed:?}: {qp:?}"))?;
                }
                (got, _) => return Err(format!("seed {seed:?}: CQ {got:?}")),
            }
        }
        Ok("6 seeds, 5 canonical queries, 1 undefined".into())
    })
}

pub fn cqp_counts() -> Check {
    check("canonical q-partition counts", || {
        let n = enumerate_cqps(&fixtures::exk_min_diagnoses(), DEFAULT_ENUMERATION_CAP).map_err(e2s)?.len();
        ensure(n == 29, || format!("{n} canonical q-partitions for ExK"))?;
        for k in 2..=8u32 {
            let lead: Vec<Diagnosis> = (1..=k).map(|i| Diagnosis::from_ids(&[i])).collect();
            let m = enumerate_cqps(&lead, DEFAULT_ENUMERATION_CAP).map_err(e2s)?.len();
            ensure(m == (1 << k) - 2, || format!("{m} for {k} disjoint diagnoses"))?;
        }
        Ok("29 canonical q-partitions for ExK; 2^n-2 for n disjoint diagnoses, n=2..8".into())
    })
}

pub fn exk_entropy_search() -> Check {
    check("entropy-optimal q-partition under skewed probabilities", || {
        let lead = LeadingDiagnoses::from_weights(fixtures::exk_min_diagnoses().into_iter().zip(fixtures::EXK_SKEWED_PROBS));
        let out = search_optimal_qp(&lead, QsmConfig::default(), &[]).map_err(e2s)?;
        ensure(out.qp == exk_goal_qp(), || format!("got {:?}", out.qp))?;
        ensure((0.0005..=0.002).contains(&out.value), || format!("ENT {}", out.value))?;
        Ok(format!(
            "<{{D4,D5}},{{D1,D2,D3,D6}}> ENT={:.6}, {} generated / {} expanded",
            out.value, out.stats.generated, out.stats.expanded
        ))
    })
}

pub fn exk_cheapest_query() -> Check {
    check("cardinality-optimal query", || {
        let cq = optimal_query_for_qp(&fixtures::exk(), &exk_goal_qp(), Qcm::Card).map_err(e2s)?;
        let want: BTreeSet<SentenceId> = [3, 5, 6].map(SentenceId).into();
        ensure(cq.ids == want, || format!("got {}", show(&cq.ids)))?;
        Ok(format!("{} cost {}", show(&cq.ids), cq.cost))
    })
}

pub fn exk_query_expansion() -> Check {
    check("query expansion", || {
        let exk = fixtures::exk();
        let lead = fixtures::exk_min_diagnoses();
        let qp = exk_goal_qp();
        let exp = expand_query(&exk, &lead, &qp, &EntailmentFilter::default()).map_err(e2s)?;
        for s in ["C -> !M", "E -> X", "K -> !M", "E -> !M", "B -> !M"] {
            let f = parse(s).map_err(e2s)?;
            ensure(exp.expansion.contains(&f), || format!("missing {s}"))?;
        }
        let known = exk.kb_without(&BTreeSet::new());
        let u_d = crate::dpi::union_of(&lead);
        let with_q = exk.kb_without(&u_d.difference(&exp.canonical_ids).copied().collect());
        let without_q = exk.kb_without(&u_d);
        for f in &exp.expansion {
            ensure(!known.contains(f), || format!("{f} already known"))?;
            ensure(entails(&with_q, [f]), || format!("{f} not entailed"))?;
            ensure(!entails(&without_q, [f]), || format!("{f} entailed without the query"))?;
            ensure(is_literal_or_implication(f), || format!("{f} has an unexpected shape"))?;
        }
        Ok(format!("{} new sentences", exp.expansion.len()))
    })
}

fn is_literal_or_implication(f: &Formula) -> bool {
    fn literal(f: &Formula) -> bool {
        match f {
            Formula::Var(_) => true,
            Formula::Not(g) => matches!(**g, Formula::Var(_)),
            _ => false,
        }
    }
    match f {
        Formula::Implies(a, b) => matches!(**a, Formula::Var(_)) && literal(b),
        _ => literal(f),
    }
}

pub fn exk_query_contraction() -> Check {
    check("query contraction", || {
        let out = min_q(&fixtures::exk(), &exk_goal_qp(), &fixtures::exk_sorted_expanded_query()).map_err(e2s)?;
        let want: KbView = [parse("C -> !M").map_err(e2s)?, parse("E -> X").map_err(e2s)?].into();
        ensure(out.query.sentences() == &want, || format!("got {:?}", out.query))?;
        ensure(out.trace == [true, false, false, false, true], || format!("trace {:?}", out.trace))?;
        let trace: String = out.trace.iter().map(|&b| if b { 'T' } else { 'F' }).collect();
        Ok(format!("{{C -> !M, E -> X}}, trace {trace}"))
    })
}

pub fn circuit_end_to_end() -> Check {
    check("adder circuit end to end", || {
        let r = fixtures::circuit_reduced();
        let dpi: &Dpi = &r.dpi;
        let want = ids(&[&[1], &[2, 4], &[2, 5]]);
        let diags: BTreeSet<Diagnosis> = all_min_diagnoses(dpi).map_err(e2s)?.into_iter().collect();
        ensure(diags == want.iter().cloned().collect(), || format!("diagnoses {diags:?}"))?;
        let conflicts: BTreeSet<Vec<u32>> = all_min_conflicts(dpi).map_err(e2s)?.iter().map(|c| c.raw()).collect();
        ensure(conflicts == [vec![1, 2], vec![1, 4, 5]].into(), || format!("conflicts {conflicts:?}"))?;

        let lead = hs_tree(dpi, 10, None).map_err(e2s)?;
        for (d, p) in want.iter().zip([0.93, 0.05, 0.02]) {
            ensure((lead.prob(d) - p).abs() <= 0.005, || format!("p({d:?}) = {}", lead.prob(d)))?;
        }
        let out = search_optimal_qp(&lead, QsmConfig::default(), &[]).map_err(e2s)?;
        let qp = QPartition::from_dplus(&want, [want[0].clone()]);
        ensure(out.qp == qp, || format!("q-partition {:?}", out.qp))?;

        let cq = optimal_query_for_qp(dpi, &qp, Qcm::Sum).map_err(e2s)?;
        ensure(cq.ids == [SentenceId(2)].into() && cq.cost == 2.0, || {
            format!("cheapest {} at {}", show(&cq.ids), cq.cost)
        })?;

        let q = enhanced_query(dpi, &want, &qp, &EntailmentFilter::default())
            .map_err(e2s)?
            .ok_or("no enhanced query")?;
        let probe: KbView = [parse("!outX1").map_err(e2s)?].into();
        ensure(q.sentences() == &probe, || format!("enhanced query {q:?}"))?;

        let config = SessionConfig {
            enhance: true,
            ..SessionConfig::default()
        };
        let oracle = Oracle::Reference(fixtures::circuit_reference().into_iter().collect());
        let s = run(r.dpi.clone(), &oracle, config).map_err(e2s)?;
        ensure(s.answered() == 1 && s.diagnosis() == Some(&want[0]), || {
            format!("{} answers, diagnosis {:?}", s.answered(), s.diagnosis())
        })?;
        Ok(format!(
            "3 diagnoses (p = {:.3}, {:.3}, {:.3}), cheapest query {{{}}}, probe {{!outX1}}, 1 answer -> {{{}}}",
            lead.prob(&want[0]),
            lead.prob(&want[1]),
            lead.prob(&want[2]),
            r.component(SentenceId(2)).unwrap_or("?"),
            r.component(SentenceId(1)).unwrap_or("?"),
        ))
    })
}

pub fn run_all() -> Vec<Check> {
    vec![
        exk_conflicts_and_diagnoses(),
        exk_canonical_queries(),
        cqp_counts(),
        exk_entropy_search(),
        exk_cheapest_query(),
        exk_query_expansion(),
        exk_query_contraction(),
        circuit_end_to_end(),
    ]
}

pub fn report(checks: &[Check]) -> String {
    let mut out: String = checks.iter().map(|c| format!("{c}\n")).collect();
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}
