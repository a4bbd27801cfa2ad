//! Search canonical q-partitions for the one that best splits the diagnosis probability mass.

use seqdiag::qpartition::{enumerate_cqps, qsm_value, search_optimal_qp, Measure, QsmConfig};
use seqdiag::{fixtures, LeadingDiagnoses, QPartition};

fn cells(qp: &QPartition) -> String {
    let f = |s: &std::collections::BTreeSet<seqdiag::Diagnosis>| {
        s.iter().map(|d| format!("{:?}", d.raw())).collect::<Vec<_>>().join(" ")
    };
    format!("D+ = {}  |  D- = {}", f(&qp.dplus), f(&qp.dminus))
}

fn main() -> seqdiag::Result<()> {
    let diags = fixtures::exk_min_diagnoses();
    let lead = LeadingDiagnoses::from_weights(diags.iter().cloned().zip(fixtures::EXK_SKEWED_PROBS));

    let all = enumerate_cqps(&diags, 20)?;
    println!("{} canonical q-partitions over {} diagnoses", all.len(), diags.len());

    for measure in [Measure::Ent, Measure::Spl] {
        let out = search_optimal_qp(&lead, QsmConfig::new(measure, 0.01)?, &[])?;
        println!(
            "\n{measure}: value {:.6}, goal {}, {} generated, {} expanded",
            out.value, out.goal, out.stats.generated, out.stats.expanded
        );
        println!("  {}", cells(&out.qp));
        let exact = all.iter().map(|qp| qsm_value(measure, qp, &lead)).fold(f64::INFINITY, f64::min);
        println!("  brute-force optimum {exact:.6}");
    }
    Ok(())
}
