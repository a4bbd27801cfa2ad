//! Pick the cheapest set of KB sentences that induces a given q-partition.

use seqdiag::query_cost::{min_traits, optimal_query_for_qp, Qcm};
use seqdiag::{fixtures, hs_tree, QPartition};

fn main() -> seqdiag::Result<()> {
    let exk = fixtures::exk();
    let a = fixtures::exk_min_diagnoses();
    let qp = QPartition::from_dplus(&a, [a[3].clone(), a[4].clone()]);
    let traits: Vec<Vec<u32>> = min_traits(&qp).iter().map(|t| t.iter().map(|i| i.0).collect()).collect();
    println!("minimal traits of D-: {traits:?}");
    for qcm in [Qcm::Card, Qcm::Sum, Qcm::Max] {
        let q = optimal_query_for_qp(&exk, &qp, qcm)?;
        let ids: Vec<u32> = q.ids.iter().map(|i| i.0).collect();
        println!("{qcm:?}: {ids:?} cost {}", q.cost);
    }

    let r = fixtures::circuit_reduced();
    let lead = hs_tree(&r.dpi, 10, None)?.diagnoses();
    let qp = QPartition::from_dplus(&lead, [lead[0].clone()]);
    let q = optimal_query_for_qp(&r.dpi, &qp, Qcm::Sum)?;
    let gates: Vec<&str> = q.ids.iter().filter_map(|&id| r.component(id)).collect();
    println!("\ncircuit, gate costs as price of checking: test {gates:?} at cost {}", q.cost);
    for f in q.query.sentences() {
        println!("  {f}");
    }
    Ok(())
}
