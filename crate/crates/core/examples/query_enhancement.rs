//! Replace KB sentences in a query by simpler implied facts the oracle can answer more easily.

use seqdiag::query_enhance::{default_order, expand_query, min_q, EntailmentFilter};
use seqdiag::{fixtures, hs_tree, QPartition};

fn main() -> seqdiag::Result<()> {
    let exk = fixtures::exk();
    let a = fixtures::exk_min_diagnoses();
    let qp = QPartition::from_dplus(&a, [a[3].clone(), a[4].clone()]);
    let exp = expand_query(&exk, &a, &qp, &EntailmentFilter::default())?;
    println!("canonical query ids {:?}", exp.canonical_ids.iter().map(|i| i.0).collect::<Vec<_>>());
    println!("{} implied sentences:", exp.expansion.len());
    for f in &exp.expansion {
        println!("  {f}");
    }
    let out = min_q(&exk, &qp, &default_order(&exk, &exp))?;
    println!("minimized: {:?}", out.query.sentences().iter().map(|f| f.to_string()).collect::<Vec<_>>());

    let hand = fixtures::exk_sorted_expanded_query();
    let out = min_q(&exk, &qp, &hand)?;
    println!(
        "from a fixed order: {:?}, checks {:?}",
        out.query.sentences().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        out.trace
    );

    let r = fixtures::circuit_reduced();
    let lead = hs_tree(&r.dpi, 10, None)?.diagnoses();
    let qp = QPartition::from_dplus(&lead, [lead[0].clone()]);
    let exp = expand_query(&r.dpi, &lead, &qp, &EntailmentFilter::parse_kinds("literals")?)?;
    let out = min_q(&r.dpi, &qp, &default_order(&r.dpi, &exp))?;
    println!("\ncircuit probe: {:?}", out.query.sentences().iter().map(|f| f.to_string()).collect::<Vec<_>>());
    Ok(())
}
