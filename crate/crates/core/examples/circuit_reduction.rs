//! Reduce a gate-level circuit with an observed misbehaviour to a diagnosis problem.

use seqdiag::diagnosis::all_min_diagnoses;
use seqdiag::mbd::{parse_netlist, reduce};
use seqdiag::{fixtures, hs_tree, serialize_dpi};

fn main() -> seqdiag::Result<()> {
    println!("{}", fixtures::CIRCUIT_NET);
    let r = reduce(&parse_netlist(fixtures::CIRCUIT_NET)?)?;
    print!("{}", serialize_dpi(&r.dpi));

    println!("\nminimal diagnoses as faulty gates:");
    for d in all_min_diagnoses(&r.dpi)? {
        println!("  {:?}", r.components_of(&d));
    }
    println!("\nranked by gate fault rates:");
    for (d, p) in hs_tree(&r.dpi, 10, None)?.entries() {
        println!("  {:<12} {p:.3}", r.components_of(d).join(","));
    }
    Ok(())
}
