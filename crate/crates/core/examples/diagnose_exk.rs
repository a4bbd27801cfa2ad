//! Minimal conflicts and the most probable minimal diagnoses of a small faulty KB.

use seqdiag::diagnosis::{all_min_conflicts, all_min_diagnoses};
use seqdiag::{fixtures, hs_tree, min_conflict};

fn main() -> seqdiag::Result<()> {
    let dpi = fixtures::exk();
    dpi.check_valid()?;
    for (id, f) in dpi.kb() {
        println!("a{} = {f}", id.0);
    }

    let first = min_conflict(&dpi, &dpi.id_set()).expect("the KB is faulty");
    println!("\nfirst minimal conflict: {:?}", first.raw());
    let conflicts: Vec<Vec<u32>> = all_min_conflicts(&dpi)?.iter().map(|c| c.raw()).collect();
    println!("all minimal conflicts: {conflicts:?}");
    let diags: Vec<Vec<u32>> = all_min_diagnoses(&dpi)?.iter().map(|d| d.raw()).collect();
    println!("all minimal diagnoses: {diags:?}");

    println!("\nfour most probable (uniform fault probability 0.1):");
    for (d, p) in hs_tree(&dpi, 4, None)?.entries() {
        println!("  {:?} {p:.4}", d.raw());
    }
    Ok(())
}
