//! Parse formulas and ask consistency and entailment questions.

use seqdiag::logic::{entails, is_consistent, parse, KbSolver};
use seqdiag::KbView;

fn main() -> seqdiag::Result<()> {
    let kb: KbView = ["A -> B", "B -> C & !D", "A | E"]
        .into_iter()
        .map(parse)
        .collect::<Result<_, _>>()?;
    println!("KB: {}", kb.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";  "));
    println!("consistent: {}", is_consistent(&kb));

    for goal in ["A -> C", "!D | !A", "E", "C | E"] {
        let g = parse(goal)?;
        println!("KB |= {goal:<10} {}", entails(&kb, [&g]));
    }

    let mut with_a = kb.clone();
    with_a.insert(parse("A")?);
    with_a.insert(parse("D")?);
    println!("KB + {{A, D}} consistent: {}", is_consistent(&with_a));

    // one solver reused for many implication checks
    let solver = KbSolver::new(&kb);
    for (v, (l, pos)) in [("A", ("C", true)), ("A", ("D", false)), ("E", ("C", true))] {
        let shown = if pos { l.to_string() } else { format!("!{l}") };
        println!("KB |= {v} -> {shown}: {}", solver.entails_implication((v, true), (l, pos)));
    }
    Ok(())
}
