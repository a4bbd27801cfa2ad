//! A full diagnosis session with simulated oracles.

use seqdiag::engine::run;
use seqdiag::{fixtures, Answer, Diagnosis, Oracle, Session, SessionConfig};

fn main() -> seqdiag::Result<()> {
    let r = fixtures::circuit_reduced();
    let config = SessionConfig {
        enhance: true,
        ..SessionConfig::default()
    };
    let oracle = Oracle::Reference(fixtures::circuit_reference().into_iter().collect());
    let s = run(r.dpi.clone(), &oracle, config)?;
    println!("circuit: {} query, faulty {:?}", s.answered(), r.components_of(s.diagnosis().unwrap()));
    println!("{}", serde_json::to_string_pretty(&s.transcript_json()).unwrap());

    for target in fixtures::exk_min_diagnoses() {
        let s = run(fixtures::exk(), &Oracle::Target(target.clone()), SessionConfig::default())?;
        println!("ExK target {:?}: {} queries", target.raw(), s.answered());
    }

    // driving a session by hand, skipping the first query
    let mut s = Session::new(fixtures::exk(), SessionConfig::default())?;
    s.step(Answer::Skip)?;
    let target = Diagnosis::from_ids(&[2, 6]);
    let oracle = Oracle::Target(target);
    while let Some(p) = s.pending() {
        let q: Vec<String> = p.query.sentences().iter().map(|f| f.to_string()).collect();
        let yes = oracle.answer(s.original_dpi(), &p.query)?;
        println!("{q:?} -> {yes}");
        s.step(if yes { Answer::True } else { Answer::False })?;
    }
    println!("diagnosis {:?}", s.diagnosis().map(Diagnosis::raw));
    Ok(())
}
