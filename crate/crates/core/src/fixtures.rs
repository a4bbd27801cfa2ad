//! Small reference problems used by the examples, tests and `fixtures --verify`.

use crate::dpi::{Diagnosis, Dpi};
use crate::dpi_format::parse_dpi;
use crate::logic::{parse, Formula};
use crate::mbd::{self, MbdDpi, Reduction};

pub const EXK_DPI: &str = include_str!("../fixtures/exk.dpi");
pub const CIRCUIT_NET: &str = include_str!("../fixtures/circuit.net");
pub const CIRCUIT_REFERENCE: &str = include_str!("../fixtures/circuit_reference.txt");

/// The seven-sentence running example with background, one positive and
/// three negative test cases.
pub fn exk() -> Dpi {
    parse_dpi(EXK_DPI).expect("bundled fixture parses")
}

/// All minimal diagnoses of [`exk`], in the order D1..D6.
pub fn exk_min_diagnoses() -> Vec<Diagnosis> {
    [&[2, 3][..], &[2, 5], &[2, 6], &[2, 7], &[1, 4, 7], &[3, 4, 7]]
        .iter()
        .map(|ids| Diagnosis::from_ids(ids))
        .collect()
}

/// All minimal conflicts of [`exk`].
pub fn exk_min_conflicts() -> Vec<Vec<u32>> {
    vec![vec![1, 2, 3], vec![2, 4], vec![2, 7], vec![3, 5, 6, 7]]
}

/// A skewed distribution over D1..D6 under which the entropy-optimal
/// canonical q-partition is ⟨{D4,D5},{D1,D2,D3,D6}⟩.
pub const EXK_SKEWED_PROBS: [f64; 6] = [0.01, 0.33, 0.14, 0.07, 0.41, 0.04];

/// A fixed preference-sorted expanded query for the partition above.
pub fn exk_sorted_expanded_query() -> Vec<Formula> {
    ["K -> E", "C -> B", "C -> !M", "E -> X", "K -> !M", "E -> !M", "B -> !M", "E -> !M & X"]
        .iter()
        .map(|s| parse(s).expect("literal formula"))
        .collect()
}

/// The one-bit full adder with hand-ordered sentences: five gate
/// behaviours, seven wire equalities, five observations.
pub fn circuit() -> MbdDpi {
    mbd::circuit_fixture()
}

pub fn circuit_reduced() -> Reduction {
    mbd::reduce(&circuit()).expect("circuit fixture reduces")
}

/// Wire values of the adder when X1 is stuck at 0.
pub fn circuit_reference() -> Vec<Formula> {
    parse_sentence_list(CIRCUIT_REFERENCE).expect("bundled reference parses")
}

/// One formula per line; blank lines and `#` comments are ignored.
pub fn parse_sentence_list(text: &str) -> crate::Result<Vec<Formula>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse)
        .collect()
}
