//! Line-based text format for diagnosis problem instances.
//!
//! ```text
//! [K]
//! 1: !H | !G        @p=0.1 @c=1
//! 2: X | F -> H
//! [B]
//! 8: H -> A
//! [P]
//! p1: !X -> !Z
//! [N]
//! n1: M -> A; E -> !G
//! [R]
//! consistency
//! ```
//!
//! Labels before `:` are optional. In `[K]` a numeric label is the sentence
//! id; unlabelled sentences are numbered by position. Test cases holding
//! several sentences separate them with `;`. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::dpi::{Dpi, SentenceId, TestCase};
use crate::error::{Error, Result};
use crate::logic::{parse, Formula, Requirement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Kb,
    Background,
    Positive,
    Negative,
    Requirements,
}

/// How a failed validity check (no diagnosis can exist) is reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Validity {
    #[default]
    Error,
    Warn,
    Skip,
}

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn split_label(body: &str) -> (Option<&str>, &str) {
    match body.split_once(':') {
        Some((label, rest)) => (Some(label.trim()), rest),
        None => (None, body),
    }
}

fn parse_formula(text: &str, line: usize) -> Result<Formula> {
    parse(text).map_err(|e| format_err(line, e.to_string()))
}

fn parse_test_case(text: &str, line: usize) -> Result<TestCase> {
    let sentences = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_formula(s, line))
        .collect::<Result<Vec<_>>>()?;
    TestCase::new(sentences).map_err(|e| format_err(line, e.to_string()))
}

/// Parses a DPI and runs the validity check as an error.
pub fn parse_dpi(text: &str) -> Result<Dpi> {
    parse_dpi_with(text, Validity::Error).map(|(dpi, _)| dpi)
}

type KbLine = (Option<u32>, Formula, Option<f64>, Option<f64>, usize);

/// Parses a DPI, returning warnings produced under `validity`.
pub fn parse_dpi_with(text: &str, validity: Validity) -> Result<(Dpi, Vec<String>)> {
    let mut section = None;
    // (label, formula, fault probability, cost, line)
    let mut kb: Vec<KbLine> = Vec::new();
    let mut background = Vec::new();
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut requirements = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = Some(match content {
                "[K]" => Section::Kb,
                "[B]" => Section::Background,
                "[P]" => Section::Positive,
                "[N]" => Section::Negative,
                "[R]" => Section::Requirements,
                other => return Err(format_err(line, format!("unknown section {other}"))),
            });
            continue;
        }
        let Some(sec) = section else {
            return Err(format_err(line, "content before the first section header"));
        };
        match sec {
            Section::Kb => {
                let (body, annotations) = match content.find('@') {
                    Some(at) => (&content[..at], &content[at..]),
                    None => (content, ""),
                };
                let (label, formula) = split_label(body);
                let id = match label {
                    Some(l) => Some(l.parse::<u32>().map_err(|_| {
                        format_err(line, format!("sentence label {l:?} is not a positive integer"))
                    })?),
                    None => None,
                };
                if id == Some(0) {
                    return Err(format_err(line, "sentence ids start at 1"));
                }
                let (mut p, mut c) = (None, None);
                for ann in annotations.split_whitespace() {
                    let value = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|_| format_err(line, format!("bad annotation value {s:?}")))
                    };
                    if let Some(v) = ann.strip_prefix("@p=") {
                        p = Some(value(v)?);
                    } else if let Some(v) = ann.strip_prefix("@c=") {
                        c = Some(value(v)?);
                    } else {
                        return Err(format_err(line, format!("unknown annotation {ann:?}")));
                    }
                }
                kb.push((id, parse_formula(formula, line)?, p, c, line));
            }
            Section::Background => {
                let (_, formula) = split_label(content);
                background.push(parse_formula(formula, line)?);
            }
            Section::Positive => positive.push(parse_test_case(split_label(content).1, line)?),
            Section::Negative => negative.push(parse_test_case(split_label(content).1, line)?),
            Section::Requirements => {
                for name in content.split(',') {
                    let r: Requirement = name.parse().map_err(|e: Error| format_err(line, e.to_string()))?;
                    requirements.insert(r);
                }
            }
        }
    }

    let mut numbered = Vec::with_capacity(kb.len());
    let mut annotations = Vec::new();
    for (pos, (id, f, p, c, line)) in kb.into_iter().enumerate() {
        let id = SentenceId(id.unwrap_or(pos as u32 + 1));
        numbered.push((id, f));
        annotations.push((id, p, c, line));
    }
    let mut dpi = Dpi::new(numbered, background, positive, negative)?;
    if !requirements.is_empty() {
        dpi = dpi.with_requirements(requirements)?;
    }
    for (id, p, c, line) in annotations {
        if let Some(p) = p {
            dpi.set_fault_prob(id, p).map_err(|e| format_err(line, e.to_string()))?;
        }
        if let Some(c) = c {
            dpi.set_cost(id, c).map_err(|e| format_err(line, e.to_string()))?;
        }
    }

    let mut warnings = Vec::new();
    if validity != Validity::Skip {
        if let Err(e) = dpi.check_valid() {
            match validity {
                Validity::Error => return Err(e),
                _ => warnings.push(e.to_string()),
            }
        }
    }
    Ok((dpi, warnings))
}

/// Writes `dpi` in the text format. Background sentences are labelled with
/// ids continuing after the largest K id.
pub fn serialize_dpi(dpi: &Dpi) -> String {
    let mut out = String::new();
    out.push_str("[K]\n");
    for (id, f) in dpi.kb() {
        let _ = write!(out, "{id}: {f}");
        if let Some(p) = dpi.explicit_fault_probs().get(id) {
            let _ = write!(out, " @p={p}");
        }
        if let Some(c) = dpi.explicit_costs().get(id) {
            let _ = write!(out, " @c={c}");
        }
        out.push('\n');
    }
    let next = dpi.ids().map(|i| i.0).max().unwrap_or(0) + 1;
    if !dpi.background().is_empty() {
        out.push_str("[B]\n");
        for (i, f) in dpi.background().iter().enumerate() {
            let _ = writeln!(out, "{}: {f}", next + i as u32);
        }
    }
    let cases = |out: &mut String, header: &str, prefix: char, cases: &[TestCase]| {
        if cases.is_empty() {
            return;
        }
        out.push_str(header);
        for (i, tc) in cases.iter().enumerate() {
            let parts: Vec<String> = tc.sentences().iter().map(|f| f.to_string()).collect();
            let _ = writeln!(out, "{prefix}{}: {}", i + 1, parts.join("; "));
        }
    };
    cases(&mut out, "[P]\n", 'p', dpi.positive());
    cases(&mut out, "[N]\n", 'n', dpi.negative());
    out.push_str("[R]\n");
    let reqs: Vec<String> = dpi.requirements().iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "{}", reqs.join(", "));
    out
}
