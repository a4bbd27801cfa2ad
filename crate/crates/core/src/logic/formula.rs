use std::collections::BTreeSet;
use std::fmt;

/// A propositional sentence.
///
/// `And` and `Or` always hold at least two children; use [`Formula::and`] and
/// [`Formula::or`] to build them from arbitrary lists. Structural equality is
/// the identity used for sentence sets throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Var(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction of `items`; an empty list is `True`, a singleton is the item itself.
    pub fn and(items: Vec<Formula>) -> Self {
        match items.len() {
            0 => Formula::True,
            1 => items.into_iter().next().unwrap(),
            _ => Formula::And(items),
        }
    }

    /// Disjunction of `items`; an empty list is `False`, a singleton is the item itself.
    pub fn or(items: Vec<Formula>) -> Self {
        match items.len() {
            0 => Formula::False,
            1 => items.into_iter().next().unwrap(),
            _ => Formula::Or(items),
        }
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    /// A literal: `v` when `positive`, `!v` otherwise.
    pub fn literal(name: impl Into<String>, positive: bool) -> Self {
        let v = Formula::var(name);
        if positive {
            v
        } else {
            Formula::not(v)
        }
    }

    /// Returns `(variable, polarity)` if this formula is a literal.
    pub fn as_literal(&self) -> Option<(&str, bool)> {
        match self {
            Formula::Var(v) => Some((v, true)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Var(v) => Some((v, false)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Variable names in order of first occurrence (left to right).
    pub fn vars_in_order(&self, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Formula::Not(f) => f.vars_in_order(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.vars_in_order(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.vars_in_order(out);
                b.vars_in_order(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = Vec::new();
        self.vars_in_order(&mut v);
        v.into_iter().collect()
    }

    /// Truth value under `assign`, which must cover all variables.
    pub fn eval(&self, assign: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => assign(v),
            Formula::Not(f) => !f.eval(assign),
            Formula::And(fs) => fs.iter().all(|f| f.eval(assign)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(assign)),
            Formula::Implies(a, b) => !a.eval(assign) || b.eval(assign),
            Formula::Iff(a, b) => a.eval(assign) == b.eval(assign),
        }
    }

    /// Flattens nested conjunctions and disjunctions. This is the form the
    /// parser produces for `a & (b & c)` after printing and re-reading.
    pub fn normalized(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Var(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.normalized()),
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.normalized() {
                        Formula::And(inner) => out.extend(inner),
                        g => out.push(g),
                    }
                }
                Formula::and(out)
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.normalized() {
                        Formula::Or(inner) => out.extend(inner),
                        g => out.push(g),
                    }
                }
                Formula::or(out)
            }
            Formula::Implies(a, b) => Formula::implies(a.normalized(), b.normalized()),
            Formula::Iff(a, b) => Formula::iff(a.normalized(), b.normalized()),
        }
    }

    // Binding strength in the text grammar; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(_) => 3,
            Formula::And(_) => 4,
            _ => 5,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Var(v) => f.write_str(v),
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.write_operand(f, 5)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let (sep, prec) = if matches!(self, Formula::And(_)) {
                    (" & ", 4)
                } else {
                    (" | ", 3)
                };
                for (i, child) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // nested same-kind lists are printed in parentheses so the
                    // tree shape survives a round trip
                    child.write_operand(f, prec + 1)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                a.write_operand(f, 3)?;
                f.write_str(" -> ")?;
                b.write_operand(f, 2)
            }
            Formula::Iff(a, b) => {
                a.write_operand(f, 1)?;
                f.write_str(" <-> ")?;
                b.write_operand(f, 2)
            }
        }
    }
}

/// Conjunction of a set of sentences, as used for test cases and queries.
pub fn conjunction<'a>(items: impl IntoIterator<Item = &'a Formula>) -> Formula {
    Formula::and(items.into_iter().cloned().collect())
}
