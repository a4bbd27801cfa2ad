//! Component-based (MBD) problems and their reduction to knowledge-base
//! debugging: each component's behaviour becomes one faulty-KB sentence,
//! system description and observations become background, measurements
//! become positive test cases.

use std::collections::BTreeSet;

use crate::dpi::{Diagnosis, Dpi, SentenceId, TestCase};
use crate::error::{Error, Result};
use crate::logic::{parse, Formula};

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub behaviour: Formula,
    pub fault_prob: Option<f64>,
    pub cost: Option<f64>,
}

impl Component {
    pub fn new(name: impl Into<String>, behaviour: Formula) -> Self {
        Component {
            name: name.into(),
            behaviour,
            fault_prob: None,
            cost: None,
        }
    }

    pub fn with_fault_prob(mut self, p: f64) -> Self {
        self.fault_prob = Some(p);
        self
    }

    pub fn with_cost(mut self, c: f64) -> Self {
        self.cost = Some(c);
        self
    }
}

/// Components with nominal behaviours, general system description,
/// observations and measurements. Faulty components behave arbitrarily
/// (weak fault model), so no fault modes are represented.
#[derive(Clone, Debug, PartialEq)]
pub struct MbdDpi {
    comps: Vec<Component>,
    sd_gen: Vec<Formula>,
    obs: Vec<Formula>,
    meas: Vec<TestCase>,
}

impl MbdDpi {
    pub fn new(comps: Vec<Component>, sd_gen: Vec<Formula>, obs: Vec<Formula>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::InvalidDpi("a system needs at least one component".into()));
        }
        let mut names = BTreeSet::new();
        for c in &comps {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidDpi(format!("duplicate component {}", c.name)));
            }
        }
        Ok(MbdDpi {
            comps,
            sd_gen,
            obs,
            meas: Vec::new(),
        })
    }

    pub fn with_measurement(mut self, m: TestCase) -> Self {
        self.meas.push(m);
        self
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn sd_gen(&self) -> &[Formula] {
        &self.sd_gen
    }

    pub fn observations(&self) -> &[Formula] {
        &self.obs
    }

    pub fn measurements(&self) -> &[TestCase] {
        &self.meas
    }
}

/// A reduced problem together with the sentence-to-component mapping.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub dpi: Dpi,
    components: Vec<(SentenceId, String)>,
}

impl Reduction {
    pub fn component(&self, id: SentenceId) -> Option<&str> {
        self.components
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, n)| n.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<SentenceId> {
        self.components.iter().find(|(_, n)| n == name).map(|(i, _)| *i)
    }

    pub fn components_of(&self, d: &Diagnosis) -> Vec<&str> {
        d.ids().iter().filter_map(|&id| self.component(id)).collect()
    }

    pub fn mapping(&self) -> &[(SentenceId, String)] {
        &self.components
    }
}

/// K = behaviours (ids 1.. in component order), B = SD_gen then OBS,
/// P = MEAS, N = ∅.
pub fn reduce(mbd: &MbdDpi) -> Result<Reduction> {
    let mut kb = Vec::new();
    let mut components = Vec::new();
    for (i, c) in mbd.comps.iter().enumerate() {
        let id = SentenceId(i as u32 + 1);
        kb.push((id, c.behaviour.clone()));
        components.push((id, c.name.clone()));
    }
    let background = mbd.sd_gen.iter().chain(&mbd.obs).cloned().collect();
    let mut dpi = Dpi::new(kb, background, mbd.meas.clone(), Vec::new())?;
    for ((id, _), c) in components.iter().zip(&mbd.comps) {
        if let Some(p) = c.fault_prob {
            dpi.set_fault_prob(*id, p)?;
        }
        if let Some(cost) = c.cost {
            dpi.set_cost(*id, cost)?;
        }
    }
    Ok(Reduction { dpi, components })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
}

impl GateKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "xor" => GateKind::Xor,
            "not" => GateKind::Not,
            _ => return None,
        })
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::And | GateKind::Or => n >= 2,
            GateKind::Xor => n == 2,
            GateKind::Not => n == 1,
        }
    }
}

/// `out ↔ f(inputs)`; xor is written as a biconditional with one negated input.
pub fn gate_behaviour(kind: GateKind, inputs: &[Formula], out: Formula) -> Formula {
    let body = match kind {
        GateKind::And => Formula::and(inputs.to_vec()),
        GateKind::Or => Formula::or(inputs.to_vec()),
        GateKind::Xor => Formula::iff(inputs[0].clone(), Formula::not(inputs[1].clone())),
        GateKind::Not => Formula::not(inputs[0].clone()),
    };
    Formula::iff(out, body)
}

struct Net {
    name: String,
    driver: Option<String>,
    consumers: Vec<String>,
}

fn net_mut<'a>(nets: &'a mut Vec<Net>, name: &str) -> &'a mut Net {
    if let Some(i) = nets.iter().position(|n| n.name == name) {
        return &mut nets[i];
    }
    nets.push(Net {
        name: name.to_string(),
        driver: None,
        consumers: Vec::new(),
    });
    nets.last_mut().unwrap()
}

fn parse_wire_value(spec: &str, line: usize) -> Result<(String, bool)> {
    let err = || Error::Format {
        line,
        msg: format!("expected <wire>=<0|1>, found {spec:?}"),
    };
    let (wire, value) = spec.split_once('=').ok_or_else(err)?;
    let value = match value.trim() {
        "0" => false,
        "1" => true,
        _ => return Err(err()),
    };
    Ok((wire.trim().to_string(), value))
}

/// Parses a gate-level netlist:
///
/// ```text
/// gate X1 xor a b -> d  @p=0.01 @c=2
/// obs a=1
/// meas d=0
/// ```
///
/// Every gate terminal gets its own variable (`in1X1`, `in2X1`, `outX1`);
/// terminals on one net are tied together by equalities in the system
/// description, and observations are stated on the net's driver (or its
/// first reader for primary inputs).
pub fn parse_netlist(text: &str) -> Result<MbdDpi> {
    let mut comps = Vec::new();
    let mut nets: Vec<Net> = Vec::new();
    let mut obs = Vec::new();
    let mut meas = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let ferr = |msg: String| Error::Format { line, msg };
        let mut words = content.split_whitespace();
        match words.next() {
            Some("gate") => {
                let name = words.next().ok_or_else(|| ferr("missing gate name".into()))?;
                let kind_str = words.next().ok_or_else(|| ferr("missing gate type".into()))?;
                let kind = GateKind::parse(kind_str)
                    .ok_or_else(|| ferr(format!("unknown gate type {kind_str:?}")))?;
                let rest: Vec<&str> = words.collect();
                let arrow = rest
                    .iter()
                    .position(|w| *w == "->")
                    .ok_or_else(|| ferr("missing '->' before the output wire".into()))?;
                let inputs = &rest[..arrow];
                let out = rest
                    .get(arrow + 1)
                    .ok_or_else(|| ferr("missing output wire".into()))?;
                if !kind.arity_ok(inputs.len()) {
                    return Err(ferr(format!("{kind_str} gate {name} has {} inputs", inputs.len())));
                }
                let mut component = {
                    let in_vars: Vec<Formula> = (1..=inputs.len())
                        .map(|k| Formula::var(format!("in{k}{name}")))
                        .collect();
                    Component::new(name, gate_behaviour(kind, &in_vars, Formula::var(format!("out{name}"))))
                };
                for ann in &rest[arrow + 2..] {
                    let value = |v: &str| {
                        v.parse::<f64>()
                            .map_err(|_| ferr(format!("bad annotation value {v:?}")))
                    };
                    if let Some(v) = ann.strip_prefix("@p=") {
                        component.fault_prob = Some(value(v)?);
                    } else if let Some(v) = ann.strip_prefix("@c=") {
                        component.cost = Some(value(v)?);
                    } else {
                        return Err(ferr(format!("unexpected token {ann:?}")));
                    }
                }
                for (k, wire) in inputs.iter().enumerate() {
                    net_mut(&mut nets, wire).consumers.push(format!("in{}{name}", k + 1));
                }
                let net = net_mut(&mut nets, out);
                if net.driver.is_some() {
                    return Err(ferr(format!("wire {out} has two drivers")));
                }
                net.driver = Some(format!("out{name}"));
                comps.push(component);
            }
            Some(kw @ ("obs" | "meas")) => {
                let spec: String = words.collect();
                let (wire, value) = parse_wire_value(&spec, line)?;
                if kw == "obs" {
                    obs.push((wire, value, line));
                } else {
                    meas.push((wire, value, line));
                }
            }
            Some(other) => return Err(ferr(format!("unknown statement {other:?}"))),
            None => unreachable!(),
        }
    }

    let mut sd_gen = Vec::new();
    let mut canonical = Vec::new();
    for net in &nets {
        let mut terminals: Vec<&String> = net.driver.iter().chain(&net.consumers).collect();
        let head = terminals.remove(0);
        for t in terminals {
            sd_gen.push(Formula::iff(Formula::var(head.clone()), Formula::var(t.clone())));
        }
        canonical.push((net.name.clone(), head.clone()));
    }
    let literal = |(wire, value, line): (String, bool, usize)| -> Result<Formula> {
        let var = canonical
            .iter()
            .find(|(n, _)| *n == wire)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Format {
                line,
                msg: format!("unknown wire {wire}"),
            })?;
        Ok(Formula::literal(&var, value))
    };
    let obs = obs.into_iter().map(literal).collect::<Result<Vec<_>>>()?;
    let meas = meas.into_iter().map(literal).collect::<Result<Vec<_>>>()?;

    let mut mbd = MbdDpi::new(comps, sd_gen, obs)?;
    for m in meas {
        mbd = mbd.with_measurement(TestCase::single(m));
    }
    Ok(mbd)
}

/// The one-bit full adder with inputs a=1, b=0, c=1 and observed outputs
/// sum=1, carry=0. Gates X1, X2 (xor), A1, A2 (and), O1 (or) carry fault
/// rates 0.01 / 0.05 / 0.02 and costs 2 / 1 / 3 by type.
pub fn circuit_fixture() -> MbdDpi {
    let p = |s: &str| parse(s).expect("fixture formula");
    let gate = |name: &str, beh: &str, prob: f64, cost: f64| {
        Component::new(name, p(beh)).with_fault_prob(prob).with_cost(cost)
    };
    let comps = vec![
        gate("X1", "outX1 <-> (in1X1 <-> !in2X1)", 0.01, 2.0),
        gate("X2", "outX2 <-> (in1X2 <-> !in2X2)", 0.01, 2.0),
        gate("A1", "outA1 <-> in1A1 & in2A1", 0.05, 1.0),
        gate("A2", "outA2 <-> in1A2 & in2A2", 0.05, 1.0),
        gate("O1", "outO1 <-> in1O1 | in2O1", 0.02, 3.0),
    ];
    let sd_gen = [
        "outX1 <-> in2A2",
        "outX1 <-> in1X2",
        "outA2 <-> in1O1",
        "in1A2 <-> in2X2",
        "in1X1 <-> in1A1",
        "in2X1 <-> in2A1",
        "outA1 <-> in2O1",
    ]
    .iter()
    .map(|s| p(s))
    .collect();
    let obs = ["in1X1", "!in2X1", "in1A2", "outX2", "!outO1"].iter().map(|s| p(s)).collect();
    MbdDpi::new(comps, sd_gen, obs).expect("fixture is well-formed")
}
