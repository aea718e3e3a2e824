//! JSON and DOT exports of channels, configurations and denotations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bunch::Bunch;
use crate::denot::Branching;
use crate::eval::Configuration;
use crate::qcalg::{Channel, GateName};
use crate::scalar::Real;
use crate::syntax::{parse_term, SyntaxError, VarName, WireSet};

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Serialized form of a [`Channel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelDocument {
    Eps {
        wires: Vec<String>,
    },
    Gate {
        gate: String,
        wires: Vec<String>,
        rest: Box<ChannelDocument>,
    },
    Init {
        bit: u8,
        wire: String,
        rest: Box<ChannelDocument>,
    },
    Meas {
        wire: String,
        #[serde(rename = "ifTrue")]
        if_true: Box<ChannelDocument>,
        #[serde(rename = "ifFalse")]
        if_false: Box<ChannelDocument>,
    },
    Free {
        wire: String,
        rest: Box<ChannelDocument>,
    },
}

impl ChannelDocument {
    pub fn from_channel(q: &Channel) -> Self {
        let s = |w: &VarName| w.as_str().to_string();
        match q {
            Channel::Eps(v) => ChannelDocument::Eps { wires: v.iter().map(s).collect() },
            Channel::Gate(g, ws, rest) => ChannelDocument::Gate {
                gate: g.0.clone(),
                wires: ws.iter().map(s).collect(),
                rest: Box::new(Self::from_channel(rest)),
            },
            Channel::Init(b, w, rest) => ChannelDocument::Init { bit: u8::from(*b), wire: s(w), rest: Box::new(Self::from_channel(rest)) },
            Channel::Meas(w, a, b) => ChannelDocument::Meas {
                wire: s(w),
                if_true: Box::new(Self::from_channel(a)),
                if_false: Box::new(Self::from_channel(b)),
            },
            Channel::Free(w, rest) => ChannelDocument::Free { wire: s(w), rest: Box::new(Self::from_channel(rest)) },
        }
    }

    pub fn to_channel(&self) -> Result<Channel, InterchangeError> {
        let v = |w: &str| VarName::raw(w);
        Ok(match self {
            ChannelDocument::Eps { wires } => {
                let set: WireSet = wires.iter().map(|w| v(w)).collect();
                if set.len() != wires.len() {
                    return Err(InterchangeError::Malformed("repeated wire in eps".into()));
                }
                Channel::Eps(set)
            }
            ChannelDocument::Gate { gate, wires, rest } => {
                Channel::Gate(GateName(gate.clone()), wires.iter().map(|w| v(w)).collect(), Box::new(rest.to_channel()?))
            }
            ChannelDocument::Init { bit, wire, rest } => {
                let b = match bit {
                    0 => false,
                    1 => true,
                    _ => return Err(InterchangeError::Malformed(format!("init bit {bit}"))),
                };
                Channel::Init(b, v(wire), Box::new(rest.to_channel()?))
            }
            ChannelDocument::Meas { wire, if_true, if_false } => {
                Channel::Meas(v(wire), Box::new(if_true.to_channel()?), Box::new(if_false.to_channel()?))
            }
            ChannelDocument::Free { wire, rest } => Channel::Free(v(wire), Box::new(rest.to_channel()?)),
        })
    }
}

pub fn channel_to_json(q: &Channel) -> String {
    serde_json::to_string_pretty(&ChannelDocument::from_channel(q)).expect("channel documents serialize")
}

pub fn channel_from_json(s: &str) -> Result<Channel, InterchangeError> {
    serde_json::from_str::<ChannelDocument>(s)?.to_channel()
}

/// A branching term with leaves printed in surface syntax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BranchingDocument {
    Leaf(String),
    Node(Box<BranchingDocument>, Box<BranchingDocument>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationDocument {
    pub channel: ChannelDocument,
    pub term: BranchingDocument,
}

fn branching_doc(m: &Bunch<crate::syntax::Term>) -> BranchingDocument {
    match m {
        Bunch::Leaf(t) => BranchingDocument::Leaf(t.to_string()),
        Bunch::Node(a, b) => BranchingDocument::Node(Box::new(branching_doc(a)), Box::new(branching_doc(b))),
    }
}

fn branching_from_doc(d: &BranchingDocument) -> Result<Bunch<crate::syntax::Term>, InterchangeError> {
    Ok(match d {
        BranchingDocument::Leaf(s) => Bunch::Leaf(parse_term(s)?),
        BranchingDocument::Node(a, b) => Bunch::node(branching_from_doc(a)?, branching_from_doc(b)?),
    })
}

impl ConfigurationDocument {
    pub fn from_configuration(c: &Configuration) -> Self {
        ConfigurationDocument { channel: ChannelDocument::from_channel(&c.channel), term: branching_doc(&c.term) }
    }

    pub fn to_configuration(&self) -> Result<Configuration, InterchangeError> {
        Ok(Configuration::new(self.channel.to_channel()?, branching_from_doc(&self.term)?))
    }
}

pub fn configuration_to_json(c: &Configuration) -> String {
    serde_json::to_string(&ConfigurationDocument::from_configuration(c)).expect("configurations serialize")
}

pub fn configuration_from_json(s: &str) -> Result<Configuration, InterchangeError> {
    serde_json::from_str::<ConfigurationDocument>(s)?.to_configuration()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn wire_label(w: &WireSet) -> String {
    let names: Vec<&str> = w.iter().map(VarName::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

/// The channel tree of a configuration as a DOT graph. Edges carry the wire
/// set flowing along them; leaves show the matching term.
pub fn configuration_to_dot(c: &Configuration) -> String {
    let mut out = String::from("digraph configuration {\n  node [shape=box, fontname=\"monospace\"];\n");
    let inputs = c.channel.in_wires().unwrap_or_default();
    out.push_str("  in [shape=plaintext, label=\"in\"];\n");
    let terms: Vec<String> = c.term.leaves().iter().map(|t| t.to_string()).collect();
    let mut next = 0usize;
    let mut leaf = 0usize;
    let root = dot_node(&c.channel, &inputs, &terms, &mut next, &mut leaf, &mut out);
    let _ = writeln!(out, "  in -> n{root} [label=\"{}\"];", dot_escape(&wire_label(&inputs)));
    out.push_str("}\n");
    out
}

fn dot_node(q: &Channel, wires: &WireSet, terms: &[String], next: &mut usize, leaf: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    let edge = |out: &mut String, from: usize, to: usize, w: &WireSet, tag: &str| {
        let _ = writeln!(out, "  n{from} -> n{to} [label=\"{}{}\"];", tag, dot_escape(&wire_label(w)));
    };
    match q {
        Channel::Eps(_) => {
            let t = terms.get(*leaf).cloned().unwrap_or_default();
            *leaf += 1;
            let _ = writeln!(out, "  n{id} [shape=ellipse, label=\"{}\"];", dot_escape(&t));
        }
        Channel::Gate(g, ws, rest) => {
            let names: Vec<&str> = ws.iter().map(VarName::as_str).collect();
            let _ = writeln!(out, "  n{id} [label=\"{}({})\"];", dot_escape(&g.0), dot_escape(&names.join(", ")));
            let child = dot_node(rest, wires, terms, next, leaf, out);
            edge(out, id, child, wires, "");
        }
        Channel::Init(b, w, rest) => {
            let _ = writeln!(out, "  n{id} [label=\"init {} {}\"];", if *b { "tt" } else { "ff" }, dot_escape(w.as_str()));
            let mut after = wires.clone();
            after.insert(w.clone());
            let child = dot_node(rest, &after, terms, next, leaf, out);
            edge(out, id, child, &after, "");
        }
        Channel::Free(w, rest) => {
            let _ = writeln!(out, "  n{id} [label=\"free {}\"];", dot_escape(w.as_str()));
            let mut after = wires.clone();
            after.remove(w);
            let child = dot_node(rest, &after, terms, next, leaf, out);
            edge(out, id, child, &after, "");
        }
        Channel::Meas(w, a, b) => {
            let _ = writeln!(out, "  n{id} [shape=diamond, label=\"meas {}\"];", dot_escape(w.as_str()));
            let ca = dot_node(a, wires, terms, next, leaf, out);
            edge(out, id, ca, wires, "tt: ");
            let cb = dot_node(b, wires, terms, next, leaf, out);
            edge(out, id, cb, wires, "ff: ");
        }
    }
    id
}

/// One outcome of a denotation, with the Choi matrix of its map from the
/// input register, rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeDocument {
    pub index: String,
    pub input_qubits: usize,
    pub output_qubits: usize,
    pub choi: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DenotationDocument {
    pub input_wires: Vec<String>,
    pub image: Vec<String>,
    pub outcomes: Vec<OutcomeDocument>,
}

/// Describes a branching over a single input register with single-register outcomes.
pub fn denotation_document<T: Real>(inputs: &WireSet, r: &Branching<T>) -> Result<DenotationDocument, InterchangeError> {
    if r.dom().len() != 1 {
        return Err(InterchangeError::Malformed("denotation domain is not a single register".into()));
    }
    let mut outcomes = vec![];
    for (j, x) in r.outcomes.iter().enumerate() {
        let comp = r.component(j);
        if comp.cod.len() != 1 {
            return Err(InterchangeError::Malformed(format!("outcome {x} is not a single register")));
        }
        let (nin, nout) = (comp.dom[0], comp.cod[0]);
        let choi = match comp.get(0, 0) {
            Some(s) => s.choi(),
            None => crate::linalg::CMatrix::zeros(1 << (nin + nout), 1 << (nin + nout)),
        };
        let rows = (0..choi.rows())
            .map(|i| (0..choi.cols()).map(|k| [choi[(i, k)].re.to_f64_lossy(), choi[(i, k)].im.to_f64_lossy()]).collect())
            .collect();
        outcomes.push(OutcomeDocument { index: x.to_string(), input_qubits: nin, output_qubits: nout, choi: rows });
    }
    Ok(DenotationDocument {
        input_wires: inputs.iter().map(|w| w.as_str().to_string()).collect(),
        image: outcomes.iter().map(|o| o.index.clone()).collect(),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_channel, parse_term};

    #[test]
    fn channel_json_shape() {
        let q = parse_channel("meas v { init tt d; free v; eps{d} | eps{v} }").unwrap();
        let s = serde_json::to_string(&ChannelDocument::from_channel(&q)).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"meas","wire":"v","ifTrue":{"kind":"init","bit":1,"wire":"d","rest":{"kind":"free","wire":"v","rest":{"kind":"eps","wires":["d"]}}},"ifFalse":{"kind":"eps","wires":["v"]}}"#
        );
        assert_eq!(channel_from_json(&s).unwrap(), q);
    }

    #[test]
    fn rejects_bad_bits_and_unknown_kinds() {
        assert!(channel_from_json(r#"{"kind":"init","bit":2,"wire":"a","rest":{"kind":"eps","wires":["a"]}}"#).is_err());
        assert!(channel_from_json(r#"{"kind":"swap","wires":[]}"#).is_err());
    }

    #[test]
    fn configuration_round_trip() {
        let c = Configuration::new(
            parse_channel("meas v { eps{v} | eps{v} }").unwrap(),
            Bunch::node(Bunch::Leaf(parse_term("<tt, v>").unwrap()), Bunch::Leaf(parse_term("<ff, v>").unwrap())),
        );
        assert_eq!(configuration_from_json(&configuration_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn dot_lists_every_node() {
        let c = Configuration::new(
            parse_channel("meas v { eps{v} | H(v); eps{v} }").unwrap(),
            Bunch::node(Bunch::Leaf(parse_term("v").unwrap()), Bunch::Leaf(parse_term("v").unwrap())),
        );
        let d = configuration_to_dot(&c);
        assert!(d.contains("meas v") && d.contains("H(v)") && d.contains("tt: {v}") && d.contains("in -> n0"));
        assert_eq!(d, configuration_to_dot(&c));
    }
}
