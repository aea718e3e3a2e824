use std::fmt;

use crate::bunch::Bunch;
use crate::qcalg::Channel;

use super::{BranchingTerm, Pattern, PatternType, Term, TypeExpr};

pub fn pretty_term(t: &Term) -> String {
    let mut s = String::new();
    term(t, 0, &mut s);
    s
}

pub fn pretty_branching(m: &BranchingTerm) -> String {
    let mut s = String::new();
    branching(m, &mut s);
    s
}

pub fn pretty_channel(q: &Channel) -> String {
    let mut s = String::new();
    channel(q, &mut s);
    s
}

pub fn pretty_pattern(p: &Pattern) -> String {
    match p {
        Pattern::Var(x) => x.to_string(),
        Pattern::Unit => "*".into(),
        Pattern::Pair(a, b) => format!("<{}, {}>", pretty_pattern(a), pretty_pattern(b)),
    }
}

pub fn pretty_type(t: &TypeExpr) -> String {
    let mut s = String::new();
    ty(t, 0, &mut s);
    s
}

fn ty(t: &TypeExpr, prec: u8, out: &mut String) {
    let (own, text): (u8, String) = match t {
        TypeExpr::Unit => (2, "I".into()),
        TypeExpr::Bool => (2, "bool".into()),
        TypeExpr::Qubit => (2, "qubit".into()),
        TypeExpr::QChan(p, a) => (2, format!("QChan({}, {})", pretty_type(&p.to_type()), pretty_type(a))),
        TypeExpr::Bang(a) => {
            let mut s = "!".to_string();
            ty(a, 2, &mut s);
            (2, s)
        }
        TypeExpr::Tensor(a, b) => {
            let mut s = String::new();
            ty(a, 2, &mut s);
            s.push_str(" * ");
            ty(b, 1, &mut s);
            (1, s)
        }
        TypeExpr::Lolli(a, b) => {
            let mut s = String::new();
            ty(a, 1, &mut s);
            s.push_str(" -o ");
            ty(b, 0, &mut s);
            (0, s)
        }
    };
    if own < prec {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn term(t: &Term, prec: u8, out: &mut String) {
    let own = match t {
        Term::Lambda(..) | Term::LetPair(..) | Term::If(..) => 0,
        Term::App(..) | Term::UnboxApplied(_) => 1,
        _ => 2,
    };
    if own < prec {
        out.push('(');
    }
    match t {
        Term::Var(x) => out.push_str(x.as_str()),
        Term::Unit => out.push('*'),
        Term::True => out.push_str("tt"),
        Term::False => out.push_str("ff"),
        Term::Box(p) => {
            out.push_str("box[");
            ty(&p.to_type(), 0, out);
            out.push(']');
        }
        Term::Unbox => out.push_str("unbox"),
        Term::QChan(k) => {
            out.push_str("qchan(");
            out.push_str(&pretty_pattern(&k.pattern));
            out.push_str("; ");
            channel(&k.channel, out);
            out.push_str("; ");
            branching(&k.body, out);
            out.push(')');
        }
        Term::Pair(a, b) => {
            out.push('<');
            term(a, 0, out);
            out.push_str(", ");
            term(b, 0, out);
            out.push('>');
        }
        Term::Lambda(x, b) => {
            out.push_str("fun ");
            out.push_str(x.as_str());
            out.push_str(" -> ");
            term(b, 0, out);
        }
        Term::LetPair(x, y, m, n) => {
            out.push_str(&format!("let <{x}, {y}> = "));
            term(m, 0, out);
            out.push_str(" in ");
            term(n, 0, out);
        }
        Term::If(c, a, b) => {
            out.push_str("if ");
            term(c, 0, out);
            out.push_str(" then ");
            term(a, 0, out);
            out.push_str(" else ");
            term(b, 0, out);
        }
        Term::App(f, a) => {
            term(f, 1, out);
            out.push(' ');
            term(a, 2, out);
        }
        Term::UnboxApplied(v) => {
            out.push_str("unbox ");
            term(v, 2, out);
        }
    }
    if own < prec {
        out.push(')');
    }
}

fn branching(m: &BranchingTerm, out: &mut String) {
    match m {
        Bunch::Leaf(t) => term(t, 0, out),
        Bunch::Node(a, b) => {
            out.push('[');
            branching(a, out);
            out.push_str(", ");
            branching(b, out);
            out.push(']');
        }
    }
}

fn channel(q: &Channel, out: &mut String) {
    match q {
        Channel::Eps(ws) => {
            out.push_str("eps{");
            out.push_str(&ws.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(", "));
            out.push('}');
        }
        Channel::Gate(u, ws, r) => {
            out.push_str(&format!("{u}({}); ", ws.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(", ")));
            channel(r, out);
        }
        Channel::Init(b, w, r) => {
            out.push_str(&format!("init {} {w}; ", if *b { "tt" } else { "ff" }));
            channel(r, out);
        }
        Channel::Meas(w, a, b) => {
            out.push_str(&format!("meas {w} {{ "));
            channel(a, out);
            out.push_str(" | ");
            channel(b, out);
            out.push_str(" }");
        }
        Channel::Free(w, r) => {
            out.push_str(&format!("free {w}; "));
            channel(r, out);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_term(self))
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_type(self))
    }
}

impl fmt::Display for PatternType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_type(&self.to_type()))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_pattern(self))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_channel(self))
    }
}
