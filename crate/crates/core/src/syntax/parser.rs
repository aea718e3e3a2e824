use std::collections::BTreeSet;

use crate::bunch::Bunch;
use crate::qcalg::{standard_arity, Channel, GateName};

use super::lexer::{lex, Token, TokenKind};
use super::{macros, BranchingTerm, Pattern, PatternType, SyntaxError, Term, TypeExpr, VarName, RESERVED};

/// A source file: declared inputs followed by the program term.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub inputs: Vec<(VarName, TypeExpr)>,
    pub term: Term,
}

pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(src)?;
    let mut inputs = Vec::new();
    while p.peek_ident("input") {
        p.bump();
        let x = p.var_name()?;
        p.expect(&TokenKind::Colon)?;
        let t = p.ty()?;
        p.expect(&TokenKind::Semi)?;
        if inputs.iter().any(|(y, _)| *y == x) {
            return Err(p.error(format!("input `{x}` declared twice")));
        }
        inputs.push((x, t));
    }
    let term = p.term()?;
    p.expect(&TokenKind::Eof)?;
    Ok(Program { inputs, term })
}

pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    Parser::new(src)?.finish(|p| p.term())
}

pub fn parse_type(src: &str) -> Result<TypeExpr, SyntaxError> {
    Parser::new(src)?.finish(|p| p.ty())
}

pub fn parse_pattern_type(src: &str) -> Result<PatternType, SyntaxError> {
    Parser::new(src)?.finish(|p| p.pattern_type())
}

pub fn parse_channel(src: &str) -> Result<Channel, SyntaxError> {
    Parser::new(src)?.finish(|p| p.channel())
}

pub fn parse_pattern(src: &str) -> Result<Pattern, SyntaxError> {
    Parser::new(src)?.finish(|p| p.pattern())
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn finish<T>(mut self, f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>) -> Result<T, SyntaxError> {
        let v = f(&mut self)?;
        self.expect(&TokenKind::Eof)?;
        Ok(v)
    }

    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_ident(&self, s: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(x) if x == s)
    }

    fn bump(&mut self) -> TokenKind {
        let k = self.toks[self.pos].kind.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        k
    }

    fn error(&self, message: String) -> SyntaxError {
        let s = self.toks[self.pos].span;
        SyntaxError::Parse { line: s.line, column: s.column, message }
    }

    fn expect(&mut self, k: &TokenKind) -> Result<(), SyntaxError> {
        if self.peek() == k {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", describe(k), describe(self.peek()))))
        }
    }

    fn eat(&mut self, k: &TokenKind) -> bool {
        if self.peek() == k {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.peek_ident(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                self.bump();
                Ok(s)
            }
            k => Err(self.error(format!("expected identifier, found {}", describe(&k)))),
        }
    }

    fn var_name(&mut self) -> Result<VarName, SyntaxError> {
        let s = self.ident()?;
        if RESERVED.contains(&s.as_str()) {
            self.pos -= 1;
            return Err(self.error(format!("`{s}` is a keyword")));
        }
        VarName::new(&s)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        if self.peek_ident("fun") {
            self.bump();
            let x = self.var_name()?;
            if !self.eat(&TokenKind::Arrow) {
                return Err(self.error("expected `->` after the lambda binder".into()));
            }
            let body = self.term()?;
            return Ok(Term::Lambda(x, Box::new(body)));
        }
        if self.peek_ident("let") {
            self.bump();
            self.expect(&TokenKind::LAngle)?;
            let x = self.var_name()?;
            self.expect(&TokenKind::Comma)?;
            let y = self.var_name()?;
            self.expect(&TokenKind::RAngle)?;
            if x == y {
                return Err(self.error(format!("pattern binds `{x}` twice")));
            }
            self.expect(&TokenKind::Equals)?;
            let bound = self.term()?;
            self.expect_keyword("in")?;
            let body = self.term()?;
            return Ok(Term::LetPair(x, y, Box::new(bound), Box::new(body)));
        }
        if self.peek_ident("if") {
            self.bump();
            let c = self.term()?;
            self.expect_keyword("then")?;
            let a = self.term()?;
            self.expect_keyword("else")?;
            let b = self.term()?;
            return Ok(Term::if_(c, a, b));
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            TokenKind::Ident(s) => !matches!(s.as_str(), "in" | "then" | "else" | "fun" | "let" | "if" | "input"),
            TokenKind::Star | TokenKind::LAngle | TokenKind::LParen => true,
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Star => {
                self.bump();
                Ok(Term::Unit)
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&TokenKind::RParen)?;
                Ok(t)
            }
            TokenKind::LAngle => {
                self.bump();
                let a = self.term()?;
                self.expect(&TokenKind::Comma)?;
                let b = self.term()?;
                self.expect(&TokenKind::RAngle)?;
                Ok(Term::pair(a, b))
            }
            TokenKind::Ident(s) => match s.as_str() {
                "tt" => {
                    self.bump();
                    Ok(Term::True)
                }
                "ff" => {
                    self.bump();
                    Ok(Term::False)
                }
                "unbox" => {
                    self.bump();
                    Ok(Term::Unbox)
                }
                "box" => {
                    self.bump();
                    self.expect(&TokenKind::LBracket)?;
                    let p = self.pattern_type()?;
                    self.expect(&TokenKind::RBracket)?;
                    Ok(Term::Box(p))
                }
                "meas" => {
                    self.bump();
                    Ok(macros::meas())
                }
                "free" => {
                    self.bump();
                    Ok(macros::free())
                }
                "init_tt" | "init_ff" => {
                    self.bump();
                    Ok(macros::init(s == "init_tt"))
                }
                "gate" => {
                    self.bump();
                    let g = GateName::new(&self.ident()?);
                    let Some(n) = standard_arity(&g) else {
                        self.pos -= 1;
                        return Err(self.error(format!("unknown gate `{g}`")));
                    };
                    Ok(macros::gate(&g, n))
                }
                "qchan" => {
                    self.bump();
                    self.expect(&TokenKind::LParen)?;
                    let p = self.pattern()?;
                    if let Some(x) = p.has_duplicates() {
                        return Err(self.error(format!("pattern binds `{x}` twice")));
                    }
                    self.expect(&TokenKind::Semi)?;
                    let q = self.channel()?;
                    self.expect(&TokenKind::Semi)?;
                    let m = self.branching()?;
                    self.expect(&TokenKind::RParen)?;
                    Ok(Term::qchan(p, q, m))
                }
                _ => Ok(Term::Var(self.var_name()?)),
            },
            k => Err(self.error(format!("expected a term, found {}", describe(&k)))),
        }
    }

    fn branching(&mut self) -> Result<BranchingTerm, SyntaxError> {
        if self.eat(&TokenKind::LBracket) {
            let a = self.branching()?;
            self.expect(&TokenKind::Comma)?;
            let b = self.branching()?;
            self.expect(&TokenKind::RBracket)?;
            Ok(Bunch::node(a, b))
        } else {
            Ok(Bunch::Leaf(self.term()?))
        }
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Star => {
                self.bump();
                Ok(Pattern::Unit)
            }
            TokenKind::LParen => {
                self.bump();
                let p = self.pattern()?;
                self.expect(&TokenKind::RParen)?;
                Ok(p)
            }
            TokenKind::LAngle => {
                self.bump();
                let a = self.pattern()?;
                self.expect(&TokenKind::Comma)?;
                let b = self.pattern()?;
                self.expect(&TokenKind::RAngle)?;
                Ok(Pattern::pair(a, b))
            }
            _ => Ok(Pattern::Var(self.var_name()?)),
        }
    }

    fn wire_list(&mut self, close: &TokenKind) -> Result<Vec<VarName>, SyntaxError> {
        let mut ws = Vec::new();
        if self.eat(close) {
            return Ok(ws);
        }
        loop {
            ws.push(self.var_name()?);
            if self.eat(close) {
                return Ok(ws);
            }
            self.expect(&TokenKind::Comma)?;
        }
    }

    fn channel(&mut self) -> Result<Channel, SyntaxError> {
        let head = self.ident()?;
        match head.as_str() {
            "eps" => {
                self.expect(&TokenKind::LBrace)?;
                let ws = self.wire_list(&TokenKind::RBrace)?;
                let set: BTreeSet<VarName> = ws.iter().cloned().collect();
                if set.len() != ws.len() {
                    return Err(self.error("repeated wire in leaf".into()));
                }
                Ok(Channel::Eps(set))
            }
            "init" => {
                let b = match self.ident()?.as_str() {
                    "tt" | "true" | "1" => true,
                    "ff" | "false" | "0" => false,
                    other => return Err(self.error(format!("expected a bit, found `{other}`"))),
                };
                let w = self.var_name()?;
                self.expect(&TokenKind::Semi)?;
                Ok(Channel::Init(b, w, Box::new(self.channel()?)))
            }
            "meas" => {
                let w = self.var_name()?;
                self.expect(&TokenKind::LBrace)?;
                let a = self.channel()?;
                self.expect(&TokenKind::Bar)?;
                let b = self.channel()?;
                self.expect(&TokenKind::RBrace)?;
                Ok(Channel::Meas(w, Box::new(a), Box::new(b)))
            }
            "free" => {
                let w = self.var_name()?;
                self.expect(&TokenKind::Semi)?;
                Ok(Channel::Free(w, Box::new(self.channel()?)))
            }
            _ => {
                self.expect(&TokenKind::LParen)?;
                let ws = self.wire_list(&TokenKind::RParen)?;
                self.expect(&TokenKind::Semi)?;
                Ok(Channel::Gate(GateName::new(&head), ws, Box::new(self.channel()?)))
            }
        }
    }

    fn ty(&mut self) -> Result<TypeExpr, SyntaxError> {
        let a = self.tensor_ty()?;
        if self.eat(&TokenKind::Lolli) {
            let b = self.ty()?;
            Ok(TypeExpr::lolli(a, b))
        } else {
            Ok(a)
        }
    }

    fn tensor_ty(&mut self) -> Result<TypeExpr, SyntaxError> {
        let a = self.unary_ty()?;
        if self.eat(&TokenKind::Star) {
            let b = self.tensor_ty()?;
            Ok(TypeExpr::tensor(a, b))
        } else {
            Ok(a)
        }
    }

    fn unary_ty(&mut self) -> Result<TypeExpr, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Bang => {
                self.bump();
                Ok(TypeExpr::bang(self.unary_ty()?))
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&TokenKind::RParen)?;
                Ok(t)
            }
            TokenKind::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "I" => Ok(TypeExpr::Unit),
                    "bool" => Ok(TypeExpr::Bool),
                    "qubit" => Ok(TypeExpr::Qubit),
                    "QChan" => {
                        self.expect(&TokenKind::LParen)?;
                        let p = self.pattern_type()?;
                        self.expect(&TokenKind::Comma)?;
                        let a = self.ty()?;
                        self.expect(&TokenKind::RParen)?;
                        Ok(TypeExpr::qchan(p, a))
                    }
                    other => {
                        self.pos -= 1;
                        Err(self.error(format!("unknown type `{other}`")))
                    }
                }
            }
            k => Err(self.error(format!("expected a type, found {}", describe(&k)))),
        }
    }

    fn pattern_type(&mut self) -> Result<PatternType, SyntaxError> {
        let t = self.ty()?;
        PatternType::from_type(&t).ok_or_else(|| self.error(format!("`{}` is not a pattern type", super::pretty::pretty_type(&t))))
    }
}

fn describe(k: &TokenKind) -> String {
    match k {
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::LAngle => "`<`".into(),
        TokenKind::RAngle => "`>`".into(),
        TokenKind::LParen => "`(`".into(),
        TokenKind::RParen => "`)`".into(),
        TokenKind::LBracket => "`[`".into(),
        TokenKind::RBracket => "`]`".into(),
        TokenKind::LBrace => "`{`".into(),
        TokenKind::RBrace => "`}`".into(),
        TokenKind::Comma => "`,`".into(),
        TokenKind::Semi => "`;`".into(),
        TokenKind::Colon => "`:`".into(),
        TokenKind::Bar => "`|`".into(),
        TokenKind::Equals => "`=`".into(),
        TokenKind::Star => "`*`".into(),
        TokenKind::Bang => "`!`".into(),
        TokenKind::Arrow => "`->`".into(),
        TokenKind::Lolli => "`-o`".into(),
        TokenKind::Eof => "end of input".into(),
    }
}
