//! Extended rules and their text form.
//!
//! ```text
//! c1(x) <= \Eb b1 . \E y . x -> [y]^2 * d1(y,one,b1,~b1)
//! f(x,c1) <= \E e1 y . x -> (e1,y) * r(y) | (e1) != ~(c1)
//! ```
//! `@` is a binary choice, `[t..]^m` prefixes m nil fields, `~b` is the
//! complement of a binary variable.

use std::collections::BTreeSet;
use std::fmt;

use sl_core::lex::{Cursor, Tok};
use sl_core::parse::{term, ParseError};
use sl_core::Term;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ETerm {
    Var(String),
    Nil,
    Choice,
    Compl(String),
}

impl ETerm {
    pub fn var(v: impl Into<String>) -> ETerm {
        ETerm::Var(v.into())
    }

    pub fn from_term(t: &Term) -> ETerm {
        match t {
            Term::Var(v) => ETerm::Var(v.clone()),
            Term::Nil => ETerm::Nil,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            ETerm::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn vars(&self) -> Option<&str> {
        match self {
            ETerm::Var(v) | ETerm::Compl(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ETerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ETerm::Var(v) => f.write_str(v),
            ETerm::Nil => f.write_str("nil"),
            ETerm::Choice => f.write_str("@"),
            ETerm::Compl(v) => write!(f, "~{}", v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EAtom {
    /// `src -> (nil^hat, fields)`
    PointsTo { src: Term, hat: usize, fields: Vec<ETerm> },
    Pred { pred: String, args: Vec<ETerm> },
    Eq(Term, Term),
    Diseq(Term, Term),
}

impl EAtom {
    pub fn pts(src: &str, hat: usize, fields: Vec<ETerm>) -> EAtom {
        EAtom::PointsTo { src: Term::var(src), hat, fields }
    }

    pub fn call(pred: impl Into<String>, args: Vec<ETerm>) -> EAtom {
        EAtom::Pred { pred: pred.into(), args }
    }

    /// Length of the tuple, nil prefix included.
    pub fn width(&self) -> Option<usize> {
        match self {
            EAtom::PointsTo { hat, fields, .. } => Some(hat + fields.len()),
            _ => None,
        }
    }

    pub fn eterms(&self) -> Vec<ETerm> {
        match self {
            EAtom::PointsTo { src, fields, .. } => {
                let mut v = vec![ETerm::from_term(src)];
                v.extend(fields.iter().cloned());
                v
            }
            EAtom::Pred { args, .. } => args.clone(),
            EAtom::Eq(a, b) | EAtom::Diseq(a, b) => vec![ETerm::from_term(a), ETerm::from_term(b)],
        }
    }

    pub fn map(&self, f: &impl Fn(&ETerm) -> ETerm) -> EAtom {
        let core = |t: &Term| match f(&ETerm::from_term(t)) {
            ETerm::Var(v) => Term::Var(v),
            ETerm::Nil => Term::Nil,
            other => panic!("{} in core position", other),
        };
        match self {
            EAtom::PointsTo { src, hat, fields } => {
                EAtom::PointsTo { src: core(src), hat: *hat, fields: fields.iter().map(f).collect() }
            }
            EAtom::Pred { pred, args } => EAtom::Pred { pred: pred.clone(), args: args.iter().map(f).collect() },
            EAtom::Eq(a, b) => EAtom::Eq(core(a), core(b)),
            EAtom::Diseq(a, b) => EAtom::Diseq(core(a), core(b)),
        }
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for EAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EAtom::PointsTo { src, hat: 0, fields } => write!(f, "{} -> ({})", src, join(fields)),
            EAtom::PointsTo { src, hat, fields } => write!(f, "{} -> [{}]^{}", src, join(fields), hat),
            EAtom::Pred { pred, args } => write!(f, "{}({})", pred, join(args)),
            EAtom::Eq(a, b) => write!(f, "{} = {}", a, b),
            EAtom::Diseq(a, b) => write!(f, "{} != {}", a, b),
        }
    }
}

/// `(e1,..,en) != ~(c1,..,cn)`: some ei equals ci.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SideCond {
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtendedRule {
    pub head: String,
    pub params: Vec<String>,
    /// (b, complement of b) parameter pairs threaded by earlier expansion.
    pub binary_params: Vec<(String, String)>,
    pub binary_exists: Vec<String>,
    pub exists: Vec<String>,
    pub atoms: Vec<EAtom>,
    pub side: Option<SideCond>,
}

impl ExtendedRule {
    pub fn new(head: impl Into<String>, params: Vec<String>, exists: Vec<String>, atoms: Vec<EAtom>) -> ExtendedRule {
        ExtendedRule {
            head: head.into(),
            params,
            binary_params: Vec::new(),
            binary_exists: Vec::new(),
            exists,
            atoms,
            side: None,
        }
    }

    pub fn with_binary(mut self, bs: Vec<String>) -> Self {
        self.binary_exists = bs;
        self
    }

    pub fn with_side(mut self, lhs: Vec<String>, rhs: Vec<String>) -> Self {
        self.side = Some(SideCond { lhs, rhs });
        self
    }

    pub fn points_to(&self) -> impl Iterator<Item = &EAtom> {
        self.atoms.iter().filter(|a| matches!(a, EAtom::PointsTo { .. }))
    }

    /// Every name used by the rule.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.params.iter().cloned().collect();
        out.extend(self.exists.iter().cloned());
        out.extend(self.binary_exists.iter().cloned());
        for a in &self.atoms {
            for t in a.eterms() {
                if let Some(v) = t.vars() {
                    out.insert(v.to_string());
                }
            }
        }
        if let Some(s) = &self.side {
            out.extend(s.lhs.iter().cloned());
            out.extend(s.rhs.iter().cloned());
        }
        out
    }

    pub fn preds(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.head.as_str()).chain(self.atoms.iter().filter_map(|a| match a {
            EAtom::Pred { pred, .. } => Some(pred.as_str()),
            _ => None,
        }))
    }
}

impl fmt::Display for ExtendedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) <= ", self.head, self.params.join(","))?;
        if !self.binary_exists.is_empty() {
            write!(f, "\\Eb {} . ", self.binary_exists.join(" "))?;
        }
        if !self.exists.is_empty() {
            write!(f, "\\E {} . ", self.exists.join(" "))?;
        }
        if self.atoms.is_empty() {
            f.write_str("emp")?;
        } else {
            let parts: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
            f.write_str(&parts.join(" * "))?;
        }
        if let Some(s) = &self.side {
            write!(f, " | ({}) != ~({})", s.lhs.join(","), s.rhs.join(","))?;
        }
        Ok(())
    }
}

fn eterm(c: &mut Cursor) -> Result<ETerm, (usize, String)> {
    if c.eat(&Tok::At) {
        return Ok(ETerm::Choice);
    }
    if c.eat(&Tok::Tilde) {
        return Ok(ETerm::Compl(c.ident()?));
    }
    term(c).map(|t| ETerm::from_term(&t))
}

fn core_term(c: &mut Cursor) -> Result<Term, (usize, String)> {
    term(c)
}

fn hat_tuple(c: &mut Cursor) -> Result<(usize, Vec<ETerm>), (usize, String)> {
    let fields = c.list(&Tok::LBrack, &Tok::RBrack, eterm)?;
    c.expect(&Tok::Caret)?;
    Ok((c.num()?, fields))
}

fn eatom(c: &mut Cursor) -> Result<EAtom, (usize, String)> {
    if let (Some(Tok::Ident(p)), Some(Tok::LParen)) = (c.peek(), c.peek2()) {
        if p != "nil" {
            let pred = c.ident()?;
            let args = c.list(&Tok::LParen, &Tok::RParen, eterm)?;
            return Ok(EAtom::Pred { pred, args });
        }
    }
    let lhs = core_term(c)?;
    match c.next() {
        Some(Tok::Arrow) => {
            if c.peek() == Some(&Tok::LBrack) {
                let (hat, fields) = hat_tuple(c)?;
                return Ok(EAtom::PointsTo { src: lhs, hat, fields });
            }
            // `(a, [b]^2)` nests a hat tuple inside ordinary parentheses
            c.expect(&Tok::LParen)?;
            let mut hat = 0;
            let mut fields = Vec::new();
            loop {
                if c.peek() == Some(&Tok::LBrack) {
                    let (h, fs) = hat_tuple(c)?;
                    if !fields.iter().all(|f| *f == ETerm::Nil) {
                        return Err((c.offset(), "hat tuple must come first".into()));
                    }
                    hat += fields.len() + h;
                    fields = fs;
                } else {
                    fields.push(eterm(c)?);
                }
                if c.eat(&Tok::RParen) {
                    break;
                }
                c.expect(&Tok::Comma)?;
            }
            Ok(EAtom::PointsTo { src: lhs, hat, fields })
        }
        Some(Tok::Eq) => Ok(EAtom::Eq(lhs, core_term(c)?)),
        Some(Tok::Neq) => Ok(EAtom::Diseq(lhs, core_term(c)?)),
        _ => Err((c.offset(), "expected `->`, `=` or `!=`".into())),
    }
}

fn rule(c: &mut Cursor) -> Result<ExtendedRule, (usize, String)> {
    let head = c.ident()?;
    let params = c.list(&Tok::LParen, &Tok::RParen, |c| c.ident())?;
    c.expect(&Tok::Def)?;
    let mut r = ExtendedRule::new(head, params, Vec::new(), Vec::new());
    loop {
        if c.eat(&Tok::ExistsBin) {
            while !c.eat(&Tok::Dot) {
                r.binary_exists.push(c.ident()?);
            }
        } else if c.eat(&Tok::Exists) {
            while !c.eat(&Tok::Dot) {
                r.exists.push(c.ident()?);
            }
        } else {
            break;
        }
    }
    if matches!(c.peek(), Some(Tok::Ident(s)) if s == "emp") && c.peek2() != Some(&Tok::LParen) {
        c.next();
    } else {
        r.atoms.push(eatom(c)?);
        while c.eat(&Tok::Star) {
            r.atoms.push(eatom(c)?);
        }
    }
    if c.eat(&Tok::Bar) {
        let lhs = c.list(&Tok::LParen, &Tok::RParen, |c| c.ident())?;
        c.expect(&Tok::Neq)?;
        c.expect(&Tok::Tilde)?;
        let rhs = c.list(&Tok::LParen, &Tok::RParen, |c| c.ident())?;
        r.side = Some(SideCond { lhs, rhs });
    }
    if !c.at_end() {
        return Err(c.unexpected("end of rule"));
    }
    Ok(r)
}

pub fn parse_extended_rule(src: &str) -> Result<ExtendedRule, ParseError> {
    let go = || {
        let mut c = Cursor::new(src)?;
        rule(&mut c)
    };
    go().map_err(|e| ParseError::at(1, e))
}

pub fn parse_extended(src: &str) -> Result<Vec<ExtendedRule>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let mut c = Cursor::new(line).map_err(|e| ParseError::at(i + 1, e))?;
        if c.at_end() {
            continue;
        }
        out.push(rule(&mut c).map_err(|e| ParseError::at(i + 1, e))?);
    }
    Ok(out)
}
