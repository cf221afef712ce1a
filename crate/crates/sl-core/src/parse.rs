//! Core text grammar, one rule per line:
//!
//! ```text
//! p(x1,x2) <= \E y1 y2 . x1 -> (y1,y2) * q(y1,y2) * y2 != nil
//! ```

use thiserror::Error;

use crate::lex::{Cursor, Tok};
use crate::syntax::{Atom, Rule, Sid, SidError, SymbolicHeap, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Sid(#[from] SidError),
}

impl ParseError {
    pub fn at(line: usize, (col, msg): (usize, String)) -> ParseError {
        ParseError::Syntax { line, col: col + 1, msg }
    }
}

pub fn term(c: &mut Cursor) -> Result<Term, (usize, String)> {
    match c.peek() {
        Some(Tok::Ident(s)) if s == "nil" => {
            c.next();
            Ok(Term::Nil)
        }
        _ => c.ident().map(Term::Var),
    }
}

fn atom(c: &mut Cursor) -> Result<Atom, (usize, String)> {
    if let (Some(Tok::Ident(p)), Some(Tok::LParen)) = (c.peek(), c.peek2()) {
        if p != "nil" {
            let pred = c.ident()?;
            let args = c.list(&Tok::LParen, &Tok::RParen, term)?;
            return Ok(Atom::Pred { pred, args });
        }
    }
    let lhs = term(c)?;
    match c.next() {
        Some(Tok::Arrow) => {
            let dst = c.list(&Tok::LParen, &Tok::RParen, term)?;
            Ok(Atom::PointsTo { src: lhs, dst })
        }
        Some(Tok::Eq) => Ok(Atom::Eq(lhs, term(c)?)),
        Some(Tok::Neq) => Ok(Atom::Diseq(lhs, term(c)?)),
        _ => Err((c.offset(), "expected `->`, `=` or `!=` after term".into())),
    }
}

fn formula(c: &mut Cursor) -> Result<SymbolicHeap, (usize, String)> {
    let mut bound = Vec::new();
    while c.eat(&Tok::Exists) {
        while !c.eat(&Tok::Dot) {
            bound.push(c.ident()?);
        }
    }
    let mut atoms = Vec::new();
    if matches!(c.peek(), Some(Tok::Ident(s)) if s == "emp") && c.peek2() != Some(&Tok::LParen) {
        c.next();
    } else {
        atoms.push(atom(c)?);
        while c.eat(&Tok::Star) {
            atoms.push(atom(c)?);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for b in &bound {
        if !seen.insert(b) {
            return Err((0, format!("bound variable {} repeated", b)));
        }
    }
    Ok(SymbolicHeap { bound, atoms })
}

fn finish<T>(c: &Cursor, v: T) -> Result<T, (usize, String)> {
    if c.at_end() {
        Ok(v)
    } else {
        Err(c.unexpected("end of input"))
    }
}

pub fn parse_formula(src: &str) -> Result<SymbolicHeap, ParseError> {
    let go = || {
        let mut c = Cursor::new(src)?;
        let f = formula(&mut c)?;
        finish(&c, f)
    };
    go().map_err(|e| ParseError::at(1, e))
}

/// A single predicate atom such as `p(x,y)`.
pub fn parse_atom(src: &str) -> Result<(String, Vec<Term>), ParseError> {
    let go = || {
        let mut c = Cursor::new(src)?;
        let pred = c.ident()?;
        let args = c.list(&Tok::LParen, &Tok::RParen, term)?;
        finish(&c, (pred, args))
    };
    go().map_err(|e| ParseError::at(1, e))
}

pub fn rule_in(c: &mut Cursor) -> Result<Rule, (usize, String)> {
    let head = c.ident()?;
    let params = c.list(&Tok::LParen, &Tok::RParen, |c| c.ident())?;
    c.expect(&Tok::Def)?;
    let body = formula(c)?;
    finish(c, Rule { head, params, body })
}

pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let go = || {
        let mut c = Cursor::new(src)?;
        rule_in(&mut c)
    };
    go().map_err(|e| ParseError::at(1, e))
}

/// Parses a whole file; blank lines and `#` comments are skipped.
pub fn parse_sid(src: &str) -> Result<Sid, ParseError> {
    let mut rules = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let mut c = Cursor::new(line).map_err(|e| ParseError::at(i + 1, e))?;
        if c.at_end() {
            continue;
        }
        rules.push(rule_in(&mut c).map_err(|e| ParseError::at(i + 1, e))?);
    }
    Ok(Sid::new(rules)?)
}
