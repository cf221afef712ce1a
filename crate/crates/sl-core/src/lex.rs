//! Tokenizer shared by the core and the extended rule grammar.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Arrow,
    Star,
    Eq,
    Neq,
    Def,
    Exists,
    ExistsBin,
    Dot,
    At,
    Caret,
    Bar,
    Tilde,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return f.write_str(s),
            Tok::Num(n) => return write!(f, "{}", n),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Arrow => "->",
            Tok::Star => "*",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Def => "<=",
            Tok::Exists => "\\E",
            Tok::ExistsBin => "\\Eb",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Caret => "^",
            Tok::Bar => "|",
            Tok::Tilde => "~",
        };
        f.write_str(s)
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '~'
}

pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char)
}

/// Tokenizes one line; a `#` starts a comment running to the end.
pub fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, (usize, String)> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let start = i;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            while i < cs.len() && is_ident_char(cs[i]) {
                i += 1;
            }
            out.push((start, Tok::Ident(cs[start..i].iter().collect())));
            continue;
        }
        if c.is_ascii_digit() {
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = cs[start..i].iter().collect();
            let n = s.parse().map_err(|_| (start, format!("bad number {}", s)))?;
            out.push((start, Tok::Num(n)));
            continue;
        }
        let two: String = cs[i..(i + 2).min(cs.len())].iter().collect();
        let tok = match two.as_str() {
            "->" => Some(Tok::Arrow),
            "!=" => Some(Tok::Neq),
            "<=" => Some(Tok::Def),
            _ => None,
        };
        if let Some(t) = tok {
            out.push((start, t));
            i += 2;
            continue;
        }
        if c == '\\' {
            if cs.get(i + 1) == Some(&'E') {
                if cs.get(i + 2) == Some(&'b') && !cs.get(i + 3).copied().is_some_and(is_ident_char) {
                    out.push((start, Tok::ExistsBin));
                    i += 3;
                } else {
                    out.push((start, Tok::Exists));
                    i += 2;
                }
                continue;
            }
            return Err((start, "expected \\E or \\Eb".into()));
        }
        let t = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '*' => Tok::Star,
            '=' => Tok::Eq,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '^' => Tok::Caret,
            '|' => Tok::Bar,
            '~' => Tok::Tilde,
            _ => return Err((start, format!("unexpected character {:?}", c))),
        };
        out.push((start, t));
        i += 1;
    }
    Ok(out)
}

/// Cursor over a token line, used by both grammars.
pub struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor, (usize, String)> {
        let toks = tokenize(src)?;
        Ok(Cursor { toks, pos: 0, end: src.len() })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    pub fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), (usize, String)> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", t)))
        }
    }

    pub fn ident(&mut self) -> Result<String, (usize, String)> {
        match self.peek() {
            Some(Tok::Ident(s)) if s != "nil" => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn num(&mut self) -> Result<usize, (usize, String)> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn unexpected(&self, wanted: &str) -> (usize, String) {
        match self.peek() {
            Some(t) => (self.offset(), format!("expected {}, found `{}`", wanted, t)),
            None => (self.offset(), format!("expected {}, found end of input", wanted)),
        }
    }

    /// Comma-separated list between `open` and `close`.
    pub fn list<T>(
        &mut self,
        open: &Tok,
        close: &Tok,
        mut item: impl FnMut(&mut Cursor) -> Result<T, (usize, String)>,
    ) -> Result<Vec<T>, (usize, String)> {
        self.expect(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_tildes_inside_names() {
        let t: Vec<Tok> = tokenize("p'1(b~) ~b").unwrap().into_iter().map(|x| x.1).collect();
        assert_eq!(
            t,
            vec![
                Tok::Ident("p'1".into()),
                Tok::LParen,
                Tok::Ident("b~".into()),
                Tok::RParen,
                Tok::Tilde,
                Tok::Ident("b".into())
            ]
        );
    }

    #[test]
    fn binary_quantifier_token() {
        let t: Vec<Tok> = tokenize("\\Eb b . \\E y .").unwrap().into_iter().map(|x| x.1).collect();
        assert_eq!(t[0], Tok::ExistsBin);
        assert_eq!(t[3], Tok::Exists);
    }

    #[test]
    fn comments_end_the_line() {
        assert_eq!(tokenize("  # nothing").unwrap().len(), 0);
    }
}
