//! Strict satisfaction for predicate-free symbolic heaps.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::structure::{Loc, Structure};
use crate::syntax::{Atom, SymbolicHeap, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("store has no value for {0}")]
    UnboundTerm(String),
    #[error("formula contains predicate atom {0}")]
    PredicateAtom(String),
}

struct Search<'a> {
    cells: Vec<(Loc, &'a [Loc])>,
    used: Vec<bool>,
    pts: Vec<(&'a Term, &'a [Term])>,
    chosen: Vec<usize>,
    pure: Vec<&'a Atom>,
    domain: Vec<Loc>,
    env: HashMap<&'a str, Loc>,
}

impl<'a> Search<'a> {
    fn val(&self, t: &Term) -> Option<Loc> {
        match t {
            Term::Nil => Some(Loc::NIL),
            Term::Var(v) => self.env.get(v.as_str()).copied(),
        }
    }

    // Binds or checks `t` against `l`; returns the variable newly bound.
    fn unify(&mut self, t: &'a Term, l: Loc) -> Result<Option<&'a str>, ()> {
        match t {
            Term::Nil => if l.is_nil() { Ok(None) } else { Err(()) },
            Term::Var(v) => match self.env.get(v.as_str()) {
                Some(&x) => if x == l { Ok(None) } else { Err(()) },
                None => {
                    self.env.insert(v, l);
                    Ok(Some(v))
                }
            },
        }
    }

    fn match_cell(&mut self, k: usize, c: usize, rest: &mut Vec<usize>) -> bool {
        let (src, dst) = self.pts[k];
        let (loc, vals) = self.cells[c];
        if dst.len() != vals.len() {
            return false;
        }
        let mut bound = Vec::new();
        let mut ok = true;
        for (t, l) in std::iter::once((src, loc)).chain(dst.iter().zip(vals.iter().copied())) {
            match self.unify(t, l) {
                Ok(Some(v)) => bound.push(v),
                Ok(None) => {}
                Err(()) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            self.used[c] = true;
            self.chosen[k] = c;
            if self.points_to(rest) {
                return true;
            }
            self.used[c] = false;
        }
        for v in bound {
            self.env.remove(v);
        }
        false
    }

    fn points_to(&mut self, rest: &mut Vec<usize>) -> bool {
        if rest.is_empty() {
            return self.pure_atoms(0);
        }
        // Prefer an atom whose source is already known.
        let pick = rest.iter().position(|&k| self.val(self.pts[k].0).is_some()).unwrap_or(0);
        let k = rest.swap_remove(pick);
        let found = match self.val(self.pts[k].0) {
            Some(l) => match self.cells.iter().position(|(c, _)| *c == l) {
                Some(c) if !self.used[c] => self.match_cell(k, c, rest),
                _ => false,
            },
            None => (0..self.cells.len())
                .any(|c| !self.used[c] && self.match_cell(k, c, rest)),
        };
        rest.push(k);
        let last = rest.len() - 1;
        rest.swap(pick, last);
        found
    }

    fn pure_atoms(&mut self, i: usize) -> bool {
        if i == self.pure.len() {
            return true;
        }
        let (a, b) = match self.pure[i] {
            Atom::Eq(a, b) | Atom::Diseq(a, b) => (a, b),
            _ => unreachable!(),
        };
        let eq = matches!(self.pure[i], Atom::Eq(..));
        match (self.val(a), self.val(b)) {
            (Some(x), Some(y)) => (x == y) == eq && self.pure_atoms(i + 1),
            (None, _) => self.guess(a, i),
            (_, None) => self.guess(b, i),
        }
    }

    fn guess(&mut self, t: &'a Term, i: usize) -> bool {
        let v = t.as_var().expect("nil always has a value");
        for l in self.domain.clone() {
            self.env.insert(v, l);
            if self.pure_atoms(i) {
                return true;
            }
        }
        self.env.remove(v);
        false
    }
}

/// Decides `(s,h) |= f` under the strict semantics. Existential witnesses
/// range over every location of the structure, nil, `dom_hint` and one
/// unused location per bound variable, which makes the search complete.
pub fn satisfies(st: &Structure, f: &SymbolicHeap, dom_hint: &BTreeSet<Loc>) -> Result<bool, SatError> {
    Ok(find_match(st, f, dom_hint)?.is_some())
}

/// Like [`satisfies`], but on success returns, for every atom of `f` in
/// order, the cell it consumed (`None` for pure atoms).
pub fn find_match(
    st: &Structure,
    f: &SymbolicHeap,
    dom_hint: &BTreeSet<Loc>,
) -> Result<Option<Vec<Option<Loc>>>, SatError> {
    let mut env = HashMap::new();
    for v in f.free_vars() {
        let l = st.store.get(&v).copied().ok_or_else(|| SatError::UnboundTerm(v.clone()))?;
        let key = f
            .atoms
            .iter()
            .flat_map(|a| a.terms())
            .find_map(|t| t.as_var().filter(|x| *x == v))
            .unwrap();
        env.insert(key, l);
    }
    let mut pts = Vec::new();
    let mut pure = Vec::new();
    for a in &f.atoms {
        match a {
            Atom::PointsTo { src, dst } => pts.push((src, dst.as_slice())),
            Atom::Pred { pred, .. } => return Err(SatError::PredicateAtom(pred.clone())),
            _ => pure.push(a),
        }
    }
    if pts.len() != st.heap.len() {
        return Ok(None);
    }
    let mut domain: BTreeSet<Loc> = st.locations();
    domain.extend(env.values().copied());
    domain.extend(dom_hint.iter().copied());
    domain.insert(Loc::NIL);
    let mut fresh = domain.iter().map(|l| l.0).max().unwrap_or(-1) + 1;
    for _ in 0..f.bound.len().max(1) {
        domain.insert(Loc(fresh));
        fresh += 1;
    }
    let mut s = Search {
        cells: st.heap.iter().map(|(k, v)| (*k, v.as_slice())).collect(),
        used: vec![false; st.heap.len()],
        chosen: vec![0; pts.len()],
        pts,
        pure,
        domain: domain.into_iter().collect(),
        env,
    };
    let mut rest: Vec<usize> = (0..s.pts.len()).collect();
    if !s.points_to(&mut rest) {
        return Ok(None);
    }
    let mut k = 0;
    let mut out = Vec::with_capacity(f.atoms.len());
    for a in &f.atoms {
        if let Atom::PointsTo { .. } = a {
            out.push(Some(s.cells[s.chosen[k]].0));
            k += 1;
        } else {
            out.push(None);
        }
    }
    Ok(Some(out))
}
