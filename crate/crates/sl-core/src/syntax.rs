use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Nil,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Nil => None,
        }
    }

    fn subst(&self, m: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => m.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Nil => Term::Nil,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Nil => f.write_str("nil"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    PointsTo { src: Term, dst: Vec<Term> },
    Pred { pred: String, args: Vec<Term> },
    Eq(Term, Term),
    Diseq(Term, Term),
}

impl Atom {
    pub fn points_to(src: Term, dst: Vec<Term>) -> Atom {
        Atom::PointsTo { src, dst }
    }

    pub fn pred(pred: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom::Pred { pred: pred.into(), args }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Atom::Eq(..) | Atom::Diseq(..))
    }

    fn rank(&self) -> u8 {
        match self {
            Atom::PointsTo { .. } => 0,
            Atom::Pred { .. } => 1,
            Atom::Eq(..) => 2,
            Atom::Diseq(..) => 3,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::PointsTo { src, dst } => std::iter::once(src).chain(dst.iter()).collect(),
            Atom::Pred { args, .. } => args.iter().collect(),
            Atom::Eq(a, b) | Atom::Diseq(a, b) => vec![a, b],
        }
    }

    pub fn subst(&self, m: &BTreeMap<String, Term>) -> Atom {
        match self {
            Atom::PointsTo { src, dst } => Atom::PointsTo {
                src: src.subst(m),
                dst: dst.iter().map(|t| t.subst(m)).collect(),
            },
            Atom::Pred { pred, args } => Atom::Pred {
                pred: pred.clone(),
                args: args.iter().map(|t| t.subst(m)).collect(),
            },
            Atom::Eq(a, b) => Atom::Eq(a.subst(m), b.subst(m)),
            Atom::Diseq(a, b) => Atom::Diseq(a.subst(m), b.subst(m)),
        }
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::PointsTo { src, dst } => write!(f, "{} -> ({})", src, join(dst)),
            Atom::Pred { pred, args } => write!(f, "{}({})", pred, join(args)),
            Atom::Eq(a, b) => write!(f, "{} = {}", a, b),
            Atom::Diseq(a, b) => write!(f, "{} != {}", a, b),
        }
    }
}

/// Picks `base`, `base'`, `base''`, ... whichever is first not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SymbolicHeap {
    pub bound: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl SymbolicHeap {
    pub fn new(bound: Vec<String>, atoms: Vec<Atom>) -> SymbolicHeap {
        SymbolicHeap { bound, atoms }
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> SymbolicHeap {
        SymbolicHeap { bound: Vec::new(), atoms }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            for t in a.terms() {
                if let Term::Var(v) = t {
                    if !self.bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.bound.iter().cloned().collect();
        for a in &self.atoms {
            for t in a.terms() {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
        }
        out
    }

    pub fn is_pred_free(&self) -> bool {
        !self.atoms.iter().any(|a| matches!(a, Atom::Pred { .. }))
    }

    pub fn pred_atoms(&self) -> impl Iterator<Item = (&str, &[Term])> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::Pred { pred, args } => Some((pred.as_str(), args.as_slice())),
            _ => None,
        })
    }

    /// Simultaneous substitution. Bound variables that would capture a
    /// variable of the range are renamed first.
    pub fn substitute(&self, m: &BTreeMap<String, Term>) -> SymbolicHeap {
        let m: BTreeMap<String, Term> = m
            .iter()
            .filter(|(k, _)| !self.bound.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut avoid: BTreeSet<String> = self.all_vars();
        for t in m.values() {
            if let Term::Var(v) = t {
                avoid.insert(v.clone());
            }
        }
        let range: BTreeSet<&str> = m.values().filter_map(|t| t.as_var()).collect();
        let mut full = m.clone();
        let mut bound = Vec::with_capacity(self.bound.len());
        for b in &self.bound {
            if range.contains(b.as_str()) {
                let nb = fresh_name(b, &avoid);
                avoid.insert(nb.clone());
                full.insert(b.clone(), Term::Var(nb.clone()));
                bound.push(nb);
            } else {
                bound.push(b.clone());
            }
        }
        SymbolicHeap { bound, atoms: self.atoms.iter().map(|a| a.subst(&full)).collect() }
    }

    /// Renames bound variables so none lies in `avoid`.
    pub fn rename_bound_apart(&self, avoid: &BTreeSet<String>) -> SymbolicHeap {
        let mut taken = avoid.clone();
        taken.extend(self.all_vars());
        let mut m = BTreeMap::new();
        let mut bound = Vec::with_capacity(self.bound.len());
        for b in &self.bound {
            if avoid.contains(b) {
                let nb = fresh_name(b, &taken);
                taken.insert(nb.clone());
                m.insert(b.clone(), Term::Var(nb.clone()));
                bound.push(nb);
            } else {
                bound.push(b.clone());
            }
        }
        SymbolicHeap { bound, atoms: self.atoms.iter().map(|a| a.subst(&m)).collect() }
    }

    /// Atoms in canonical print order.
    pub fn sorted_atoms(&self) -> Vec<Atom> {
        let mut v = self.atoms.clone();
        v.sort_by_cached_key(|a| (a.rank(), a.to_string()));
        v
    }

    pub fn canonical(&self) -> SymbolicHeap {
        SymbolicHeap { bound: self.bound.clone(), atoms: self.sorted_atoms() }
    }

    pub fn star(&self, other: &SymbolicHeap) -> SymbolicHeap {
        let mut avoid = self.all_vars();
        avoid.extend(other.free_vars());
        let o = other.rename_bound_apart(&avoid);
        let mut bound = self.bound.clone();
        bound.extend(o.bound);
        let mut atoms = self.atoms.clone();
        atoms.extend(o.atoms);
        SymbolicHeap { bound, atoms }
    }
}

impl fmt::Display for SymbolicHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            write!(f, "\\E {} . ", self.bound.join(" "))?;
        }
        let atoms = self.sorted_atoms();
        if atoms.is_empty() {
            return f.write_str("emp");
        }
        let parts: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" * "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: String,
    pub params: Vec<String>,
    pub body: SymbolicHeap,
}

impl Rule {
    pub fn new(head: impl Into<String>, params: Vec<String>, body: SymbolicHeap) -> Rule {
        Rule { head: head.into(), params, body }
    }

    pub fn head_atom(&self) -> Atom {
        Atom::pred(self.head.clone(), self.params.iter().map(|p| Term::Var(p.clone())).collect())
    }

    /// Body with parameters replaced by `args`.
    pub fn instantiate(&self, args: &[Term]) -> SymbolicHeap {
        let m: BTreeMap<String, Term> =
            self.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.body.substitute(&m)
    }

    pub fn canonical(&self) -> Rule {
        Rule { head: self.head.clone(), params: self.params.clone(), body: self.body.canonical() }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) <= {}", self.head, self.params.join(","), self.body)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SidError {
    #[error("predicate {pred} used with arity {found}, declared {expected}")]
    ArityMismatch { pred: String, expected: usize, found: usize },
    #[error("rule {index}: parameters of {head} are not pairwise distinct")]
    DuplicateParam { index: usize, head: String },
    #[error("rule {index}: free variable {var} is not a parameter of {head}")]
    FreeVariable { index: usize, head: String, var: String },
    #[error("rule {index}: bound variable {var} repeated or shadows a parameter")]
    BadBound { index: usize, var: String },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Sid {
    pub arities: BTreeMap<String, usize>,
    pub rules: Vec<Rule>,
}

impl Sid {
    pub fn new(rules: Vec<Rule>) -> Result<Sid, SidError> {
        Sid::with_arities(BTreeMap::new(), rules)
    }

    /// Builds a SID; arities not given explicitly are inferred from heads
    /// and uses, and must agree everywhere.
    pub fn with_arities(
        mut arities: BTreeMap<String, usize>,
        rules: Vec<Rule>,
    ) -> Result<Sid, SidError> {
        let mut note = |p: &str, n: usize| -> Result<(), SidError> {
            match arities.get(p) {
                Some(&k) if k != n => {
                    Err(SidError::ArityMismatch { pred: p.to_string(), expected: k, found: n })
                }
                Some(_) => Ok(()),
                None => {
                    arities.insert(p.to_string(), n);
                    Ok(())
                }
            }
        };
        for (index, r) in rules.iter().enumerate() {
            note(&r.head, r.params.len())?;
            for (p, args) in r.body.pred_atoms() {
                note(p, args.len())?;
            }
            let params: BTreeSet<&String> = r.params.iter().collect();
            if params.len() != r.params.len() {
                return Err(SidError::DuplicateParam { index, head: r.head.clone() });
            }
            let mut seen = BTreeSet::new();
            for b in &r.body.bound {
                if params.contains(b) || !seen.insert(b) {
                    return Err(SidError::BadBound { index, var: b.clone() });
                }
            }
            if let Some(v) = r.body.free_vars().into_iter().find(|v| !params.contains(v)) {
                return Err(SidError::FreeVariable { index, head: r.head.clone(), var: v });
            }
        }
        Ok(Sid { arities, rules })
    }

    pub fn arity(&self, pred: &str) -> Result<usize, SidError> {
        self.arities.get(pred).copied().ok_or_else(|| SidError::UnknownPredicate(pred.to_string()))
    }

    pub fn rules_of<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = (usize, &'a Rule)> + 'a {
        self.rules.iter().enumerate().filter(move |(_, r)| r.head == pred)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for Sid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", r)?;
        }
        Ok(())
    }
}
