//! Exact membership for progressing SIDs on a fixed structure.
//!
//! Every rule consumes the cell of its first argument, so a derivation of a
//! model has exactly one node per allocated cell. `call` returns every way a
//! predicate atom can be derived on some sub-heap, memoized on the atom's
//! (partially known) argument values.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use sl_core::{Atom, Loc, Structure, SymbolicHeap, Term};

use crate::program::{Program, Slot};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn empty(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    pub fn disjoint(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == 0)
    }
    pub fn union(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }
    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A derivation witness: the rule used at each allocated cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deriv {
    pub pred: u32,
    pub rule: usize,
    pub root: Loc,
    pub children: Vec<Rc<Deriv>>,
}

impl Deriv {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn visit(&self, f: &mut impl FnMut(&Deriv)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Res {
    pub region: Bits,
    pub out: Vec<Option<Loc>>,
    pub deriv: Rc<Deriv>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unsupported;

type Key = (u32, Vec<Option<Loc>>);

pub struct Evaluator<'a> {
    prog: &'a Program,
    cells: Vec<(Loc, Vec<Loc>)>,
    index: HashMap<Loc, usize>,
    memo: RefCell<HashMap<Key, Rc<Vec<Res>>>>,
    active: RefCell<HashSet<Key>>,
    cut: RefCell<bool>,
    /// Restricts which predicates may allocate a given location.
    allowed: HashMap<Loc, HashSet<u32>>,
}

#[derive(Clone)]
struct State {
    env: Vec<Option<Loc>>,
    region: Bits,
    kids: Vec<Rc<Deriv>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(prog: &'a Program, st: &Structure) -> Evaluator<'a> {
        let cells: Vec<(Loc, Vec<Loc>)> = st.heap.iter().map(|(k, v)| (*k, v.clone())).collect();
        let index = cells.iter().enumerate().map(|(i, (l, _))| (*l, i)).collect();
        Evaluator {
            prog,
            cells,
            index,
            memo: RefCell::new(HashMap::new()),
            active: RefCell::new(HashSet::new()),
            cut: RefCell::new(false),
            allowed: HashMap::new(),
        }
    }

    pub fn with_constraints(mut self, allowed: HashMap<Loc, HashSet<u32>>) -> Self {
        self.allowed = allowed;
        self
    }

    pub fn ncells(&self) -> usize {
        self.cells.len()
    }

    pub fn call(&self, pred: u32, args: &[Option<Loc>]) -> Result<Rc<Vec<Res>>, Unsupported> {
        let key = (pred, args.to_vec());
        if let Some(r) = self.memo.borrow().get(&key) {
            return Ok(r.clone());
        }
        if self.active.borrow().contains(&key) {
            *self.cut.borrow_mut() = true;
            return Ok(Rc::new(Vec::new()));
        }
        self.active.borrow_mut().insert(key.clone());
        let outer_cut = std::mem::replace(&mut *self.cut.borrow_mut(), false);
        let res = self.call_rules(pred, args);
        self.active.borrow_mut().remove(&key);
        let cut_here = *self.cut.borrow();
        *self.cut.borrow_mut() = outer_cut || cut_here;
        let res = Rc::new(res?);
        if !cut_here {
            self.memo.borrow_mut().insert(key, res.clone());
        }
        Ok(res)
    }

    fn call_rules(&self, pred: u32, args: &[Option<Loc>]) -> Result<Vec<Res>, Unsupported> {
        let mut out: Vec<Res> = Vec::new();
        let mut seen: HashSet<(Bits, Vec<Option<Loc>>)> = HashSet::new();
        let roots: Vec<usize> = match args.first().copied().flatten() {
            Some(l) => self.index.get(&l).copied().into_iter().collect(),
            None => (0..self.cells.len()).collect(),
        };
        for &c in &roots {
            let loc = self.cells[c].0;
            if let Some(ok) = self.allowed.get(&loc) {
                if !ok.contains(&pred) {
                    continue;
                }
            }
            for &ri in &self.prog.by_pred[pred as usize] {
                let r = &self.prog.rules[ri];
                let mut env: Vec<Option<Loc>> = args.to_vec();
                env.resize(r.nvars(), None);
                env[0] = Some(loc);
                let (_, dst) = &r.pts[0];
                if !unify_all(&mut env, dst, &self.cells[c].1) {
                    continue;
                }
                let mut region = Bits::empty(self.cells.len());
                region.set(c);
                let start = State { env, region, kids: Vec::new() };
                for s in self.solve_calls(&r.calls, vec![start])? {
                    let Some(env) = self.pure(&r.eqs, &r.diseqs, s.env, r.nparams)? else { continue };
                    let outv = env[..r.nparams].to_vec();
                    if seen.insert((s.region.clone(), outv.clone())) {
                        out.push(Res {
                            region: s.region,
                            out: outv,
                            deriv: Rc::new(Deriv { pred, rule: ri, root: loc, children: s.kids }),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    fn solve_calls(&self, calls: &[(u32, Vec<Slot>)], mut states: Vec<State>) -> Result<Vec<State>, Unsupported> {
        for (q, slots) in calls {
            let mut next = Vec::new();
            let mut seen: HashSet<(Vec<Option<Loc>>, Bits)> = HashSet::new();
            for s in &states {
                let a: Vec<Option<Loc>> = slots.iter().map(|sl| val(&s.env, sl)).collect();
                for r in self.call(*q, &a)?.iter() {
                    if !r.region.disjoint(&s.region) {
                        continue;
                    }
                    let mut env = s.env.clone();
                    if !unify_all(&mut env, slots, &r.out.iter().map(|o| o.unwrap_or(UNSET)).collect::<Vec<_>>()) {
                        continue;
                    }
                    let region = r.region.union(&s.region);
                    if seen.insert((env.clone(), region.clone())) {
                        let mut kids = s.kids.clone();
                        kids.push(r.deriv.clone());
                        next.push(State { env, region, kids });
                    }
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        Ok(states)
    }

    // Checks pure atoms. An unresolved existential can always take a fresh
    // value; unresolved parameters are left to the caller, which this
    // evaluator does not support.
    fn pure(
        &self,
        eqs: &[(Slot, Slot)],
        diseqs: &[(Slot, Slot)],
        mut env: Vec<Option<Loc>>,
        nparams: usize,
    ) -> Result<Option<Vec<Option<Loc>>>, Unsupported> {
        let is_param = |s: &Slot| matches!(s, Slot::Var(i) if (*i as usize) < nparams);
        let mut changed = true;
        let mut pending: Vec<(Slot, Slot)> = eqs.to_vec();
        while changed {
            changed = false;
            let mut rest = Vec::new();
            for (a, b) in pending {
                match (val(&env, &a), val(&env, &b)) {
                    (Some(x), Some(y)) => {
                        if x != y {
                            return Ok(None);
                        }
                    }
                    (Some(x), None) => {
                        set(&mut env, &b, x);
                        changed = true;
                    }
                    (None, Some(y)) => {
                        set(&mut env, &a, y);
                        changed = true;
                    }
                    (None, None) => rest.push((a, b)),
                }
            }
            pending = rest;
        }
        if pending.iter().any(|(a, b)| is_param(a) || is_param(b)) {
            return Err(Unsupported);
        }
        for (a, b) in diseqs {
            match (val(&env, a), val(&env, b)) {
                (Some(x), Some(y)) => {
                    if x == y {
                        return Ok(None);
                    }
                }
                (None, _) if is_param(a) => return Err(Unsupported),
                (_, None) if is_param(b) => return Err(Unsupported),
                _ => {}
            }
        }
        Ok(Some(env))
    }

    /// Derives a whole query formula on the entire heap; returns the
    /// witness derivations of its predicate atoms.
    pub fn query(&self, st: &Structure, f: &SymbolicHeap) -> Result<Option<Vec<Rc<Deriv>>>, Unsupported> {
        let mut vars: Vec<String> = f.free_vars().into_iter().collect();
        vars.extend(f.bound.iter().cloned());
        let pos: HashMap<&str, u32> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
        let slot = |t: &Term| match t {
            Term::Nil => Slot::Nil,
            Term::Var(v) => Slot::Var(pos[v.as_str()]),
        };
        let nfree = vars.len() - f.bound.len();
        let mut env: Vec<Option<Loc>> = vec![None; vars.len()];
        for (i, v) in vars[..nfree].iter().enumerate() {
            env[i] = Some(*st.store.get(v).ok_or(Unsupported)?);
        }
        let mut pts = Vec::new();
        let mut calls = Vec::new();
        let mut eqs = Vec::new();
        let mut diseqs = Vec::new();
        for a in &f.atoms {
            match a {
                Atom::PointsTo { src, dst } => pts.push((slot(src), dst.iter().map(slot).collect::<Vec<_>>())),
                Atom::Pred { pred, args } => {
                    let id = self.prog.id(pred).map_err(|_| Unsupported)?;
                    calls.push((id, args.iter().map(slot).collect::<Vec<_>>()))
                }
                Atom::Eq(a, b) => eqs.push((slot(a), slot(b))),
                Atom::Diseq(a, b) => diseqs.push((slot(a), slot(b))),
            }
        }
        let mut states = vec![State { env, region: Bits::empty(self.cells.len()), kids: Vec::new() }];
        for (src, dst) in &pts {
            let mut next = Vec::new();
            for s in &states {
                let cands: Vec<usize> = match val(&s.env, src) {
                    Some(l) => self.index.get(&l).copied().into_iter().collect(),
                    None => (0..self.cells.len()).collect(),
                };
                for c in cands {
                    if s.region.get(c) {
                        continue;
                    }
                    let mut env = s.env.clone();
                    let mut full = vec![*src];
                    full.extend(dst.iter().copied());
                    let mut vals = vec![self.cells[c].0];
                    vals.extend(self.cells[c].1.iter().copied());
                    if unify_all(&mut env, &full, &vals) {
                        let mut region = s.region.clone();
                        region.set(c);
                        next.push(State { env, region, kids: Vec::new() });
                    }
                }
            }
            states = next;
        }
        for s in self.solve_calls(&calls, states)? {
            if s.region.count() != self.cells.len() {
                continue;
            }
            if self.pure(&eqs, &diseqs, s.env, nfree)?.is_some() {
                return Ok(Some(s.kids));
            }
        }
        Ok(None)
    }
}

const UNSET: Loc = Loc(i64::MIN);

fn val(env: &[Option<Loc>], s: &Slot) -> Option<Loc> {
    match s {
        Slot::Nil => Some(Loc::NIL),
        Slot::Var(i) => env[*i as usize],
    }
}

fn set(env: &mut [Option<Loc>], s: &Slot, l: Loc) {
    if let Slot::Var(i) = s {
        env[*i as usize] = Some(l);
    }
}

// Matches slots against values; UNSET values leave the slot as it is.
fn unify_all(env: &mut [Option<Loc>], slots: &[Slot], vals: &[Loc]) -> bool {
    if slots.len() != vals.len() {
        return false;
    }
    for (s, &v) in slots.iter().zip(vals) {
        if v == UNSET {
            continue;
        }
        match val(env, s) {
            Some(x) => {
                if x != v {
                    return false;
                }
            }
            None => set(env, s, v),
        }
    }
    true
}

/// Location → predicate map read off a derivation.
pub fn decoration_of(prog: &Program, ds: &[Rc<Deriv>]) -> BTreeMap<Loc, String> {
    let mut out = BTreeMap::new();
    for d in ds {
        d.visit(&mut |n| {
            out.insert(n.root, prog.names[n.pred as usize].clone());
        });
    }
    out
}
