//! Structures encoding pseudo-derivations and back.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use atm::{Action, Addr, Branch, Move, Pos, PseudoDerivationTree};
use reduction::{Compiled, Naming, PM};
use sl_core::{Atom, Heap, Loc, Store, Structure, SymbolicHeap, Term};
use unfolding::{Evaluator, Program, Verdict};

use crate::HarnessError;

/// How a structure encodes a tree: the split of its heap, the cell of each
/// tree node (keyed by address, even length for branching nodes) and the
/// predicate allocating it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingWitness {
    pub h1: Heap,
    pub h2: Heap,
    pub f: BTreeMap<Addr, Loc>,
    pub decoration: BTreeMap<Loc, String>,
}

struct Writer {
    heap: Heap,
    next: i64,
}

impl Writer {
    fn fresh(&mut self) -> Loc {
        self.next += 1;
        Loc(self.next - 1)
    }

    /// Stores a tuple at `at` the way wide tuples are lowered to two-field
    /// cells; returns the cells used.
    fn tuple(&mut self, at: Loc, fields: &[Loc]) -> Vec<Loc> {
        match fields {
            [] => panic!("empty tuple"),
            [t] => {
                self.heap.insert(at, vec![*t, Loc::NIL]);
                vec![at]
            }
            _ => {
                let mut cells = vec![at];
                let mut cur = at;
                for t in &fields[..fields.len() - 2] {
                    let nx = self.fresh();
                    self.heap.insert(cur, vec![*t, nx]);
                    cur = nx;
                    cells.push(cur);
                }
                self.heap.insert(cur, fields[fields.len() - 2..].to_vec());
                cells
            }
        }
    }
}

fn hat(n: u32) -> usize {
    n as usize + 1
}

/// `x` followed by the globals, as the arguments of both sides.
pub fn args_of(nm: &Naming) -> Vec<Term> {
    std::iter::once(Term::var("x")).chain(nm.env().terms()).collect()
}

fn root_pred(c: &Compiled) -> &str {
    c.naming.root_pred()
}

/// Builds the canonical encoding of `t`.
pub fn encode(t: &PseudoDerivationTree, c: &Compiled) -> Result<(Structure, EncodingWitness), HarnessError> {
    let m = &c.params.machine;
    let n = c.params.n;
    for (addr, b) in t.branches() {
        if n < 64 && b.label.pos >> n != 0 {
            return Err(HarnessError::PositionOverflow { addr, pos: b.label.pos });
        }
    }
    if !atm::check_pseudo_derivation(m, t, n) {
        return Err(HarnessError::NotAPseudoDerivation);
    }
    let nm = &c.naming;
    let mut w = Writer { heap: Heap::new(), next: 0 };
    let mut store = Store::new();
    let x = w.fresh();
    store.insert("x".into(), x);
    let globals: Vec<Loc> = nm.env().vars().iter().map(|_| w.fresh()).collect();
    for (g, l) in nm.env().vars().iter().zip(&globals) {
        store.insert(g.clone(), *l);
        w.heap.insert(*l, vec![Loc::NIL, Loc::NIL]);
    }
    let (y, z) = (w.fresh(), w.fresh());
    w.heap.insert(x, vec![y, z]);
    w.tuple(z, &globals);
    let root = w.fresh();
    let mut hat_fields = vec![Loc::NIL; hat(n)];
    hat_fields.push(root);
    w.tuple(y, &hat_fields);
    let h1 = w.heap.clone();

    let mut wit = EncodingWitness { h1, h2: Heap::new(), f: BTreeMap::new(), decoration: BTreeMap::new() };
    let mut todo = vec![(Vec::new(), root, t, root_pred(c).to_string())];
    while let Some((addr, at, b, pred)) = todo.pop() {
        let bits = reduction::bin(b.label.pos, n).expect("position checked");
        let kids: Vec<Loc> = b.actions.iter().map(|_| w.fresh()).collect();
        let mut fields: Vec<Loc> = bits.iter().map(|&bit| store[nm.bit(bit)]).collect();
        fields.extend(&kids);
        w.tuple(at, &fields);
        wit.f.insert(addr.clone(), at);
        wit.decoration.insert(at, pred);
        for (j, (a, k)) in b.actions.iter().zip(kids).enumerate() {
            let mut aaddr = addr.clone();
            aaddr.push(j as u32);
            let child = w.fresh();
            let cell = [store[nm.sym(&a.read)], store[nm.sym(&a.write)], store[nm.mv(a.mv)], child];
            w.tuple(k, &cell);
            wit.f.insert(aaddr.clone(), k);
            wit.decoration.insert(k, Naming::act(&a.child.label.state));
            aaddr.push(0);
            todo.push((aaddr, child, &a.child, a.child.label.state.clone()));
        }
    }
    wit.h2 = w.heap.iter().filter(|(l, _)| !wit.h1.contains_key(l)).map(|(l, v)| (*l, v.clone())).collect();
    let st = Structure::new(store, w.heap);
    if !is_model(&st, c, PM) {
        return Err(HarnessError::EncodingRejected);
    }
    Ok((st, wit))
}

/// `st |= pred(x, globals)`, decided exactly.
pub fn is_model(st: &Structure, c: &Compiled, pred: &str) -> bool {
    let f = SymbolicHeap::from_atoms(vec![Atom::pred(pred, args_of(&c.naming))]);
    matches!(unfolding::models_sid(st, &c.sid, &f, 0), Ok(Verdict::True))
}

struct Globals {
    zero: Loc,
    one: Loc,
    symbol: HashMap<Loc, String>,
}

fn globals(st: &Structure, nm: &Naming) -> Option<Globals> {
    let symbol = nm.symbols.iter().map(|(a, g)| Some((*st.store.get(g)?, a.clone()))).collect::<Option<_>>()?;
    Some(Globals { zero: *st.store.get(&nm.zero)?, one: *st.store.get(&nm.one)?, symbol })
}

/// Root branching cell, read through `x -> (y, z)` and the hat at `y`.
fn root_cell(st: &Structure, n: u32) -> Option<Loc> {
    let x = *st.store.get("x")?;
    let (f, _) = st.read_tuple(x, 2)?;
    let (hat_fields, _) = st.read_tuple(f[0], hat(n) + 1)?;
    hat_fields.last().copied()
}

/// Recovers the pseudo-derivation encoded by a model of `pM`.
pub fn decode(st: &Structure, c: &Compiled) -> Result<PseudoDerivationTree, HarnessError> {
    let nm = &c.naming;
    let dec = unfolding::decorate(st, &c.sid, PM, &args_of(nm)).map_err(|_| HarnessError::NotAModel)?;
    let g = globals(st, nm).ok_or(HarnessError::NotAModel)?;
    let root = root_cell(st, c.params.n).ok_or(HarnessError::NotAModel)?;
    let state = dec.get(&root).and_then(|p| nm.state_of(p)).ok_or(HarnessError::NotAModel)?;
    decode_branch(st, c, &dec, &g, root, state, 0).ok_or(HarnessError::NotAModel)
}

fn decode_branch(
    st: &Structure,
    c: &Compiled,
    dec: &BTreeMap<Loc, String>,
    g: &Globals,
    at: Loc,
    state: &str,
    depth: usize,
) -> Option<PseudoDerivationTree> {
    if depth > st.heap.len() {
        return None;
    }
    let n = c.params.n as usize;
    let nm = &c.naming;
    let action_of = |l: &Loc| dec.get(l).and_then(|p| nm.action_target(p));
    for m in 0..=c.params.b {
        let Some((fields, _)) = st.read_tuple(at, n + m) else { continue };
        let bits: Option<Vec<bool>> = fields[..n]
            .iter()
            .map(|l| if *l == g.one { Some(true) } else if *l == g.zero { Some(false) } else { None })
            .collect();
        let Some(bits) = bits else { continue };
        let kids = &fields[n..];
        if !kids.iter().all(|k| action_of(k).is_some()) {
            continue;
        }
        let mut actions = Vec::new();
        for k in kids {
            let (af, _) = st.read_tuple(*k, 4)?;
            let mv = if af[2] == g.one {
                Move::R
            } else if af[2] == g.zero {
                Move::L
            } else {
                return None;
            };
            let to = action_of(k)?;
            let child = decode_branch(st, c, dec, g, af[3], to, depth + 1)?;
            actions.push(Action { read: g.symbol.get(&af[0])?.clone(), write: g.symbol.get(&af[1])?.clone(), mv, child });
        }
        return Some(Branch { label: Pos { state: state.to_string(), pos: reduction::unbin(&bits) }, actions });
    }
    None
}

/// Checks that `st` encodes `t`: the heap splits into the part reachable
/// from the root branching cell and the rest, the rest satisfies the
/// header formula, every node's cell holds the expected tuple and the
/// cells can be allocated by the node's predicate.
pub fn check_encoding(st: &Structure, t: &PseudoDerivationTree, c: &Compiled) -> bool {
    check_encoding_witness(st, t, c).is_some()
}

pub fn check_encoding_witness(st: &Structure, t: &PseudoDerivationTree, c: &Compiled) -> Option<EncodingWitness> {
    let nm = &c.naming;
    let n = c.params.n;
    let g = globals(st, nm)?;
    let root = root_cell(st, n)?;
    let gl: BTreeSet<Loc> = nm.env().vars().iter().map(|v| st.store[v]).collect();

    let mut f = BTreeMap::new();
    let mut decoration = BTreeMap::new();
    let mut used: Vec<Loc> = Vec::new();
    let mut todo = vec![(Vec::new(), root, t, root_pred(c).to_string())];
    while let Some((addr, at, b, pred)) = todo.pop() {
        let bits = reduction::bin(b.label.pos, n).ok()?;
        let (fields, cells) = st.read_tuple(at, n as usize + b.actions.len())?;
        let want: Vec<Loc> = bits.iter().map(|&bit| if bit { g.one } else { g.zero }).collect();
        if fields[..n as usize] != want[..] {
            return None;
        }
        used.extend(cells);
        f.insert(addr.clone(), at);
        decoration.insert(at, pred);
        for (j, a) in b.actions.iter().enumerate() {
            let k = fields[n as usize + j];
            let (af, cells) = st.read_tuple(k, 4)?;
            let sym = |s: &str| st.store.get(nm.sym(s)).copied();
            let mv = st.store.get(nm.mv(a.mv)).copied();
            if [Some(af[0]), Some(af[1]), Some(af[2])] != [sym(&a.read), sym(&a.write), mv] {
                return None;
            }
            used.extend(cells);
            let mut aaddr = addr.clone();
            aaddr.push(j as u32);
            f.insert(aaddr.clone(), k);
            decoration.insert(k, Naming::act(&a.child.label.state));
            aaddr.push(0);
            todo.push((aaddr, af[3], &a.child, a.child.label.state.clone()));
        }
    }
    let h2_dom: BTreeSet<Loc> = used.iter().copied().collect();
    if h2_dom.len() != used.len() || h2_dom.iter().any(|l| gl.contains(l)) {
        return None;
    }
    let h2: Heap = st.heap.iter().filter(|(l, _)| h2_dom.contains(l)).map(|(l, v)| (*l, v.clone())).collect();
    if h2.len() != h2_dom.len() {
        return None;
    }
    let h1: Heap = st.heap.iter().filter(|(l, _)| !h2_dom.contains(l)).map(|(l, v)| (*l, v.clone())).collect();

    // header: x -> (y, z) * Const(z, globals) * y -> [z']^hat, on h1 alone
    let s1 = Structure::new(st.store.clone(), h1.clone());
    if !header_holds(&s1, c) {
        return None;
    }

    let prog = Program::new(&c.sid);
    let mut allowed: HashMap<Loc, HashSet<u32>> = HashMap::new();
    for (l, p) in &decoration {
        allowed.insert(*l, [prog.id(p).ok()?].into_iter().collect());
    }
    let q = SymbolicHeap::from_atoms(vec![Atom::pred(PM, args_of(nm))]);
    let ev = Evaluator::new(&prog, st).with_constraints(allowed);
    ev.query(st, &q).ok()??;
    Some(EncodingWitness { h1, h2, f, decoration })
}

fn header_holds(s1: &Structure, c: &Compiled) -> bool {
    let nm = &c.naming;
    let h = hat(c.params.n);
    let links: Vec<String> = (1..h).map(|k| format!("w{}", k)).collect();
    let mut bound = vec!["y".to_string(), "z".to_string(), "z'".to_string()];
    bound.extend(links.iter().cloned());
    let mut atoms = vec![
        Atom::points_to(Term::var("x"), vec![Term::var("y"), Term::var("z")]),
        Atom::pred(reduction::CONST, std::iter::once(Term::var("z")).chain(nm.env().terms()).collect()),
    ];
    let mut cur = Term::var("y");
    for l in &links {
        atoms.push(Atom::points_to(cur, vec![Term::Nil, Term::var(l)]));
        cur = Term::var(l);
    }
    atoms.push(Atom::points_to(cur, vec![Term::Nil, Term::var("z'")]));
    let f = SymbolicHeap::new(bound, atoms);
    matches!(unfolding::models_sid(s1, &c.sid, &f, 0), Ok(Verdict::True))
}

/// The part of a structure below the root branching cell, relabeled so
/// that isomorphic encodings compare equal.
pub fn h2_canonical(st: &Structure, c: &Compiled) -> Option<Heap> {
    let nm = &c.naming;
    let root = root_cell(st, c.params.n)?;
    let gl: Vec<Loc> = nm.env().vars().iter().map(|v| st.store.get(v).copied()).collect::<Option<_>>()?;
    let glset: BTreeSet<Loc> = gl.iter().copied().collect();
    let mut reach = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(l) = stack.pop() {
        if l.is_nil() || glset.contains(&l) || !reach.insert(l) {
            continue;
        }
        if let Some(cell) = st.heap.get(&l) {
            stack.extend(cell.iter().copied());
        }
    }
    let h2: Heap = st.heap.iter().filter(|(l, _)| reach.contains(l)).map(|(l, v)| (*l, v.clone())).collect();
    let mut roots = vec![root];
    roots.extend(gl);
    let (_, heap) = Structure::new(Store::new(), h2).canonical_relabel(&roots)?;
    Some(heap)
}

/// Isomorphism of the tree parts of two encodings, globals kept in place.
pub fn isomorphic_h2(a: &Structure, b: &Structure, c: &Compiled) -> bool {
    match (h2_canonical(a, c), h2_canonical(b, c)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// Space exponent of an encoding, read off the length of its hat.
pub fn infer_space_exp(st: &Structure) -> Option<u32> {
    let x = *st.store.get("x")?;
    let mut cur = st.heap.get(&x)?[0];
    let mut h = 0u32;
    while let Some(cell) = st.heap.get(&cur) {
        if !cell[0].is_nil() {
            break;
        }
        h += 1;
        cur = cell[1];
    }
    h.checked_sub(1).filter(|n| *n >= 1)
}
