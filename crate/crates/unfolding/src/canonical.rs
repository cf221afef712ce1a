//! The structure induced by an unfolding tree: every existential instance
//! is a distinct location unless equalities merge it with another.

use std::collections::HashMap;

use sl_core::{Heap, Loc, Store, Structure, Term};

use crate::program::{Program, Slot};
use crate::shape::Shape;
use crate::tree::NodeAddr;

#[derive(Clone, Debug)]
pub struct CanonicalModel {
    pub structure: Structure,
    /// Location allocated by each tree node, in preorder.
    pub nodes: Vec<(NodeAddr, Loc)>,
    /// Values of the root rule's parameters and existentials.
    pub root_env: Vec<Loc>,
}

struct Builder<'a> {
    prog: &'a Program,
    root_env: Vec<usize>,
    parent: Vec<usize>,
    cells: Vec<(usize, Vec<usize>, NodeAddr)>,
    eqs: Vec<(usize, usize)>,
    diseqs: Vec<(usize, usize)>,
}

const NIL: usize = 0;

impl<'a> Builder<'a> {
    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn walk(&mut self, shape: &Shape, args: &[usize], addr: &mut NodeAddr) {
        let r = &self.prog.rules[shape.rule];
        let mut env: Vec<usize> = args.to_vec();
        for _ in r.nparams..r.nvars() {
            let v = self.fresh();
            env.push(v);
        }
        if addr.is_empty() {
            self.root_env = env.clone();
        }
        let val = |s: &Slot| match s {
            Slot::Nil => NIL,
            Slot::Var(i) => env[*i as usize],
        };
        for (src, dst) in &r.pts {
            self.cells.push((val(src), dst.iter().map(val).collect(), addr.clone()));
        }
        for (a, b) in &r.eqs {
            self.eqs.push((val(a), val(b)));
        }
        for (a, b) in &r.diseqs {
            self.diseqs.push((val(a), val(b)));
        }
        let calls: Vec<Vec<usize>> = r.calls.iter().map(|(_, a)| a.iter().map(val).collect()).collect();
        for (i, (child, a)) in shape.children.iter().zip(calls).enumerate() {
            addr.push(i as u32);
            self.walk(child, &a, addr);
            addr.pop();
        }
    }
}

/// Builds the canonical model of the tree `shape` for the atom
/// `pred(args)`; `None` when the tree's constraints are contradictory
/// (a location allocated twice, nil allocated, or a violated disequality).
pub fn canonical_model(prog: &Program, args: &[Term], shape: &Shape) -> Option<CanonicalModel> {
    let mut b = Builder { prog, root_env: Vec::new(), parent: vec![NIL], cells: Vec::new(), eqs: Vec::new(), diseqs: Vec::new() };
    let mut names: HashMap<&str, usize> = HashMap::new();
    let mut root = Vec::new();
    for t in args {
        root.push(match t {
            Term::Nil => NIL,
            Term::Var(v) => match names.get(v.as_str()) {
                Some(&x) => x,
                None => {
                    let x = b.fresh();
                    names.insert(v, x);
                    x
                }
            },
        });
    }
    b.walk(shape, &root, &mut Vec::new());
    for (x, y) in b.eqs.clone() {
        let (rx, ry) = (b.find(x), b.find(y));
        if rx != ry {
            // keep nil as the representative of its class
            if ry == NIL {
                b.parent[rx] = ry;
            } else {
                b.parent[ry] = rx;
            }
        }
    }
    let nil = b.find(NIL);
    let mut loc_of: HashMap<usize, Loc> = HashMap::new();
    let mut nodes = Vec::new();
    for (k, (src, _, addr)) in b.cells.clone().into_iter().enumerate() {
        let c = b.find(src);
        if c == nil || loc_of.contains_key(&c) {
            return None;
        }
        loc_of.insert(c, Loc(k as i64));
        nodes.push((addr, Loc(k as i64)));
    }
    for (x, y) in b.diseqs.clone() {
        if b.find(x) == b.find(y) {
            return None;
        }
    }
    let mut next = b.cells.len() as i64;
    let mut loc = |b: &mut Builder, x: usize| -> Loc {
        let c = b.find(x);
        if c == nil {
            return Loc::NIL;
        }
        *loc_of.entry(c).or_insert_with(|| {
            next += 1;
            Loc(next - 1)
        })
    };
    let mut heap = Heap::new();
    for (src, dst, _) in b.cells.clone() {
        let s = loc(&mut b, src);
        let d = dst.iter().map(|&x| loc(&mut b, x)).collect();
        heap.insert(s, d);
    }
    let mut store = Store::new();
    for (t, &x) in args.iter().zip(&root) {
        if let Term::Var(v) = t {
            store.insert(v.clone(), loc(&mut b, x));
        }
    }
    let root_env = b.root_env.clone().into_iter().map(|x| loc(&mut b, x)).collect();
    Some(CanonicalModel { structure: Structure::new(store, heap), nodes, root_env })
}
