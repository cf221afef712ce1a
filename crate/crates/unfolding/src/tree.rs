use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use sl_core::{fresh_name, Atom, Sid, SymbolicHeap, Term};

use crate::shape::Shape;

pub type NodeAddr = Vec<u32>;

/// A node labelled with its predicate atom and the instantiated rule body.
/// `children[i]` unfolds the i-th predicate atom of `body.atoms`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UNode {
    pub pred: String,
    pub args: Vec<Term>,
    pub rule: usize,
    pub body: SymbolicHeap,
    pub children: Vec<UNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfoldingTree {
    pub root: UNode,
}

impl UnfoldingTree {
    pub fn from_shape(sid: &Sid, pred: &str, args: &[Term], shape: &Shape) -> UnfoldingTree {
        UnfoldingTree { root: build(sid, pred, args, shape) }
    }

    pub fn size(&self) -> usize {
        fn go(n: &UNode) -> usize {
            1 + n.children.iter().map(go).sum::<usize>()
        }
        go(&self.root)
    }

    /// Nodes in preorder with their addresses.
    pub fn nodes(&self) -> Vec<(NodeAddr, &UNode)> {
        let mut out = Vec::new();
        fn go<'a>(n: &'a UNode, addr: &mut NodeAddr, out: &mut Vec<(NodeAddr, &'a UNode)>) {
            out.push((addr.clone(), n));
            for (i, c) in n.children.iter().enumerate() {
                addr.push(i as u32);
                go(c, addr, out);
                addr.pop();
            }
        }
        go(&self.root, &mut Vec::new(), &mut out);
        out
    }

    pub fn characteristic_formula(&self) -> SymbolicHeap {
        self.characteristic_formula_with_origins().0
    }

    /// The characteristic formula together with the address of the node
    /// each of its atoms comes from.
    pub fn characteristic_formula_with_origins(&self) -> (SymbolicHeap, Vec<NodeAddr>) {
        let mut used: BTreeSet<String> =
            self.root.args.iter().filter_map(|t| t.as_var().map(str::to_string)).collect();
        let mut origins = Vec::new();
        let f = flatten(&self.root, &BTreeMap::new(), &mut used, &mut Vec::new(), &mut origins);
        (f, origins)
    }

    pub fn to_json(&self) -> TreeJson {
        fn go(n: &UNode, addr: &mut NodeAddr) -> TreeJson {
            let atom = Atom::pred(n.pred.clone(), n.args.clone()).to_string();
            let mut children = Vec::new();
            for (i, c) in n.children.iter().enumerate() {
                addr.push(i as u32);
                children.push(go(c, addr));
                addr.pop();
            }
            TreeJson { addr: addr.clone(), atom, body: n.body.to_string(), children }
        }
        go(&self.root, &mut Vec::new())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeJson {
    pub addr: NodeAddr,
    pub atom: String,
    pub body: String,
    pub children: Vec<TreeJson>,
}

fn build(sid: &Sid, pred: &str, args: &[Term], shape: &Shape) -> UNode {
    let rule = &sid.rules[shape.rule];
    debug_assert_eq!(rule.head, pred);
    let body = rule.instantiate(args);
    let children = body
        .pred_atoms()
        .zip(&shape.children)
        .map(|((p, a), s)| build(sid, p, a, s))
        .collect();
    UNode { pred: pred.to_string(), args: args.to_vec(), rule: shape.rule, body, children }
}

// Replaces each predicate atom by its child's formula. Every bound variable
// is renamed to a name not seen so far; `m` maps the node's names to the
// names they received higher up.
fn flatten(
    n: &UNode,
    m: &BTreeMap<String, Term>,
    used: &mut BTreeSet<String>,
    addr: &mut NodeAddr,
    origins: &mut Vec<NodeAddr>,
) -> SymbolicHeap {
    let mut m = m.clone();
    let mut bound = Vec::new();
    for b in &n.body.bound {
        let nb = fresh_name(b, used);
        used.insert(nb.clone());
        m.insert(b.clone(), Term::Var(nb.clone()));
        bound.push(nb);
    }
    let mut atoms = Vec::new();
    let mut kids = n.children.iter().enumerate();
    for a in &n.body.atoms {
        match a {
            Atom::Pred { .. } => {
                let (i, child) = kids.next().expect("one child per predicate atom");
                addr.push(i as u32);
                let f = flatten(child, &m, used, addr, origins);
                addr.pop();
                bound.extend(f.bound);
                atoms.extend(f.atoms);
            }
            _ => {
                atoms.push(a.subst(&m));
                origins.push(addr.clone());
            }
        }
    }
    SymbolicHeap::new(bound, atoms)
}

pub fn shape_to_tree(sid: &Sid, pred: &str, args: &[Term], shape: &Arc<Shape>) -> UnfoldingTree {
    UnfoldingTree::from_shape(sid, pred, args, shape)
}
