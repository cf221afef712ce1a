//! Unfolding trees and the semantics of inductive definitions.
//!
//! Trees are enumerated as rule-choice [`Shape`]s and instantiated on
//! demand. Membership on a fixed structure is decided by [`eval`] for
//! progressing SIDs and by bounded tree enumeration otherwise.

pub mod canonical;
pub mod eval;
pub mod program;
pub mod shape;
pub mod tree;

use std::collections::{BTreeMap, BTreeSet};

use sl_core::{find_match, satisfies, Atom, Loc, Sid, Structure, SymbolicHeap, Term};
use thiserror::Error;

pub use canonical::{canonical_model, CanonicalModel};
pub use eval::{Deriv, Evaluator};
pub use program::Program;
pub use shape::{Budget, EnumError, Enumerator, Shape};
pub use tree::{NodeAddr, TreeJson, UNode, UnfoldingTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnfoldError {
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("structure is not a model")]
    NotAModel,
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Sat(#[from] sl_core::SatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    FalseWithinBound,
}

pub type Decoration = BTreeMap<Loc, String>;
pub type Embedding = BTreeMap<NodeAddr, Loc>;

fn check_preds(sid: &Sid, f: &SymbolicHeap) -> Result<(), UnfoldError> {
    for (p, _) in f.pred_atoms() {
        if !sid.arities.contains_key(p) {
            return Err(UnfoldError::UnknownPredicate(p.to_string()));
        }
    }
    Ok(())
}

/// Every unfolding tree of `pred(args)` with at most `max_nodes` nodes, by
/// increasing size.
pub fn enumerate_unfolding_trees(
    sid: &Sid,
    pred: &str,
    args: &[Term],
    max_nodes: usize,
) -> Result<Vec<UnfoldingTree>, UnfoldError> {
    let prog = Program::new(sid);
    let id = prog.id(pred).map_err(|_| UnfoldError::UnknownPredicate(pred.to_string()))?;
    let mut e = Enumerator::new(&prog, &Budget::all())?;
    Ok(e.up_to(id, max_nodes)
        .iter()
        .map(|s| UnfoldingTree::from_shape(sid, pred, args, s))
        .collect())
}

/// `(s,h) |=_S f`. Exact for progressing SIDs; otherwise only trees with at
/// most `max_nodes` nodes in total are tried.
pub fn models_sid(st: &Structure, sid: &Sid, f: &SymbolicHeap, max_nodes: usize) -> Result<Verdict, UnfoldError> {
    check_preds(sid, f)?;
    let prog = Program::new(sid);
    if prog.is_progressing() {
        if let Ok(r) = Evaluator::new(&prog, st).query(st, f) {
            return Ok(if r.is_some() { Verdict::True } else { Verdict::FalseWithinBound });
        }
    }
    oracle_models_sid(st, sid, f, max_nodes)
}

/// Definition-level check: replace every predicate atom by the
/// characteristic formula of some tree (total size at most `max_nodes`) and
/// test satisfaction.
pub fn oracle_models_sid(
    st: &Structure,
    sid: &Sid,
    f: &SymbolicHeap,
    max_nodes: usize,
) -> Result<Verdict, UnfoldError> {
    check_preds(sid, f)?;
    let atoms: Vec<(String, Vec<Term>)> =
        f.pred_atoms().map(|(p, a)| (p.to_string(), a.to_vec())).collect();
    let base = SymbolicHeap::new(
        f.bound.clone(),
        f.atoms.iter().filter(|a| !matches!(a, Atom::Pred { .. })).cloned().collect(),
    );
    let mut per_atom = Vec::new();
    for (p, a) in &atoms {
        per_atom.push(enumerate_unfolding_trees(sid, p, a, max_nodes)?);
    }
    let mut pick = vec![0usize; atoms.len()];
    loop {
        if pick.iter().zip(&per_atom).all(|(&i, l)| i < l.len()) {
            let total: usize = pick.iter().zip(&per_atom).map(|(&i, l)| l[i].size()).sum();
            if total <= max_nodes {
                let mut g = base.clone();
                for (&i, l) in pick.iter().zip(&per_atom) {
                    g = g.star(&l[i].characteristic_formula());
                }
                if satisfies(st, &g, &BTreeSet::new())? {
                    return Ok(Verdict::True);
                }
            }
        }
        // odometer over the tree lists
        let mut k = atoms.len();
        loop {
            if k == 0 {
                return Ok(Verdict::FalseWithinBound);
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < per_atom[k].len() {
                break;
            }
            pick[k] = 0;
        }
        if per_atom.iter().any(|l| l.is_empty()) {
            return Ok(Verdict::FalseWithinBound);
        }
    }
}

/// Predicate decoration of a model of `pred(args)`: the predicate whose
/// rule allocated each cell in the first derivation found.
pub fn decorate(st: &Structure, sid: &Sid, pred: &str, args: &[Term]) -> Result<Decoration, UnfoldError> {
    let prog = Program::new(sid);
    prog.id(pred).map_err(|_| UnfoldError::UnknownPredicate(pred.to_string()))?;
    let f = SymbolicHeap::from_atoms(vec![Atom::pred(pred, args.to_vec())]);
    if !prog.is_progressing() {
        return Err(UnfoldError::NotAModel);
    }
    match Evaluator::new(&prog, st).query(st, &f) {
        Ok(Some(ds)) => Ok(eval::decoration_of(&prog, &ds)),
        _ => Err(UnfoldError::NotAModel),
    }
}

/// Maps every node of `u` to the cell its points-to atom consumes in a
/// satisfying match of the characteristic formula.
pub fn embed(u: &UnfoldingTree, st: &Structure) -> Result<Embedding, UnfoldError> {
    let (f, origins) = u.characteristic_formula_with_origins();
    let m = find_match(st, &f, &BTreeSet::new())?.ok_or(UnfoldError::NotAModel)?;
    let mut out = Embedding::new();
    for (cell, addr) in m.iter().zip(origins) {
        if let Some(l) = cell {
            out.insert(addr, *l);
        }
    }
    Ok(out)
}
