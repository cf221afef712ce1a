//! Bounded entailment between predicate atoms.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sl_core::{Atom, Sid, Structure, SymbolicHeap, Term};
use unfolding::{canonical_model, Budget, Evaluator, Program, Shape, UnfoldingTree, Verdict};

use crate::HarnessError;

#[derive(Clone, Debug)]
pub enum EntailmentVerdict {
    HoldsWithinBound { bound: usize, models: usize },
    CounterModel { structure: Structure, tree: UnfoldingTree, note: String },
}

impl EntailmentVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, EntailmentVerdict::HoldsWithinBound { .. })
    }

    pub fn counter_model(&self) -> Option<&Structure> {
        match self {
            EntailmentVerdict::CounterModel { structure, .. } => Some(structure),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    verdict: &'a str,
    bound: Option<usize>,
    models: Option<usize>,
    structure: Option<sl_core::StructureJson>,
    tree: Option<unfolding::TreeJson>,
    note: Option<&'a str>,
}

impl EntailmentVerdict {
    pub fn to_json(&self) -> String {
        let v = match self {
            EntailmentVerdict::HoldsWithinBound { bound, models } => VerdictJson {
                verdict: "holds-within-bound",
                bound: Some(*bound),
                models: Some(*models),
                structure: None,
                tree: None,
                note: None,
            },
            EntailmentVerdict::CounterModel { structure, tree, note } => VerdictJson {
                verdict: "counter-model",
                bound: None,
                models: None,
                structure: Some(structure.to_json()),
                tree: Some(tree.to_json()),
                note: Some(note),
            },
        };
        serde_json::to_string_pretty(&v).expect("serializable")
    }
}

#[derive(Clone, Debug, Default)]
pub struct EntailOptions {
    pub max_nodes: usize,
    /// Predicates counted towards `max_nodes`; all of them when `None`.
    pub counted: Option<Vec<String>>,
}

fn pred_parts(a: &Atom) -> Result<(&str, &[Term]), HarnessError> {
    match a {
        Atom::Pred { pred, args } => Ok((pred, args)),
        other => Err(HarnessError::NotAPredicate(other.to_string())),
    }
}

/// Enumerates the canonical models of `lhs` from unfolding trees within the
/// bound and decides `rhs` exactly on each. The first model (in enumeration
/// order) failing `rhs` is returned after being checked again.
pub fn bounded_entailment(sid: &Sid, lhs: &Atom, rhs: &Atom, opts: &EntailOptions) -> Result<EntailmentVerdict, HarnessError> {
    let prog = Program::new(sid);
    if !prog.is_progressing() {
        return Err(HarnessError::NotProgressing);
    }
    let (lp, largs) = pred_parts(lhs)?;
    let (rp, rargs) = pred_parts(rhs)?;
    if let Some(v) = rargs.iter().find(|t| **t != Term::Nil && !largs.contains(t)) {
        return Err(HarnessError::FreeVariable(v.to_string()));
    }
    prog.id(lp).map_err(|_| HarnessError::UnknownPredicate(lp.into()))?;
    prog.id(rp).map_err(|_| HarnessError::UnknownPredicate(rp.into()))?;
    // enumerate over the left-hand side's predicates only
    let lsid = reachable(sid, lp);
    let lprog = Program::new(&lsid);
    let lid = lprog.id(lp).expect("reachable from itself");
    let budget = match &opts.counted {
        None => Budget::all(),
        Some(ps) => Budget::only(ps.iter().cloned()),
    };
    let mut en = unfolding::Enumerator::new(&lprog, &budget).map_err(|e| HarnessError::Enumeration(e.to_string()))?;
    let shapes: Vec<Arc<Shape>> = en.up_to(lid, opts.max_nodes);
    let rf = SymbolicHeap::from_atoms(vec![rhs.clone()]);
    let refuted = |s: &Arc<Shape>| -> Option<Structure> {
        let cm = canonical_model(&lprog, largs, s)?;
        let st = cm.structure;
        match Evaluator::new(&prog, &st).query(&st, &rf) {
            Ok(Some(_)) => None,
            _ => Some(st),
        }
    };
    let hit = shapes.par_iter().enumerate().find_map_first(|(i, s)| refuted(s).map(|st| (i, st)));
    let Some((i, st)) = hit else {
        return Ok(EntailmentVerdict::HoldsWithinBound { bound: opts.max_nodes, models: shapes.len() });
    };
    let lf = SymbolicHeap::from_atoms(vec![lhs.clone()]);
    let lhs_ok = unfolding::models_sid(&st, sid, &lf, 0) == Ok(Verdict::True);
    let rhs_ok = unfolding::models_sid(&st, sid, &rf, 0) == Ok(Verdict::True);
    if !lhs_ok || rhs_ok {
        return Err(HarnessError::UnverifiedCounterModel);
    }
    let tree = unfolding::UnfoldingTree::from_shape(&lsid, lp, largs, &shapes[i]);
    let note = format!("{} does not hold on the model of unfolding tree #{} ({} cells)", rhs, i, st.heap.len());
    Ok(EntailmentVerdict::CounterModel { structure: st, tree, note })
}

/// The rules of the predicates reachable from `pred`.
pub fn reachable(sid: &Sid, pred: &str) -> Sid {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![pred.to_string()];
    while let Some(p) = stack.pop() {
        if !seen.insert(p.clone()) {
            continue;
        }
        for (_, r) in sid.rules_of(&p) {
            stack.extend(r.body.pred_atoms().map(|(q, _)| q.to_string()));
        }
    }
    let rules = sid.rules.iter().filter(|r| seen.contains(&r.head)).cloned().collect();
    let arities = sid.arities.iter().filter(|(p, _)| seen.contains(*p)).map(|(p, a)| (p.clone(), *a)).collect();
    Sid::with_arities(arities, rules)
        .expect("sub-SID of a valid SID")
}

/// Canonical models of `lhs` from unfolding trees within the bound, in
/// enumeration order.
pub fn lhs_models(sid: &Sid, lhs: &Atom, opts: &EntailOptions) -> Result<Vec<Structure>, HarnessError> {
    let (lp, largs) = pred_parts(lhs)?;
    if !sid.arities.contains_key(lp) {
        return Err(HarnessError::UnknownPredicate(lp.into()));
    }
    let lsid = reachable(sid, lp);
    let prog = Program::new(&lsid);
    let budget = match &opts.counted {
        None => Budget::all(),
        Some(ps) => Budget::only(ps.iter().cloned()),
    };
    let mut en = unfolding::Enumerator::new(&prog, &budget).map_err(|e| HarnessError::Enumeration(e.to_string()))?;
    let id = prog.id(lp).expect("reachable from itself");
    Ok(en.up_to(id, opts.max_nodes).iter().filter_map(|s| canonical_model(&prog, largs, s)).map(|m| m.structure).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sl_core::{parse_atom, parse_sid};

    const SID: &str = "ls(x,y) <= x -> (y,nil)\n\
                       ls(x,y) <= \\E z . x -> (z,nil) * ls(z,y)\n\
                       seg(x,y) <= x -> (y,nil)\n\
                       seg(x,y) <= \\E z . x -> (z,nil) * seg(z,y)\n\
                       one(x,y) <= x -> (y,nil)\n\
                       other(x) <= x -> (nil,nil)";

    fn atom(s: &str) -> Atom {
        let (p, args) = parse_atom(s).unwrap();
        Atom::pred(p, args)
    }

    fn opts(n: usize) -> EntailOptions {
        EntailOptions { max_nodes: n, counted: None }
    }

    #[test]
    fn same_shape_entails() {
        let sid = parse_sid(SID).unwrap();
        let v = bounded_entailment(&sid, &atom("ls(x,y)"), &atom("seg(x,y)"), &opts(5)).unwrap();
        assert!(matches!(v, EntailmentVerdict::HoldsWithinBound { bound: 5, models: 5 }));
    }

    #[test]
    fn longer_list_refutes_single_cell() {
        let sid = parse_sid(SID).unwrap();
        let v = bounded_entailment(&sid, &atom("ls(x,y)"), &atom("one(x,y)"), &opts(5)).unwrap();
        let st = v.counter_model().unwrap();
        assert_eq!(st.heap.len(), 2);
        assert!(!v.holds());
    }

    #[test]
    fn bad_queries() {
        let sid = parse_sid(SID).unwrap();
        let e = |l: &str, r: &str| bounded_entailment(&sid, &atom(l), &atom(r), &opts(3)).unwrap_err();
        assert!(matches!(e("ls(x,y)", "other(z)"), HarnessError::FreeVariable(_)));
        assert!(matches!(e("ls(x,y)", "nope(x)"), HarnessError::UnknownPredicate(_)));
        let eq = Atom::Eq(Term::var("x"), Term::Nil);
        assert!(matches!(bounded_entailment(&sid, &eq, &atom("ls(x,y)"), &opts(3)), Err(HarnessError::NotAPredicate(_))));
    }

    #[test]
    fn reachable_keeps_only_callees() {
        let sid = parse_sid(SID).unwrap();
        let r = reachable(&sid, "ls");
        assert_eq!(r.rules.len(), 2);
        assert!(r.arities.contains_key("ls") && !r.arities.contains_key("seg"));
    }

    #[test]
    fn models_in_enumeration_order() {
        let sid = parse_sid(SID).unwrap();
        let ms = lhs_models(&sid, &atom("ls(x,y)"), &opts(4)).unwrap();
        assert_eq!(ms.iter().map(|m| m.heap.len()).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }
}
