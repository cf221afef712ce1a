//! Slot-indexed form of a SID used by enumeration and evaluation.

use std::collections::HashMap;

use sl_core::{Atom, Sid, SidError, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Var(u32),
    Nil,
}

#[derive(Clone, Debug)]
pub struct CRule {
    pub index: usize,
    pub head: u32,
    pub nparams: usize,
    /// Parameters first, then the existentials in prefix order.
    pub vars: Vec<String>,
    pub pts: Vec<(Slot, Vec<Slot>)>,
    pub calls: Vec<(u32, Vec<Slot>)>,
    pub eqs: Vec<(Slot, Slot)>,
    pub diseqs: Vec<(Slot, Slot)>,
}

impl CRule {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }
}

#[derive(Clone, Debug)]
pub struct Program {
    pub names: Vec<String>,
    pub ids: HashMap<String, u32>,
    pub arity: Vec<usize>,
    pub rules: Vec<CRule>,
    pub by_pred: Vec<Vec<usize>>,
}

impl Program {
    pub fn new(sid: &Sid) -> Program {
        let names: Vec<String> = sid.arities.keys().cloned().collect();
        let ids: HashMap<String, u32> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let arity = names.iter().map(|n| sid.arities[n]).collect();
        let mut by_pred = vec![Vec::new(); names.len()];
        let mut rules = Vec::with_capacity(sid.rules.len());
        for (index, r) in sid.rules.iter().enumerate() {
            let mut vars = r.params.clone();
            vars.extend(r.body.bound.iter().cloned());
            let pos: HashMap<&str, u32> =
                vars.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
            let slot = |t: &Term| match t {
                Term::Nil => Slot::Nil,
                Term::Var(v) => Slot::Var(pos[v.as_str()]),
            };
            let mut c = CRule {
                index,
                head: ids[&r.head],
                nparams: r.params.len(),
                vars: vars.clone(),
                pts: Vec::new(),
                calls: Vec::new(),
                eqs: Vec::new(),
                diseqs: Vec::new(),
            };
            for a in &r.body.atoms {
                match a {
                    Atom::PointsTo { src, dst } => c.pts.push((slot(src), dst.iter().map(slot).collect())),
                    Atom::Pred { pred, args } => c.calls.push((ids[pred], args.iter().map(slot).collect())),
                    Atom::Eq(x, y) => c.eqs.push((slot(x), slot(y))),
                    Atom::Diseq(x, y) => c.diseqs.push((slot(x), slot(y))),
                }
            }
            by_pred[c.head as usize].push(index);
            rules.push(c);
        }
        Program { names, ids, arity, rules, by_pred }
    }

    pub fn id(&self, pred: &str) -> Result<u32, SidError> {
        self.ids.get(pred).copied().ok_or_else(|| SidError::UnknownPredicate(pred.to_string()))
    }

    /// Every rule allocates exactly its first parameter and nothing else.
    pub fn is_progressing(&self) -> bool {
        self.rules
            .iter()
            .all(|r| r.nparams >= 1 && r.pts.len() == 1 && r.pts[0].0 == Slot::Var(0))
    }
}
