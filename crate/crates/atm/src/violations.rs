use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::machine::{Atm, Kind};
use crate::tree::{Addr, PseudoDerivationTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    /// I: the next position is not the old one moved by the action.
    HeadMove,
    /// II: a cell is read back with a symbol other than the one last written.
    StaleRead,
    /// III: a never written cell is read as something other than blank.
    NonBlankInit,
    /// IV: a universal leaf whose actual symbol has transitions.
    LeafRead,
}

impl ViolationKind {
    pub fn numeral(self) -> &'static str {
        match self {
            ViolationKind::HeadMove => "I",
            ViolationKind::StaleRead => "II",
            ViolationKind::NonBlankInit => "III",
            ViolationKind::LeafRead => "IV",
        }
    }
}

/// `node` is the offending branching node, `actions` the offending action
/// nodes below it (for I, the action leading to it), `cause` the action
/// that last wrote the cell under the head, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Addr,
    pub actions: Vec<Addr>,
    pub cause: Option<Addr>,
}

fn show(a: &Addr) -> String {
    format!("[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.kind.numeral(), show(&self.node))?;
        if !self.actions.is_empty() {
            let xs: Vec<String> = self.actions.iter().map(show).collect();
            write!(f, " actions {}", xs.join(" "))?;
        }
        if let Some(c) = &self.cause {
            write!(f, " written at {}", show(c))?;
        }
        Ok(())
    }
}

type Written = BTreeMap<u64, (String, Addr)>;

fn go(m: &Atm, b: &PseudoDerivationTree, addr: &mut Addr, tape: &Written, out: &mut Vec<Violation>) {
    let i = b.label.pos;
    let (sym, cause) = match tape.get(&i) {
        Some((s, a)) => (s.as_str(), Some(a.clone())),
        None => (m.blank.as_str(), None),
    };
    let child_addr = |addr: &Addr, j: usize| {
        let mut a = addr.clone();
        a.push(j as u32);
        a
    };
    let bad: Vec<Addr> =
        b.actions.iter().enumerate().filter(|(_, x)| x.read != sym).map(|(j, _)| child_addr(addr, j)).collect();
    if !bad.is_empty() {
        let kind = if cause.is_some() { ViolationKind::StaleRead } else { ViolationKind::NonBlankInit };
        out.push(Violation { kind, node: addr.clone(), actions: bad, cause: cause.clone() });
    }
    if b.actions.is_empty() && m.kind.get(&b.label.state) == Some(&Kind::Forall) && m.count(&b.label.state, sym) > 0 {
        out.push(Violation { kind: ViolationKind::LeafRead, node: addr.clone(), actions: Vec::new(), cause });
    }
    for (j, x) in b.actions.iter().enumerate() {
        let act = child_addr(addr, j);
        addr.push(j as u32);
        addr.push(0);
        if x.mv.apply(i) != Some(x.child.label.pos) {
            out.push(Violation { kind: ViolationKind::HeadMove, node: addr.clone(), actions: vec![act.clone()], cause: None });
        }
        let mut next = tape.clone();
        next.insert(i, (x.write.clone(), act));
        go(m, &x.child, addr, &next, out);
        addr.pop();
        addr.pop();
    }
}

/// Every violation of the tape and head conditions, in preorder. Empty
/// exactly when the pseudo-derivation yields a derivation.
pub fn violations(m: &Atm, t: &PseudoDerivationTree) -> Vec<Violation> {
    let mut out = Vec::new();
    go(m, t, &mut Vec::new(), &BTreeMap::new(), &mut out);
    out
}

impl Violation {
    /// Re-derives the violation from its witnesses alone.
    pub fn confirm(&self, m: &Atm, t: &PseudoDerivationTree) -> bool {
        let Some(node) = t.branch_at(&self.node) else { return false };
        let i = node.label.pos;
        // last write to cell i on the path to `node`, and the symbol there
        let mut last: Option<(Addr, String)> = None;
        let mut cur = t;
        let mut k = 0;
        while k < self.node.len() {
            if cur.label.pos == i {
                let x = &cur.actions[self.node[k] as usize];
                last = Some((self.node[..=k].to_vec(), x.write.clone()));
            }
            cur = &cur.actions[self.node[k] as usize].child;
            k += 2;
        }
        let sym = last.as_ref().map(|l| l.1.clone()).unwrap_or_else(|| m.blank.clone());
        let cause_ok = self.cause == last.as_ref().map(|l| l.0.clone());
        let reads_wrong = |a: &Addr| {
            a.len() == self.node.len() + 1
                && a.starts_with(&self.node)
                && t.action_at(a).is_some_and(|x| x.read != sym)
        };
        match self.kind {
            ViolationKind::HeadMove => {
                let [act] = &self.actions[..] else { return false };
                let parent = &self.node[..self.node.len().saturating_sub(2)];
                match (t.branch_at(parent), t.action_at(act)) {
                    (Some(p), Some(x)) => {
                        self.node.len() >= 2
                            && act[..] == self.node[..self.node.len() - 1]
                            && x.mv.apply(p.label.pos) != Some(i)
                    }
                    _ => false,
                }
            }
            ViolationKind::StaleRead => {
                last.is_some() && cause_ok && !self.actions.is_empty() && self.actions.iter().all(reads_wrong)
            }
            ViolationKind::NonBlankInit => {
                last.is_none() && cause_ok && !self.actions.is_empty() && self.actions.iter().all(reads_wrong)
            }
            ViolationKind::LeafRead => {
                cause_ok
                    && node.actions.is_empty()
                    && m.kind.get(&node.label.state) == Some(&Kind::Forall)
                    && m.count(&node.label.state, &sym) > 0
            }
        }
    }
}
