use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::machine::{Atm, Config, Kind, Move, Transition};

/// Address of a node: branching `w`, its action children `w.j`, and the
/// branching node under action `w.j` at `w.j.0`.
pub type Addr = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(serialize = "L: Serialize", deserialize = "L: Deserialize<'de>"))]
pub struct Branch<L> {
    #[serde(flatten)]
    pub label: L,
    #[serde(default)]
    pub actions: Vec<Action<L>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(serialize = "L: Serialize", deserialize = "L: Deserialize<'de>"))]
pub struct Action<L> {
    pub read: String,
    pub write: String,
    #[serde(rename = "move")]
    pub mv: Move,
    pub child: Branch<L>,
}

/// Branching label of a pseudo-derivation: state and head position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub state: String,
    pub pos: u64,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.state, self.pos)
    }
}

pub type DerivationTree = Branch<Config>;
pub type PseudoDerivationTree = Branch<Pos>;

impl<L> Branch<L> {
    pub fn leaf(label: L) -> Branch<L> {
        Branch { label, actions: Vec::new() }
    }

    /// Number of branching and action nodes.
    pub fn size(&self) -> usize {
        1 + self.actions.iter().map(|a| 1 + a.child.size()).sum::<usize>()
    }

    pub fn map<M>(&self, f: &impl Fn(&L) -> M) -> Branch<M> {
        Branch {
            label: f(&self.label),
            actions: self
                .actions
                .iter()
                .map(|a| Action { read: a.read.clone(), write: a.write.clone(), mv: a.mv, child: a.child.map(f) })
                .collect(),
        }
    }

    /// Branching nodes in preorder, with addresses.
    pub fn branches(&self) -> Vec<(Addr, &Branch<L>)> {
        let mut out = Vec::new();
        fn go<'a, L>(b: &'a Branch<L>, addr: &mut Addr, out: &mut Vec<(Addr, &'a Branch<L>)>) {
            out.push((addr.clone(), b));
            for (j, a) in b.actions.iter().enumerate() {
                addr.push(j as u32);
                addr.push(0);
                go(&a.child, addr, out);
                addr.pop();
                addr.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn branch_at(&self, addr: &[u32]) -> Option<&Branch<L>> {
        match addr {
            [] => Some(self),
            [j, 0, rest @ ..] => self.actions.get(*j as usize)?.child.branch_at(rest),
            _ => None,
        }
    }

    pub fn action_at(&self, addr: &[u32]) -> Option<&Action<L>> {
        match addr {
            [j] => self.actions.get(*j as usize),
            [j, 0, rest @ ..] => self.actions.get(*j as usize)?.child.action_at(rest),
            _ => None,
        }
    }
}

impl<L: Serialize + DeserializeOwned> Branch<L> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(src: &str) -> Result<Branch<L>, serde_json::Error> {
        serde_json::from_str(src)
    }
}

impl<L: fmt::Display> Branch<L> {
    fn render(&self, depth: usize, out: &mut String) {
        out.push_str(&format!("{}{}\n", "  ".repeat(depth), self.label));
        for a in &self.actions {
            out.push_str(&format!("{}({},{},{})\n", "  ".repeat(depth + 1), a.read, a.write, a.mv));
            a.child.render(depth + 2, out);
        }
    }
}

impl<L: fmt::Display> fmt::Display for Branch<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        f.write_str(s.trim_end())
    }
}

pub fn project(t: &DerivationTree) -> PseudoDerivationTree {
    t.map(&|c: &Config| Pos { state: c.state.clone(), pos: c.head })
}

fn same_transitions<L>(m: &Atm, q: &str, a: &str, actions: &[Action<L>], state: impl Fn(&L) -> &str) -> bool {
    let mut want: Vec<(&str, &str, &str, Move)> =
        m.transitions(q, a).map(|t| (t.read.as_str(), t.write.as_str(), t.to.as_str(), t.mv)).collect();
    let mut got: Vec<(&str, &str, &str, Move)> = actions
        .iter()
        .map(|x| (x.read.as_str(), x.write.as_str(), state(&x.child.label), x.mv))
        .collect();
    want.sort();
    got.sort();
    want == got
}

fn transition_of<L>(q: &str, x: &Action<L>, to: &str) -> Transition {
    Transition { from: q.to_string(), read: x.read.clone(), to: to.to_string(), write: x.write.clone(), mv: x.mv }
}

fn check_config(m: &Atm, b: &DerivationTree) -> bool {
    let c = &b.label;
    if !m.kind.contains_key(&c.state) {
        return false;
    }
    let a = c.tape.read(c.head, &m.blank);
    let ok_shape = match m.kind(&c.state) {
        Kind::Exists => b.actions.len() == 1,
        Kind::Forall => same_transitions(m, &c.state, a, &b.actions, |l: &Config| &l.state),
    };
    ok_shape
        && b.actions.iter().all(|x| {
            let tr = transition_of(&c.state, x, &x.child.label.state);
            matches!(crate::machine::step(m, c, &tr), Ok(next) if next == x.child.label) && check_config(m, &x.child)
        })
}

/// Whether `t` is a derivation from a configuration `(q0, w, 0)`.
pub fn check_derivation(m: &Atm, t: &DerivationTree) -> bool {
    t.label.state == m.initial && t.label.head == 0 && check_config(m, t)
}

fn check_pos(m: &Atm, b: &PseudoDerivationTree, bound: u64) -> bool {
    let Pos { state: q, pos } = &b.label;
    if !m.kind.contains_key(q) || *pos >= bound {
        return false;
    }
    let ok_shape = match m.kind(q) {
        Kind::Exists => {
            b.actions.len() == 1 && {
                let x = &b.actions[0];
                m.has_transition(q, &x.read, &x.child.label.state, &x.write, x.mv)
            }
        }
        Kind::Forall => match b.actions.first() {
            None => m.alphabet.iter().any(|a| m.count(q, a) == 0),
            Some(x) => same_transitions(m, q, &x.read, &b.actions, |l: &Pos| &l.state),
        },
    };
    ok_shape && b.actions.iter().all(|x| check_pos(m, &x.child, bound))
}

/// Whether `t` is a pseudo-derivation with every position below `2^n`.
pub fn check_pseudo_derivation(m: &Atm, t: &PseudoDerivationTree, n: u32) -> bool {
    t.label.state == m.initial && t.label.pos == 0 && check_pos(m, t, 1u64 << n)
}

/// Relabels from the root down, replaying each write on the tape, and
/// keeps the result if it is a derivation.
pub fn pseudo_to_derivation(m: &Atm, t: &PseudoDerivationTree) -> Option<DerivationTree> {
    fn go(m: &Atm, b: &PseudoDerivationTree, tape: crate::machine::Tape) -> DerivationTree {
        let c = Config { state: b.label.state.clone(), tape, head: b.label.pos };
        let actions = b
            .actions
            .iter()
            .map(|x| Action {
                read: x.read.clone(),
                write: x.write.clone(),
                mv: x.mv,
                child: go(m, &x.child, c.tape.write(c.head, &x.write, &m.blank)),
            })
            .collect();
        Branch { label: c, actions }
    }
    let d = go(m, t, Default::default());
    check_derivation(m, &d).then_some(d)
}
