use std::collections::HashMap;
use std::rc::Rc;

use crate::machine::{step, Atm, Config, Kind, Transition};
use crate::tree::{Action, Branch, DerivationTree, Pos, PseudoDerivationTree};

enum Memo {
    Found(Rc<DerivationTree>, usize),
    NoneWithin(usize),
}

struct Search<'a> {
    m: &'a Atm,
    width: u64,
    memo: HashMap<Config, Memo>,
}

impl Search<'_> {
    fn successor(&self, c: &Config, t: &Transition) -> Option<Config> {
        step(self.m, c, t).ok().filter(|n| n.head < self.width)
    }

    fn action(t: &Transition, child: &DerivationTree) -> Action<Config> {
        Action { read: t.read.clone(), write: t.write.clone(), mv: t.mv, child: child.clone() }
    }

    /// A smallest derivation from `c` with at most `budget` nodes.
    fn best(&mut self, c: &Config, budget: usize) -> Option<(Rc<DerivationTree>, usize)> {
        if budget == 0 {
            return None;
        }
        match self.memo.get(c) {
            Some(Memo::Found(t, s)) => return (*s <= budget).then(|| (t.clone(), *s)),
            Some(Memo::NoneWithin(b)) if budget <= *b => return None,
            _ => {}
        }
        let m = self.m;
        let trans: Vec<&Transition> = m.transitions(&c.state, c.tape.read(c.head, &m.blank)).collect();
        let found = match m.kind(&c.state) {
            Kind::Exists => {
                let mut best: Option<(DerivationTree, usize)> = None;
                for t in trans {
                    let Some(next) = self.successor(c, t) else { continue };
                    let cap = best.as_ref().map_or(budget, |b| b.1 - 1).min(budget);
                    if cap < 3 {
                        continue;
                    }
                    if let Some((sub, s)) = self.best(&next, cap - 2) {
                        let tree = Branch { label: c.clone(), actions: vec![Self::action(t, &sub)] };
                        best = Some((tree, s + 2));
                    }
                }
                best
            }
            Kind::Forall => {
                let k = trans.len();
                let mut total = 1 + k;
                let mut actions = Vec::with_capacity(k);
                let mut ok = budget >= 1 + 2 * k;
                for t in trans {
                    if !ok {
                        break;
                    }
                    let sub = self.successor(c, t).and_then(|next| self.best(&next, budget - 2 * k));
                    match sub {
                        Some((sub, s)) => {
                            total += s;
                            actions.push(Self::action(t, &sub));
                        }
                        None => ok = false,
                    }
                }
                (ok && total <= budget).then(|| (Branch { label: c.clone(), actions }, total))
            }
        };
        match found {
            Some((t, s)) => {
                let t = Rc::new(t);
                self.memo.insert(c.clone(), Memo::Found(t.clone(), s));
                Some((t, s))
            }
            None => {
                self.memo.insert(c.clone(), Memo::NoneWithin(budget));
                None
            }
        }
    }
}

/// A smallest derivation from the empty tape using positions below `2^n`
/// and at most `max_nodes` nodes.
pub fn search_derivation(m: &Atm, n: u32, max_nodes: usize) -> Option<DerivationTree> {
    let mut s = Search { m, width: 1u64 << n, memo: HashMap::new() };
    s.best(&Config::initial(m), max_nodes).map(|(t, _)| (*t).clone())
}

type Trees = Rc<Vec<(PseudoDerivationTree, usize)>>;

struct Enum<'a> {
    m: &'a Atm,
    width: u64,
    memo: HashMap<(String, u64, usize), Trees>,
}

impl Enum<'_> {
    fn subtrees(&mut self, q: &str, budget: usize) -> Vec<(PseudoDerivationTree, usize)> {
        let mut out = Vec::new();
        for j in 0..self.width {
            out.extend(self.trees(q, j, budget).iter().cloned());
        }
        out
    }

    fn trees(&mut self, q: &str, pos: u64, budget: usize) -> Trees {
        let key = (q.to_string(), pos, budget);
        if let Some(t) = self.memo.get(&key) {
            return t.clone();
        }
        let m = self.m;
        let label = Pos { state: q.to_string(), pos };
        let mut out = Vec::new();
        let act = |t: &Transition, child: PseudoDerivationTree| Action {
            read: t.read.clone(),
            write: t.write.clone(),
            mv: t.mv,
            child,
        };
        if budget >= 1 {
            match m.kind(q) {
                Kind::Exists => {
                    if budget >= 3 {
                        for t in m.delta.iter().filter(|t| t.from == q) {
                            for (sub, s) in self.subtrees(&t.to, budget - 2) {
                                out.push((Branch { label: label.clone(), actions: vec![act(t, sub)] }, s + 2));
                            }
                        }
                    }
                }
                Kind::Forall => {
                    if m.alphabet.iter().any(|a| m.count(q, a) == 0) {
                        out.push((Branch::leaf(label.clone()), 1));
                    }
                    for a in &m.alphabet {
                        let trans: Vec<&Transition> = m.transitions(q, a).collect();
                        let k = trans.len();
                        if k == 0 || budget < 1 + 2 * k {
                            continue;
                        }
                        let opts: Vec<Vec<(PseudoDerivationTree, usize)>> =
                            trans.iter().map(|t| self.subtrees(&t.to, budget - 2 * k)).collect();
                        let mut partial: Vec<(Vec<Action<Pos>>, usize)> = vec![(Vec::new(), 1 + k)];
                        for (t, o) in trans.iter().zip(&opts) {
                            let mut next = Vec::new();
                            for (acts, s) in &partial {
                                for (sub, s2) in o {
                                    if s + s2 <= budget {
                                        let mut acts = acts.clone();
                                        acts.push(act(t, sub.clone()));
                                        next.push((acts, s + s2));
                                    }
                                }
                            }
                            partial = next;
                        }
                        out.extend(partial.into_iter().map(|(actions, s)| (Branch { label: label.clone(), actions }, s)));
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }
}

/// Every pseudo-derivation with positions below `2^n` and at most
/// `max_nodes` nodes.
pub fn enumerate_pseudo_derivations(m: &Atm, n: u32, max_nodes: usize) -> Vec<PseudoDerivationTree> {
    let mut e = Enum { m, width: 1u64 << n, memo: HashMap::new() };
    let q0 = m.initial.clone();
    e.trees(&q0, 0, max_nodes).iter().map(|(t, _)| t.clone()).collect()
}
