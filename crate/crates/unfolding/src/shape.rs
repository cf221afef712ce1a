//! Rule-choice skeletons of unfolding trees and their bounded enumeration.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::program::Program;

/// One rule choice per node; `children[i]` unfolds the i-th predicate atom
/// of the rule body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub rule: usize,
    pub children: Vec<Arc<Shape>>,
    pub size: usize,
}

impl Shape {
    pub fn new(rule: usize, children: Vec<Arc<Shape>>) -> Shape {
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        Shape { rule, children, size }
    }

    /// Rules of all nodes in preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size);
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            out.push(s.rule);
            stack.extend(s.children.iter().rev().map(|c| c.as_ref()));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicates {0:?} can call each other without being counted")]
    ZeroWeightCycle(Vec<String>),
}

/// Which nodes count towards the bound. By default every node counts.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub counted: Option<BTreeSet<String>>,
}

impl Budget {
    pub fn all() -> Budget {
        Budget { counted: None }
    }

    pub fn only(preds: impl IntoIterator<Item = String>) -> Budget {
        Budget { counted: Some(preds.into_iter().collect()) }
    }
}

pub struct Enumerator<'a> {
    prog: &'a Program,
    weight: Vec<usize>,
    memo: HashMap<(u32, usize), Arc<Vec<Arc<Shape>>>>,
}

impl<'a> Enumerator<'a> {
    pub fn new(prog: &'a Program, budget: &Budget) -> Result<Enumerator<'a>, EnumError> {
        let weight: Vec<usize> = prog
            .names
            .iter()
            .map(|n| match &budget.counted {
                None => 1,
                Some(s) => s.contains(n) as usize,
            })
            .collect();
        check_free_cycles(prog, &weight)?;
        Ok(Enumerator { prog, weight, memo: HashMap::new() })
    }

    pub fn weight_of(&self, s: &Shape) -> usize {
        let head = self.prog.rules[s.rule].head as usize;
        self.weight[head] + s.children.iter().map(|c| self.weight_of(c)).sum::<usize>()
    }

    /// All shapes rooted at `pred` of weight exactly `w`, in rule order and
    /// then in lexicographic order of child weights and child shapes.
    pub fn exact(&mut self, pred: u32, w: usize) -> Arc<Vec<Arc<Shape>>> {
        if let Some(v) = self.memo.get(&(pred, w)) {
            return v.clone();
        }
        let own = self.weight[pred as usize];
        let mut out = Vec::new();
        if w >= own {
            let rem = w - own;
            for &ri in &self.prog.by_pred[pred as usize].clone() {
                let calls: Vec<u32> = self.prog.rules[ri].calls.iter().map(|c| c.0).collect();
                if calls.is_empty() {
                    if rem == 0 {
                        out.push(Arc::new(Shape::new(ri, Vec::new())));
                    }
                    continue;
                }
                for split in compositions(rem, calls.len()) {
                    let lists: Vec<Arc<Vec<Arc<Shape>>>> =
                        calls.iter().zip(&split).map(|(&q, &k)| self.exact(q, k)).collect();
                    if lists.iter().any(|l| l.is_empty()) {
                        continue;
                    }
                    product(&lists, &mut |kids| out.push(Arc::new(Shape::new(ri, kids))));
                }
            }
        }
        let out = Arc::new(out);
        self.memo.insert((pred, w), out.clone());
        out
    }

    /// Shapes of weight at most `max`, by increasing weight.
    pub fn up_to(&mut self, pred: u32, max: usize) -> Vec<Arc<Shape>> {
        (0..=max).flat_map(|w| self.exact(pred, w).iter().cloned().collect::<Vec<_>>()).collect()
    }
}

fn check_free_cycles(prog: &Program, weight: &[usize]) -> Result<(), EnumError> {
    let n = prog.names.len();
    let mut succ = vec![BTreeSet::new(); n];
    for r in &prog.rules {
        if weight[r.head as usize] == 0 {
            for (q, _) in &r.calls {
                if weight[*q as usize] == 0 {
                    succ[r.head as usize].insert(*q as usize);
                }
            }
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    fn dfs(v: usize, succ: &[BTreeSet<usize>], state: &mut [u8], path: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[v] = 1;
        path.push(v);
        for &w in &succ[v] {
            if state[w] == 1 {
                let at = path.iter().position(|&p| p == w).unwrap();
                return Some(path[at..].to_vec());
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, succ, state, path) {
                    return Some(c);
                }
            }
        }
        path.pop();
        state[v] = 2;
        None
    }
    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = dfs(v, &succ, &mut state, &mut Vec::new()) {
                return Err(EnumError::ZeroWeightCycle(c.into_iter().map(|i| prog.names[i].clone()).collect()));
            }
        }
    }
    Ok(())
}

/// Ordered ways to write `n` as a sum of `k` non-negative parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            cur.push(n);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=n {
            cur.push(first);
            go(n - first, k - 1, cur, out);
            cur.pop();
        }
    }
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(n, k, &mut cur, &mut out);
    out
}

fn product(lists: &[Arc<Vec<Arc<Shape>>>], f: &mut impl FnMut(Vec<Arc<Shape>>)) {
    let mut idx = vec![0usize; lists.len()];
    loop {
        f(idx.iter().zip(lists).map(|(&i, l)| l[i].clone()).collect());
        let mut k = lists.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sl_core::parse_sid;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
        assert_eq!(compositions(2, 0).len(), 0);
    }

    #[test]
    fn binary_tree_sizes() {
        let sid = parse_sid(
            "p(x) <= x -> (nil,nil)\np(x) <= \\E y z . x -> (y,z) * p(y) * p(z)",
        )
        .unwrap();
        let prog = Program::new(&sid);
        let mut e = Enumerator::new(&prog, &Budget::all()).unwrap();
        let counts: Vec<usize> = (0..8).map(|n| e.exact(0, n).len()).collect();
        // Catalan numbers on odd sizes.
        assert_eq!(counts, vec![0, 1, 0, 1, 0, 2, 0, 5]);
    }

    #[test]
    fn uncounted_cycle_rejected() {
        let sid = parse_sid("p(x) <= \\E y . x -> (y,nil) * q(y)\nq(x) <= \\E y . x -> (y,nil) * p(y)").unwrap();
        let prog = Program::new(&sid);
        let r = Enumerator::new(&prog, &Budget::only(["r".to_string()]));
        assert!(matches!(r, Err(EnumError::ZeroWeightCycle(_))));
    }
}
