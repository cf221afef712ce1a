//! Well-formedness of SIDs: progress, connectivity and establishment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use sl_core::{Atom, Rule, Sid, Structure, Term};
use thiserror::Error;
use unfolding::{canonical_model, Budget, Enumerator, Program, Shape};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diag {
    pub rule: usize,
    pub msg: String,
}

impl fmt::Display for Diag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: {}", self.rule, self.msg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Established {
    Yes,
    No,
    UnknownWithinBound,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PceError {
    #[error("SID is not progressing")]
    NotProgressing,
}

fn points_to(r: &Rule) -> Vec<(&Term, &[Term])> {
    r.body
        .atoms
        .iter()
        .filter_map(|a| match a {
            Atom::PointsTo { src, dst } => Some((src, dst.as_slice())),
            _ => None,
        })
        .collect()
}

/// Every body is `\E z. x1 -> (y1,y2) * psi` with no points-to in psi.
pub fn check_progressing(sid: &Sid) -> (bool, Vec<Diag>) {
    let mut diags = Vec::new();
    for (i, r) in sid.rules.iter().enumerate() {
        let pts = points_to(r);
        let msg = match (pts.as_slice(), r.params.first()) {
            (_, None) => Some("head has no parameters".to_string()),
            ([], _) => Some("no points-to atom".to_string()),
            ([(src, dst)], Some(x1)) => {
                if src.as_var() != Some(x1) {
                    Some(format!("allocates {} instead of {}", src, x1))
                } else if dst.len() != 2 {
                    Some(format!("points-to has {} fields", dst.len()))
                } else {
                    None
                }
            }
            (many, _) => Some(format!("{} points-to atoms", many.len())),
        };
        if let Some(msg) = msg {
            diags.push(Diag { rule: i, msg });
        }
    }
    (diags.is_empty(), diags)
}

/// Every predicate atom is rooted at a target of the rule's points-to.
pub fn check_connected(sid: &Sid) -> Result<(bool, Vec<Diag>), PceError> {
    if !check_progressing(sid).0 {
        return Err(PceError::NotProgressing);
    }
    let mut diags = Vec::new();
    for (i, r) in sid.rules.iter().enumerate() {
        let targets: Vec<&Term> = points_to(r)[0].1.iter().collect();
        for (p, args) in r.body.pred_atoms() {
            match args.first() {
                Some(t) if targets.contains(&t) && *t != Term::Nil => {}
                first => diags.push(Diag {
                    rule: i,
                    msg: format!(
                        "{}(..) rooted at {} which is not a target",
                        p,
                        first.map(|t| t.to_string()).unwrap_or_else(|| "nothing".into())
                    ),
                }),
            }
        }
    }
    Ok((diags.is_empty(), diags))
}

/// Greatest set of (predicate, position) pairs such that every rule of the
/// predicate allocates that parameter, itself or through a pair of the set.
/// Sound by induction on the height of (finite) derivations.
pub fn allocating_positions(sid: &Sid) -> BTreeSet<(String, usize)> {
    let mut a: BTreeSet<(String, usize)> =
        sid.arities.iter().flat_map(|(p, &n)| (0..n).map(move |j| (p.clone(), j))).collect();
    loop {
        let drop: Vec<(String, usize)> = a
            .iter()
            .filter(|(p, j)| !sid.rules_of(p).all(|(_, r)| allocated_in(r, &r.params[*j], &a)))
            .cloned()
            .collect();
        if drop.is_empty() {
            return a;
        }
        for d in drop {
            a.remove(&d);
        }
    }
}

fn allocated_in(r: &Rule, v: &str, a: &BTreeSet<(String, usize)>) -> bool {
    r.body.atoms.iter().any(|at| match at {
        Atom::PointsTo { src, .. } => src.as_var() == Some(v),
        Atom::Pred { pred, args } => args
            .iter()
            .enumerate()
            .any(|(k, t)| t.as_var() == Some(v) && a.contains(&(pred.clone(), k))),
        _ => false,
    })
}

fn tier_a(sid: &Sid) -> Vec<Diag> {
    let a = allocating_positions(sid);
    let mut diags = Vec::new();
    for (i, r) in sid.rules.iter().enumerate() {
        for z in &r.body.bound {
            if !allocated_in(r, z, &a) {
                diags.push(Diag { rule: i, msg: format!("existential {} not shown to be allocated", z) });
            }
        }
    }
    diags
}

// Predicates with finitely many unfolding trees, and the size of the
// largest one.
fn max_tree_size(prog: &Program) -> Vec<Option<usize>> {
    let n = prog.names.len();
    // productive: has at least one finite tree
    let mut productive = vec![false; n];
    loop {
        let mut grew = false;
        for r in &prog.rules {
            if !productive[r.head as usize] && r.calls.iter().all(|(q, _)| productive[*q as usize]) {
                productive[r.head as usize] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut memo: Vec<Option<Option<usize>>> = vec![None; n];
    let mut on_stack = vec![false; n];
    fn go(
        p: usize,
        prog: &Program,
        productive: &[bool],
        memo: &mut Vec<Option<Option<usize>>>,
        on_stack: &mut Vec<bool>,
    ) -> Option<usize> {
        if let Some(m) = memo[p] {
            return m;
        }
        if on_stack[p] {
            return None;
        }
        on_stack[p] = true;
        let mut best = Some(0);
        for &ri in &prog.by_pred[p] {
            let r = &prog.rules[ri];
            if !r.calls.iter().all(|(q, _)| productive[*q as usize]) {
                continue;
            }
            let mut size = Some(1usize);
            for (q, _) in &r.calls {
                size = match (size, go(*q as usize, prog, productive, memo, on_stack)) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            best = match (best, size) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
        on_stack[p] = false;
        memo[p] = Some(best);
        best
    }
    (0..n).map(|p| go(p, prog, &productive, &mut memo, &mut on_stack)).collect()
}

fn tier_b(sid: &Sid, bound: usize) -> (Established, Vec<Diag>) {
    let prog = Program::new(sid);
    let maxes = max_tree_size(&prog);
    let mut e = match Enumerator::new(&prog, &Budget::all()) {
        Ok(e) => e,
        Err(err) => return (Established::UnknownWithinBound, vec![Diag { rule: 0, msg: err.to_string() }]),
    };
    let mut exhaustive = true;
    for (i, r) in sid.rules.iter().enumerate() {
        if r.body.bound.is_empty() {
            continue;
        }
        let c = &prog.rules[i];
        let finite: Option<usize> = c
            .calls
            .iter()
            .try_fold(1usize, |acc, (q, _)| maxes[*q as usize].map(|m| acc + m));
        let limit = match finite {
            Some(m) if m <= bound => m,
            _ => {
                exhaustive = false;
                bound
            }
        };
        let params: Vec<Term> = r.params.iter().map(|p| Term::var(p.clone())).collect();
        for total in 1..=limit {
            for kids in children_of_size(&mut e, &c.calls.iter().map(|x| x.0).collect::<Vec<_>>(), total - 1) {
                let shape = Shape::new(i, kids);
                let Some(m) = canonical_model(&prog, &params, &shape) else { continue };
                for (k, z) in r.body.bound.iter().enumerate() {
                    let l = m.root_env[r.params.len() + k];
                    if !m.structure.heap.contains_key(&l) {
                        return (
                            Established::No,
                            vec![Diag {
                                rule: i,
                                msg: format!("existential {} unallocated in {}", z, describe(&m.structure)),
                            }],
                        );
                    }
                }
            }
        }
    }
    if exhaustive {
        (Established::Yes, Vec::new())
    } else {
        (
            Established::UnknownWithinBound,
            vec![Diag { rule: 0, msg: format!("no counter-model with at most {} cells", bound) }],
        )
    }
}

fn children_of_size(e: &mut Enumerator, calls: &[u32], n: usize) -> Vec<Vec<Arc<Shape>>> {
    let mut out = Vec::new();
    for split in unfolding::shape::compositions(n, calls.len()) {
        let lists: Vec<_> = calls.iter().zip(&split).map(|(&q, &k)| e.exact(q, k)).collect();
        let mut acc: Vec<Vec<Arc<Shape>>> = vec![Vec::new()];
        for l in lists {
            acc = acc
                .into_iter()
                .flat_map(|pre| {
                    l.iter().map(move |s| {
                        let mut v = pre.clone();
                        v.push(s.clone());
                        v
                    })
                })
                .collect();
        }
        out.extend(acc);
    }
    out
}

fn describe(st: &Structure) -> String {
    let cells: Vec<String> = st
        .heap
        .iter()
        .map(|(k, v)| format!("{}->({})", k, v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("{{{}}}", cells.join(", "))
}

/// The syntactic check alone: every existential is allocated somewhere
/// below the rule that introduces it.
pub fn established_syntactically(sid: &Sid) -> (bool, Vec<Diag>) {
    let d = tier_a(sid);
    (d.is_empty(), d)
}

/// Syntactic check first; if it does not settle the question, bodies are
/// unfolded up to `bound` cells looking for an unallocated existential.
pub fn check_established(sid: &Sid, bound: usize) -> (Established, Vec<Diag>) {
    let diags = tier_a(sid);
    if diags.is_empty() {
        return (Established::Yes, Vec::new());
    }
    let (v, mut more) = tier_b(sid, bound);
    if v == Established::UnknownWithinBound {
        more.extend(diags);
    }
    (v, more)
}

#[derive(Clone, Debug, Serialize)]
pub struct PceReport {
    pub progressing: bool,
    pub connected: bool,
    pub established: Established,
    pub diagnostics: Vec<Diag>,
}

impl PceReport {
    pub fn ok(&self) -> bool {
        self.progressing && self.connected && self.established == Established::Yes
    }
}

impl fmt::Display for PceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "progressing: {}", self.progressing)?;
        writeln!(f, "connected: {}", self.connected)?;
        writeln!(f, "established: {:?}", self.established)?;
        for d in &self.diagnostics {
            writeln!(f, "  {}", d)?;
        }
        Ok(())
    }
}

pub fn check_all(sid: &Sid, bound: usize) -> PceReport {
    let (progressing, mut diagnostics) = check_progressing(sid);
    let connected = match check_connected(sid) {
        Ok((c, d)) => {
            diagnostics.extend(d);
            c
        }
        Err(_) => false,
    };
    let (established, d) = check_established(sid, bound);
    diagnostics.extend(d);
    PceReport { progressing, connected, established, diagnostics }
}

/// Per-predicate summary used in reports.
pub fn rule_counts(sid: &Sid) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in &sid.rules {
        *out.entry(r.head.clone()).or_insert(0) += 1;
    }
    out
}
