use std::collections::{BTreeMap, BTreeSet, HashSet};

use sl_core::{fresh_name, Atom, Rule, Sid, SymbolicHeap, Term};

use crate::syntax::{EAtom, ETerm, ExtendedRule};
use crate::{GlobalEnv, ShorthandError};

/// Drops exact duplicates, keeping first occurrences.
pub fn dedup<T: ToString>(rs: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::new();
    rs.into_iter().filter(|r| seen.insert(r.to_string())).collect()
}

struct Namer {
    used: BTreeSet<String>,
}

impl Namer {
    fn new(rs: &[ExtendedRule]) -> Namer {
        Namer { used: rs.iter().flat_map(|r| r.preds().map(str::to_string).collect::<Vec<_>>()).collect() }
    }

    fn fresh(&mut self, base: &str, sep: char) -> String {
        let name = (1..).map(|k| format!("{}{}{}", base, sep, k)).find(|n| !self.used.contains(n)).unwrap();
        self.used.insert(name.clone());
        name
    }
}

fn subst_eterm(m: &BTreeMap<String, ETerm>) -> impl Fn(&ETerm) -> ETerm + '_ {
    move |t| match t {
        ETerm::Var(v) => m.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    }
}

/// Replaces each side condition `(e1..en) != ~(c1..cn)` by n rules; the
/// i-th sets ei to ci and leaves the others as choices.
pub fn expand_disequality(rs: &[ExtendedRule]) -> Result<Vec<ExtendedRule>, ShorthandError> {
    let mut out = Vec::new();
    for r in rs {
        let Some(side) = &r.side else {
            out.push(r.clone());
            continue;
        };
        let bad = |msg: &str| ShorthandError::MalformedSideCondition { rule: r.to_string(), msg: msg.to_string() };
        if side.lhs.is_empty() || side.lhs.len() != side.rhs.len() {
            return Err(bad("sides differ in length"));
        }
        if let Some(e) = side.lhs.iter().find(|e| !r.exists.contains(e)) {
            return Err(bad(&format!("`{}` is not existentially bound", e)));
        }
        if side.lhs.iter().collect::<BTreeSet<_>>().len() != side.lhs.len() {
            return Err(bad("repeated variable on the left"));
        }
        if let Some(c) = side.rhs.iter().find(|c| !r.params.contains(c)) {
            return Err(bad(&format!("`{}` is not a parameter", c)));
        }
        for a in &r.atoms {
            let in_core = match a {
                EAtom::PointsTo { src, .. } => vec![src.clone()],
                EAtom::Eq(x, y) | EAtom::Diseq(x, y) => vec![x.clone(), y.clone()],
                EAtom::Pred { .. } => vec![],
            };
            for t in a.eterms() {
                if let ETerm::Compl(v) = &t {
                    if side.lhs.contains(v) {
                        return Err(bad(&format!("complement of `{}`", v)));
                    }
                }
            }
            if let Some(v) = in_core.iter().filter_map(|t| t.as_var()).find(|v| side.lhs.iter().any(|e| e == v)) {
                return Err(bad(&format!("`{}` used outside a tuple or call", v)));
            }
        }
        for i in 0..side.lhs.len() {
            let m: BTreeMap<String, ETerm> = side
                .lhs
                .iter()
                .enumerate()
                .map(|(j, e)| (e.clone(), if i == j { ETerm::var(&side.rhs[i]) } else { ETerm::Choice }))
                .collect();
            let f = subst_eterm(&m);
            let mut nr = r.clone();
            nr.side = None;
            nr.exists.retain(|e| !side.lhs.contains(e));
            nr.atoms = r.atoms.iter().map(|a| a.map(&f)).collect();
            out.push(nr);
        }
    }
    Ok(dedup(out))
}

fn single_cell(r: &ExtendedRule) -> Result<usize, ShorthandError> {
    let idx: Vec<usize> =
        r.atoms.iter().enumerate().filter(|(_, a)| matches!(a, EAtom::PointsTo { .. })).map(|(i, _)| i).collect();
    match idx[..] {
        [i] => Ok(i),
        _ => Err(ShorthandError::BadAllocation { rule: r.to_string() }),
    }
}

/// Removes binary quantifiers. The rule's cell `x -> [t..]^m` becomes
/// `x -> (nil, y)` with `y` handed to a carrier predicate, once with
/// `(b, ~b) = (zero, one)` and once swapped; the carrier keeps the rest of
/// the body with a hat one shorter.
pub fn expand_binary_vars(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<Vec<ExtendedRule>, ShorthandError> {
    let mut namer = Namer::new(rs);
    let mut out = Vec::new();
    let mut work: Vec<ExtendedRule> = rs.iter().rev().cloned().collect();
    while let Some(r) = work.pop() {
        if r.binary_exists.is_empty() {
            out.push(r);
            continue;
        }
        let ci = single_cell(&r)?;
        let EAtom::PointsTo { src, hat, fields } = &r.atoms[ci] else { unreachable!() };
        let nb = r.binary_exists.len();
        if *hat < nb || hat + fields.len() < nb + 2 {
            return Err(ShorthandError::HatTooShort {
                rule: r.to_string(),
                hat: *hat,
                binary: nb,
                width: fields.len(),
            });
        }
        let mut names = r.names();
        names.extend(env.vars().iter().cloned());
        let b = r.binary_exists[0].clone();
        let bc = fresh_name(&format!("{}~", b), &names);
        names.insert(bc.clone());
        let y = fresh_name("y", &names);
        let carrier = namer.fresh(&r.head, '\'');

        let f = |t: &ETerm| match t {
            ETerm::Compl(v) if *v == b => ETerm::var(&bc),
            _ => t.clone(),
        };
        let mut atoms: Vec<EAtom> = r.atoms.iter().map(|a| a.map(&f)).collect();
        atoms[ci] = EAtom::PointsTo { src: Term::var(&y), hat: hat - 1, fields: fields.iter().map(&f).collect() };
        let mut params = vec![y.clone()];
        params.extend(r.params.iter().cloned());
        params.push(b.clone());
        params.push(bc.clone());
        let mut bparams = r.binary_params.clone();
        bparams.push((b.clone(), bc.clone()));
        let c = ExtendedRule {
            head: carrier.clone(),
            params,
            binary_params: bparams,
            binary_exists: r.binary_exists[1..].to_vec(),
            exists: r.exists.clone(),
            atoms,
            side: r.side.clone(),
        };

        for swap in [false, true] {
            let mut args: Vec<ETerm> = vec![ETerm::var(&y)];
            args.extend(r.params.iter().map(ETerm::var));
            args.push(ETerm::var(env.bit(swap)));
            args.push(ETerm::var(env.bit(!swap)));
            let top = ExtendedRule {
                head: r.head.clone(),
                params: r.params.clone(),
                binary_params: r.binary_params.clone(),
                binary_exists: Vec::new(),
                exists: vec![y.clone()],
                atoms: vec![
                    EAtom::PointsTo { src: src.clone(), hat: 0, fields: vec![ETerm::Nil, ETerm::var(&y)] },
                    EAtom::call(carrier.clone(), args),
                ],
                side: None,
            };
            out.push(top);
        }
        work.push(c);
    }
    Ok(out)
}

fn check_tuple_ready(r: &ExtendedRule) -> Result<(), ShorthandError> {
    if r.side.is_some() {
        return Err(ShorthandError::PassOrder { rule: r.to_string(), msg: "side condition not expanded".into() });
    }
    if !r.binary_exists.is_empty() {
        return Err(ShorthandError::PassOrder { rule: r.to_string(), msg: "binary quantifier not expanded".into() });
    }
    for a in &r.atoms {
        for t in a.eterms() {
            if let ETerm::Compl(v) = t {
                return Err(ShorthandError::UnresolvedComplement { rule: r.to_string(), var: v });
            }
        }
    }
    Ok(())
}

/// Encodes every tuple wider than two as a chain of cells
/// `(t1, z1), (t2, z2), .., (t_{n-1}, t_n)`; each link is a fresh
/// predicate and each call goes with the link holding the field it starts
/// from.
pub fn expand_tuples(rs: &[ExtendedRule]) -> Result<Vec<ExtendedRule>, ShorthandError> {
    let mut namer = Namer::new(rs);
    let mut out = Vec::new();
    for r in rs {
        check_tuple_ready(r)?;
        let wide = r.points_to().any(|a| a.width().unwrap() > 2);
        if !wide {
            out.push(r.clone());
            continue;
        }
        let ci = single_cell(r)?;
        let EAtom::PointsTo { src, hat, fields } = &r.atoms[ci] else { unreachable!() };
        let full: Vec<ETerm> = std::iter::repeat(ETerm::Nil).take(*hat).chain(fields.iter().cloned()).collect();
        let n = full.len();
        let links = n - 1;
        let mut parts: Vec<Vec<EAtom>> = vec![Vec::new(); links];
        for (i, a) in r.atoms.iter().enumerate() {
            if i == ci {
                continue;
            }
            match a {
                EAtom::Pred { args, .. } => {
                    let root = args.first().and_then(|t| t.as_var());
                    let k = root.and_then(|v| full.iter().position(|t| t.as_var() == Some(v)));
                    let Some(k) = k else {
                        return Err(ShorthandError::OrphanSubformula { rule: r.to_string(), atom: a.to_string() });
                    };
                    parts[k.min(links - 1)].push(a.clone());
                }
                _ => parts[0].push(a.clone()),
            }
        }
        let mut names = r.names();
        let zs: Vec<String> = (1..links)
            .map(|j| {
                let z = fresh_name(&format!("z{}", j), &names);
                names.insert(z.clone());
                z
            })
            .collect();
        let heads: Vec<String> = (1..links).map(|_| namer.fresh(&r.head, '~')).collect();
        let call = |j: usize| {
            let mut args = vec![ETerm::var(&zs[j - 1])];
            args.extend(r.params.iter().chain(&r.exists).map(ETerm::var));
            EAtom::call(heads[j - 1].clone(), args)
        };
        for j in 0..links {
            let cell_src = if j == 0 { src.clone() } else { Term::var(&zs[j - 1]) };
            let next = if j + 1 < links { ETerm::var(&zs[j]) } else { full[n - 1].clone() };
            let mut atoms = vec![EAtom::PointsTo { src: cell_src, hat: 0, fields: vec![full[j].clone(), next] }];
            if j + 1 < links {
                atoms.push(call(j + 1));
            }
            atoms.extend(parts[j].iter().cloned());
            let nr = if j == 0 {
                let mut exists = r.exists.clone();
                if links > 1 {
                    exists.push(zs[0].clone());
                }
                ExtendedRule {
                    head: r.head.clone(),
                    params: r.params.clone(),
                    binary_params: r.binary_params.clone(),
                    binary_exists: Vec::new(),
                    exists,
                    atoms,
                    side: None,
                }
            } else {
                let mut params = vec![zs[j - 1].clone()];
                params.extend(r.params.iter().chain(&r.exists).cloned());
                ExtendedRule {
                    head: heads[j - 1].clone(),
                    params,
                    binary_params: Vec::new(),
                    binary_exists: Vec::new(),
                    exists: if j + 1 < links { vec![zs[j].clone()] } else { Vec::new() },
                    atoms,
                    side: None,
                }
            };
            out.push(nr);
        }
    }
    Ok(out)
}

fn to_term(t: &ETerm) -> Term {
    match t {
        ETerm::Var(v) => Term::var(v),
        ETerm::Nil => Term::Nil,
        other => panic!("{} survived expansion", other),
    }
}

fn to_core_atom(a: &EAtom, pad: bool) -> Atom {
    match a {
        EAtom::PointsTo { src, hat, fields } => {
            let mut dst: Vec<Term> = std::iter::repeat(Term::Nil).take(*hat).chain(fields.iter().map(to_term)).collect();
            if pad && dst.len() == 1 {
                dst.push(Term::Nil);
            }
            Atom::PointsTo { src: src.clone(), dst }
        }
        EAtom::Pred { pred, args } => Atom::Pred { pred: pred.clone(), args: args.iter().map(to_term).collect() },
        EAtom::Eq(x, y) => Atom::Eq(x.clone(), y.clone()),
        EAtom::Diseq(x, y) => Atom::Diseq(x.clone(), y.clone()),
    }
}

/// Every way to replace the choices of `r`, first choice varying slowest.
fn choice_instances(r: &ExtendedRule, env: &GlobalEnv) -> Vec<ExtendedRule> {
    let k: usize = r.atoms.iter().map(|a| a.eterms().iter().filter(|t| **t == ETerm::Choice).count()).sum();
    (0..1u64 << k)
        .map(|mask| {
            let mut p = 0;
            let mut nr = r.clone();
            for a in nr.atoms.iter_mut() {
                let ts: Vec<&mut ETerm> = match a {
                    EAtom::PointsTo { fields, .. } => fields.iter_mut().collect(),
                    EAtom::Pred { args, .. } => args.iter_mut().collect(),
                    _ => Vec::new(),
                };
                for t in ts {
                    if *t == ETerm::Choice {
                        *t = ETerm::var(env.bit(mask >> (k - 1 - p) & 1 == 1));
                        p += 1;
                    }
                }
            }
            nr
        })
        .collect()
}

/// Replaces every choice by the two bits. Tuples must already be at most
/// two wide; a 1-tuple is padded with nil.
pub fn expand_choices(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<Vec<Rule>, ShorthandError> {
    let mut out = Vec::new();
    for r in dedup(rs.to_vec()) {
        check_tuple_ready(&r)?;
        if let Some(w) = r.points_to().filter_map(|a| a.width()).find(|w| *w > 2) {
            return Err(ShorthandError::ChoiceBeforeTupleExpansion { rule: r.to_string(), width: w });
        }
        for inst in choice_instances(&r, env) {
            let atoms = inst.atoms.iter().map(|a| to_core_atom(a, true)).collect();
            out.push(Rule::new(inst.head, inst.params, SymbolicHeap::new(inst.exists, atoms)));
        }
    }
    Ok(dedup(out))
}

/// Expands choices directly inside wide tuples, skipping tuple encoding.
pub fn expand_choices_naive(rs: &[ExtendedRule], env: &GlobalEnv) -> Vec<ExtendedRule> {
    dedup(rs.iter().flat_map(|r| choice_instances(r, env)).collect())
}

/// Reference reading of extended rules as wide-tuple rules: binary
/// variables and choices range over both bits, hats become nil fields.
/// Side conditions must be expanded first.
pub fn wide_semantics(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<Vec<Rule>, ShorthandError> {
    let mut out = Vec::new();
    for r in rs {
        if r.side.is_some() {
            return Err(ShorthandError::PassOrder { rule: r.to_string(), msg: "side condition not expanded".into() });
        }
        let nb = r.binary_exists.len();
        for mask in 0..1u64 << nb {
            let m: BTreeMap<String, (ETerm, ETerm)> = r
                .binary_exists
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let bit = mask >> (nb - 1 - i) & 1 == 1;
                    (b.clone(), (ETerm::var(env.bit(bit)), ETerm::var(env.bit(!bit))))
                })
                .collect();
            let pairs: BTreeMap<&str, &str> = r.binary_params.iter().map(|(b, c)| (b.as_str(), c.as_str())).collect();
            let f = |t: &ETerm| match t {
                ETerm::Var(v) => m.get(v).map(|p| p.0.clone()).unwrap_or_else(|| t.clone()),
                ETerm::Compl(v) => match (m.get(v), pairs.get(v.as_str())) {
                    (Some(p), _) => p.1.clone(),
                    (None, Some(c)) => ETerm::var(*c),
                    _ => t.clone(),
                },
                _ => t.clone(),
            };
            let mut nr = r.clone();
            nr.binary_exists.clear();
            nr.atoms = r.atoms.iter().map(|a| a.map(&f)).collect();
            for inst in choice_instances(&nr, env) {
                let atoms = inst.atoms.iter().map(|a| to_core_atom(a, false)).collect();
                out.push(Rule::new(inst.head, inst.params, SymbolicHeap::new(inst.exists, atoms)));
            }
        }
    }
    Ok(dedup(out))
}

/// Appends the globals to every head and call.
pub fn thread_globals(rules: &[Rule], env: &GlobalEnv) -> Result<Sid, ShorthandError> {
    let g = env.terms();
    let mut out = Vec::with_capacity(rules.len());
    for r in rules {
        if let Some(v) = r.params.iter().chain(&r.body.bound).find(|v| env.contains(v)) {
            return Err(ShorthandError::GlobalCaptured { rule: r.to_string(), name: v.clone() });
        }
        let mut params = r.params.clone();
        params.extend(env.vars().iter().cloned());
        let atoms = r
            .body
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Pred { pred, args } => {
                    let mut args = args.clone();
                    args.extend(g.iter().cloned());
                    Atom::Pred { pred: pred.clone(), args }
                }
                _ => a.clone(),
            })
            .collect();
        out.push(Rule::new(r.head.clone(), params, SymbolicHeap::new(r.body.bound.clone(), atoms)));
    }
    Ok(Sid::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_extended;

    fn rules(src: &str) -> Vec<ExtendedRule> {
        parse_extended(src).unwrap()
    }

    #[test]
    fn four_choices_in_a_wide_tuple() {
        let env = GlobalEnv::bits();
        let rs = rules("p(x) <= x -> (@,@,@,@)");
        let t = expand_tuples(&rs).unwrap();
        assert_eq!(t.len(), 3);
        let core = expand_choices(&t, &env).unwrap();
        assert_eq!(core.len(), 8);
        assert_eq!(expand_choices_naive(&rs, &env).len(), 16);
    }

    #[test]
    fn choice_order_first_slowest() {
        let env = GlobalEnv::bits();
        let core = expand_choices(&rules("p(x) <= x -> (@,@)"), &env).unwrap();
        let shown: Vec<String> = core.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            shown,
            [
                "p(x) <= x -> (zero,zero)",
                "p(x) <= x -> (zero,one)",
                "p(x) <= x -> (one,zero)",
                "p(x) <= x -> (one,one)"
            ]
        );
    }

    #[test]
    fn wide_choice_is_rejected() {
        let err = expand_choices(&rules("p(x) <= x -> (@,@,@)"), &GlobalEnv::bits()).unwrap_err();
        assert!(matches!(err, ShorthandError::ChoiceBeforeTupleExpansion { width: 3, .. }));
    }

    #[test]
    fn side_condition_gives_one_rule_per_position() {
        let rs = rules("f(x,c1,c2,c3) <= \\E e1 e2 e3 y . x -> (e1,e2,e3,y) * r(y) | (e1,e2,e3) != ~(c1,c2,c3)");
        let d = expand_disequality(&rs).unwrap();
        let shown: Vec<String> = d.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            shown,
            [
                "f(x,c1,c2,c3) <= \\E y . x -> (c1,@,@,y) * r(y)",
                "f(x,c1,c2,c3) <= \\E y . x -> (@,c2,@,y) * r(y)",
                "f(x,c1,c2,c3) <= \\E y . x -> (@,@,c3,y) * r(y)",
            ]
        );
    }

    #[test]
    fn malformed_side_conditions() {
        for src in [
            "f(x,c) <= \\E e y . x -> (e,y) | (e,y) != ~(c)",
            "f(x,c) <= \\E e . x -> (e,nil) | (c) != ~(e)",
            "f(x,c) <= \\E e . x -> (e,nil) | (e) != ~(q)",
            "f(x,c) <= \\E e . e -> (c,nil) | (e) != ~(c)",
        ] {
            let err = expand_disequality(&rules(src)).unwrap_err();
            assert!(matches!(err, ShorthandError::MalformedSideCondition { .. }), "{}", src);
        }
    }

    #[test]
    fn binary_variable_carriers() {
        let env = GlobalEnv::bits();
        let rs = rules("c(x) <= \\Eb b1 b2 . \\E y . x -> [y]^3 * d(y,b1,~b2)");
        let out = expand_binary_vars(&rs, &env).unwrap();
        let shown: Vec<String> = out.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            shown,
            [
                "c(x) <= \\E y' . x -> (nil,y') * c'1(y',x,zero,one)",
                "c(x) <= \\E y' . x -> (nil,y') * c'1(y',x,one,zero)",
                "c'1(y',x,b1,b1~) <= \\E y'' . y' -> (nil,y'') * c'1'1(y'',y',x,b1,b1~,zero,one)",
                "c'1(y',x,b1,b1~) <= \\E y'' . y' -> (nil,y'') * c'1'1(y'',y',x,b1,b1~,one,zero)",
                "c'1'1(y'',y',x,b1,b1~,b2,b2~) <= \\E y . y'' -> [y]^1 * d(y,b1,b2~)",
            ]
        );
    }

    #[test]
    fn hat_too_short() {
        let env = GlobalEnv::bits();
        for src in ["c(x) <= \\Eb b1 b2 . \\E y . x -> [y]^1", "c(x) <= \\Eb b1 . \\E y . x -> [y]^1"] {
            let err = expand_binary_vars(&rules(src), &env).unwrap_err();
            assert!(matches!(err, ShorthandError::HatTooShort { .. }), "{}", src);
        }
        assert!(expand_binary_vars(&rules("c(x) <= \\Eb b1 . \\E y z . x -> [y,z]^1"), &env).is_ok());
    }

    #[test]
    fn calls_follow_their_field() {
        let rs = rules("p(x) <= \\E a b c . x -> (a,b,c) * q(c) * q(a) * a != b");
        let out = expand_tuples(&rs).unwrap();
        let shown: Vec<String> = out.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            shown,
            ["p(x) <= \\E a b c z1 . x -> (a,z1) * p~1(z1,x,a,b,c) * q(a) * a != b", "p~1(z1,x,a,b,c) <= z1 -> (b,c) * q(c)",]
        );
        let orphan = expand_tuples(&rules("p(x) <= \\E a b c . x -> (a,b,c) * q(x)")).unwrap_err();
        assert!(matches!(orphan, ShorthandError::OrphanSubformula { .. }));
    }

    #[test]
    fn unit_tuples_are_padded() {
        let core = expand_choices(&rules("p(x) <= x -> (@)"), &GlobalEnv::bits()).unwrap();
        assert_eq!(core[1].to_string(), "p(x) <= x -> (one,nil)");
    }

    #[test]
    fn globals_are_appended() {
        let env = GlobalEnv::new(vec!["zero".into(), "one".into(), "g0".into()]);
        let core = expand_choices(&rules("p(x) <= \\E y . x -> (@,y) * p(y)"), &env).unwrap();
        let sid = thread_globals(&core, &env).unwrap();
        assert_eq!(sid.rules[0].to_string(), "p(x,zero,one,g0) <= \\E y . x -> (zero,y) * p(y,zero,one,g0)");
        assert_eq!(sid.arity("p").unwrap(), 4);
    }
}
