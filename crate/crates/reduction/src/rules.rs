use shorthands::{EAtom, ETerm, ExtendedRule};

use crate::naming::{Naming, ACT_R, CELL, CM, CONST, PM, PM_ROOT, R};
use crate::{ReductionParams, Variant};

fn v(s: &str) -> ETerm {
    ETerm::var(s)
}

fn vs(xs: &[String]) -> Vec<ETerm> {
    xs.iter().map(|x| v(x)).collect()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{}{}", prefix, k)).collect()
}

fn s(x: &str) -> String {
    x.to_string()
}

fn rule(head: &str, params: Vec<String>, exists: Vec<String>, atoms: Vec<EAtom>) -> ExtendedRule {
    ExtendedRule::new(head, params, exists, atoms)
}

fn cat<T: Clone>(parts: &[&[T]]) -> Vec<T> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

struct Ctx<'a> {
    p: &'a ReductionParams,
    nm: &'a Naming,
    n: usize,
    b: usize,
}

impl Ctx<'_> {
    fn choices(&self) -> Vec<ETerm> {
        vec![ETerm::Choice; self.n]
    }

    fn bits(&self, bs: &[bool]) -> Vec<ETerm> {
        bs.iter().map(|&b| v(self.nm.bit(b))).collect()
    }

    fn g(&self, a: &str) -> ETerm {
        v(self.nm.sym(a))
    }

    fn writable(&self) -> Vec<String> {
        let m = &self.p.machine;
        m.alphabet.iter().filter(|a| **a != m.blank).cloned().collect()
    }

    fn bvec(&self) -> (Vec<String>, Vec<String>) {
        (names("b", self.n), names("c", self.n))
    }

    /// Branching cell with position fields `pos`, `m` children of which
    /// the `i`-th (0-based) is handed to `tracked`, the rest to act_r.
    fn branch(
        &self,
        head: &str,
        params: Vec<String>,
        pos: Vec<ETerm>,
        m: usize,
        i: usize,
        tracked: EAtom,
        extra_exists: Vec<String>,
    ) -> ExtendedRule {
        let ys = names("y", m);
        let mut atoms = vec![EAtom::pts("x", 0, cat(&[&pos, &vs(&ys)]))];
        for (j, y) in ys.iter().enumerate() {
            if j == i {
                let mut t = tracked.clone();
                if let EAtom::Pred { args, .. } = &mut t {
                    args.insert(0, v(y));
                }
                atoms.push(t);
            } else {
                atoms.push(EAtom::call(ACT_R, vec![v(y)]));
            }
        }
        rule(head, params, cat(&[&ys, &extra_exists]), atoms)
    }

    /// `head(x, ..) <= \E y . x -> (s(a), s(b), mv, y) * next(y, ..)` for
    /// every read `a` and written `b`.
    fn actions(&self, head: &str, params: &[String], mv: ETerm, next: &str, next_args: &[ETerm]) -> Vec<ExtendedRule> {
        let mut out = Vec::new();
        for a in &self.p.machine.alphabet {
            for b in self.writable() {
                let atoms = vec![
                    EAtom::pts("x", 0, vec![self.g(a), self.g(&b), mv.clone(), v("y")]),
                    EAtom::call(next, cat(&[&[v("y")], next_args])),
                ];
                out.push(rule(head, cat(&[&[s("x")], params]), vec![s("y")], atoms));
            }
        }
        out
    }

    /// Root of a violation family: guesses the bit vector and complements.
    fn root(&self, head: &str, binary: usize, next: EAtom) -> ExtendedRule {
        let mut atoms = vec![EAtom::pts("x", self.n + 1, vec![v("y")])];
        atoms.push(next);
        let bs = names("b", binary);
        rule(head, vec![s("x")], vec![s("y")], atoms).with_binary(bs)
    }

    fn path_shapes(&self) -> Vec<(usize, usize)> {
        (1..=self.b).flat_map(|m| (0..m).map(move |i| (m, i))).collect()
    }
}

pub fn build_const_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let _ = p;
    let globals = nm.env().vars().to_vec();
    let mut atoms = vec![EAtom::pts("x", 0, vs(&globals))];
    atoms.extend(globals.iter().map(|g| EAtom::call(CELL, vec![v(g)])));
    vec![
        rule(CONST, vec![s("x")], vec![], atoms),
        rule(CELL, vec![s("x")], vec![], vec![EAtom::pts("x", 0, vec![ETerm::Nil, ETerm::Nil])]),
    ]
}

pub fn build_pseudo_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let m = &p.machine;
    let mut out = Vec::new();
    let mut heads: Vec<(String, String, Vec<ETerm>)> =
        m.states.iter().map(|q| (q.clone(), q.clone(), c.choices())).collect();
    if let Some(init) = &nm.init {
        heads.push((init.clone(), m.initial.clone(), c.bits(&vec![false; c.n])));
    }
    for (head, q, pos) in &heads {
        for a in &m.alphabet {
            let ts: Vec<_> = m.transitions(q, a).collect();
            match m.kind(q) {
                atm::Kind::Exists => {
                    for t in ts {
                        let call = EAtom::call(
                            Naming::act(&t.to),
                            vec![v("x'"), c.g(a), c.g(&t.write), v(nm.mv(t.mv))],
                        );
                        out.push(rule(
                            head,
                            vec![s("x")],
                            vec![s("x'")],
                            vec![EAtom::pts("x", 0, cat(&[pos, &[v("x'")]])), call],
                        ));
                    }
                }
                atm::Kind::Forall => {
                    let ys = names("y", ts.len());
                    let mut atoms = vec![EAtom::pts("x", 0, cat(&[pos, &vs(&ys)]))];
                    for (y, t) in ys.iter().zip(&ts) {
                        atoms.push(EAtom::call(Naming::act(&t.to), vec![v(y), c.g(a), c.g(&t.write), v(nm.mv(t.mv))]));
                    }
                    out.push(rule(head, vec![s("x")], ys, atoms));
                }
            }
        }
    }
    for q in &m.states {
        out.push(rule(
            &Naming::act(q),
            vec![s("x"), s("s"), s("w"), s("u")],
            vec![s("x'")],
            vec![EAtom::pts("x", 0, vec![v("s"), v("w"), v("u"), v("x'")]), EAtom::call(q.clone(), vec![v("x'")])],
        ));
    }
    out.push(rule(
        PM,
        vec![s("x")],
        vec![s("y"), s("z")],
        vec![
            EAtom::pts("x", 0, vec![v("y"), v("z")]),
            EAtom::call(PM_ROOT, vec![v("y")]),
            EAtom::call(CONST, vec![v("z")]),
        ],
    ));
    out.push(rule(
        PM_ROOT,
        vec![s("y")],
        vec![s("z'")],
        vec![EAtom::pts("y", c.n + 1, vec![v("z'")]), EAtom::call(nm.root_pred(), vec![v("z'")])],
    ));
    out.extend(build_const_rules(p, nm));
    out
}

pub fn build_r_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let mut out = Vec::new();
    for k in 0..=c.b {
        let ys = names("y", k);
        let mut atoms = vec![EAtom::pts("x", 0, cat(&[&c.choices(), &vs(&ys)]))];
        atoms.extend(ys.iter().map(|y| EAtom::call(ACT_R, vec![v(y)])));
        out.push(rule(R, vec![s("x")], ys, atoms));
    }
    out.extend(c.actions(ACT_R, &[], ETerm::Choice, R, &[]));
    out
}

pub fn build_c1_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let n = c.n;
    let (b, cc) = c.bvec();
    let mut out = Vec::new();
    for k in 0..n {
        let bk = names("b", k);
        let comp: Vec<ETerm> = bk.iter().map(|x| ETerm::Compl(x.clone())).collect();
        for right in [true, false] {
            // right: b = (b.., 0, 1..), c = (~b.., 0, 1..); left: b = (b.., 1, 0..), c = (~b.., 1, 0..)
            let tail = cat(&[&[!right], &vec![right; n - k - 1][..]]);
            let args = cat(&[&[v(nm.bit(right))], &vs(&bk), &c.bits(&tail), &comp, &c.bits(&tail)]);
            out.push(c.root("c1", k, EAtom::call("d1", cat(&[&[v("y")], &args]))));
        }
    }
    let params = cat(&[&[s("x"), s("u")], &b[..], &cc[..]]);
    let pv = vs(&params[1..]);
    for (m, i) in c.path_shapes() {
        out.push(c.branch("d1", params.clone(), c.choices(), m, i, EAtom::call("act_d1", pv.clone()), vec![]));
        out.push(c.branch("d1", params.clone(), vs(&b), m, i, EAtom::call("act_e1", pv.clone()), vec![]));
    }
    out.extend(c.actions("act_d1", &params[1..], ETerm::Choice, "d1", &pv));
    out.extend(c.actions("act_e1", &params[1..], v("u"), "f1", &vs(&cat(&[&b[..], &cc[..]]))));
    let es = names("e", n);
    for m in 0..=c.b {
        let ys = names("y", m);
        let mut atoms = vec![EAtom::pts("x", 0, cat(&[&vs(&es), &vs(&ys)]))];
        atoms.extend(ys.iter().map(|y| EAtom::call(ACT_R, vec![v(y)])));
        let f1 = rule("f1", cat(&[&[s("x")], &b[..], &cc[..]]), cat(&[&ys, &es]), atoms);
        out.push(f1.with_side(es.clone(), cc.clone()));
    }
    if p.variant == Variant::Repaired {
        for right in [false, true] {
            let args = cat(&[&[v("y"), v(nm.bit(right))], &c.bits(&vec![right; n][..])]);
            out.push(c.root("c1", 0, EAtom::call("d1x", args)));
        }
        let params = cat(&[&[s("x"), s("u")], &b[..]]);
        let pv = vs(&params[1..]);
        for (m, i) in c.path_shapes() {
            out.push(c.branch("d1x", params.clone(), c.choices(), m, i, EAtom::call("act_d1x", pv.clone()), vec![]));
            out.push(c.branch("d1x", params.clone(), vs(&b), m, i, EAtom::call("act_e1x", vec![v("u")]), vec![]));
        }
        out.extend(c.actions("act_d1x", &params[1..], ETerm::Choice, "d1x", &pv));
        out.extend(c.actions("act_e1x", &[s("u")], v("u"), R, &[]));
    }
    out
}

pub fn build_c2_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let n = c.n;
    let (b, cc) = c.bvec();
    let bc = cat(&[&b[..], &cc[..]]);
    let comp: Vec<ETerm> = b.iter().map(|x| ETerm::Compl(x.clone())).collect();
    let mut out = vec![c.root("c2", n, EAtom::call("d2", cat(&[&[v("y")], &vs(&b), &comp])))];
    let params = cat(&[&[s("x")], &bc[..]]);
    let gparams = cat(&[&[s("x"), s("gam")], &bc[..]]);
    let bcv = vs(&bc);
    let gbcv = vs(&gparams[1..]);
    for (m, i) in c.path_shapes() {
        out.push(c.branch("d2", params.clone(), c.choices(), m, i, EAtom::call("act_d2", bcv.clone()), vec![]));
    }
    out.extend(c.actions("act_d2", &bc, ETerm::Choice, "d2", &bcv));
    let guesses = |head: &str, next: &str| {
        let mut out = Vec::new();
        for a in &p.machine.alphabet {
            for w in c.writable() {
                for gam in p.machine.alphabet.iter().filter(|g| **g != w) {
                    let atoms = vec![
                        EAtom::pts("x", 0, vec![c.g(a), c.g(&w), ETerm::Choice, v("y")]),
                        EAtom::call(next, cat(&[&[v("y"), c.g(gam)], &bcv[..]])),
                    ];
                    out.push(rule(head, params.clone(), vec![s("y")], atoms));
                }
            }
        }
        out
    };
    match p.variant {
        Variant::Literal => {
            out.extend(guesses("act_d2", "e2"));
            for (m, i) in c.path_shapes() {
                out.push(c.branch("e2", gparams.clone(), vs(&b), m, i, EAtom::call("act_f2", gbcv.clone()), vec![]));
            }
        }
        Variant::Repaired => {
            for (m, i) in c.path_shapes() {
                out.push(c.branch("d2", params.clone(), vs(&b), m, i, EAtom::call("act_e2", bcv.clone()), vec![]));
            }
            out.extend(guesses("act_e2", "f2"));
            out.extend(guesses("act_e2", "g2"));
        }
    }
    out.extend(c.actions("act_f2", &gparams[1..], ETerm::Choice, "f2", &gbcv));
    out.extend(c.actions("act_f2", &gparams[1..], ETerm::Choice, "g2", &gbcv));
    let es = names("e", n);
    for (m, i) in c.path_shapes() {
        let r = c.branch("f2", gparams.clone(), vs(&es), m, i, EAtom::call("act_f2", gbcv.clone()), es.clone());
        out.push(r.with_side(es.clone(), cc.clone()));
    }
    for (m, i) in c.path_shapes() {
        out.push(c.branch("g2", gparams.clone(), vs(&b), m, i, EAtom::call("act_g2", vec![v("gam")]), vec![]));
    }
    for w in c.writable() {
        let atoms = vec![
            EAtom::pts("x", 0, vec![v("gam"), c.g(&w), ETerm::Choice, v("y")]),
            EAtom::call(R, vec![v("y")]),
        ];
        out.push(rule("act_g2", vec![s("x"), s("gam")], vec![s("y")], atoms));
    }
    out
}

pub fn build_c3_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let n = c.n;
    let (b, cc) = c.bvec();
    let bc = cat(&[&b[..], &cc[..]]);
    let bcv = vs(&bc);
    let comp: Vec<ETerm> = b.iter().map(|x| ETerm::Compl(x.clone())).collect();
    let root_args = cat(&[&[v("y")], &vs(&b), &comp]);
    let mut out = vec![c.root("c3", n, EAtom::call("d3", root_args.clone()))];
    if p.variant == Variant::Repaired {
        out.push(c.root("c3", n, EAtom::call("e3", root_args)));
    }
    let params = cat(&[&[s("x")], &bc[..]]);
    let es = names("e", n);
    for (m, i) in c.path_shapes() {
        let r = c.branch("d3", params.clone(), vs(&es), m, i, EAtom::call("act_d3", bcv.clone()), es.clone());
        out.push(r.with_side(es.clone(), cc.clone()));
    }
    out.extend(c.actions("act_d3", &bc, ETerm::Choice, "d3", &bcv));
    out.extend(c.actions("act_d3", &bc, ETerm::Choice, "e3", &bcv));
    for (m, i) in c.path_shapes() {
        out.push(c.branch("e3", params.clone(), vs(&b), m, i, EAtom::call("act_f3", vec![]), vec![]));
    }
    let w = c.writable();
    for a in &w {
        for bb in &w {
            let atoms = vec![
                EAtom::pts("x", 0, vec![c.g(a), c.g(bb), ETerm::Choice, v("y")]),
                EAtom::call(R, vec![v("y")]),
            ];
            out.push(rule("act_f3", vec![s("x")], vec![s("y")], atoms));
        }
    }
    out
}

/// Universal leaves whose actual symbol enables a transition.
pub fn build_c4_rules(p: &ReductionParams, nm: &Naming) -> Vec<ExtendedRule> {
    let c = Ctx { p, nm, n: p.n as usize, b: p.b };
    let m = &p.machine;
    let n = c.n;
    let (b, cc) = c.bvec();
    let bc = cat(&[&b[..], &cc[..]]);
    let bcv = vs(&bc);
    let idx = |a: &str| nm.index[a];
    let d = |q: &str| format!("d4_{}", q);
    let f = |q: &str, g: &str| format!("f4_{}_{}", q, idx(g));
    let l = |q: &str, g: &str| format!("l4_{}_{}", q, idx(g));
    let ad = |q: &str| format!("act_d4_{}", q);
    let af = |q: &str, g: &str| format!("act_f4_{}_{}", q, idx(g));
    let has_leaf = |q: &str, g: &str| {
        m.kind(q) == atm::Kind::Forall && m.alphabet.iter().any(|a| m.count(q, a) == 0) && m.count(q, g) > 0
    };
    let comp: Vec<ETerm> = b.iter().map(|x| ETerm::Compl(x.clone())).collect();
    let root_args = cat(&[&[v("y")], &vs(&b), &comp]);
    let q0 = &m.initial;
    let mut out = vec![
        c.root("c4", n, EAtom::call(d(q0), root_args.clone())),
        c.root("c4", n, EAtom::call(f(q0, &m.blank), root_args.clone())),
    ];
    if has_leaf(q0, &m.blank) {
        out.push(c.root("c4", n, EAtom::call(l(q0, &m.blank), root_args)));
    }
    let params = cat(&[&[s("x")], &bc[..]]);
    let es = names("e", n);
    // the children a node in state q can have, each with its tracked index
    fn shapes<'m>(m: &'m atm::Atm, q: &'m str) -> Vec<(Vec<&'m atm::Transition>, usize)> {
        let mut out = Vec::new();
        match m.kind(q) {
            atm::Kind::Exists => {
                for t in m.delta.iter().filter(|t| t.from == q) {
                    out.push((vec![t], 0));
                }
            }
            atm::Kind::Forall => {
                for a in &m.alphabet {
                    let ts: Vec<_> = m.transitions(q, a).collect();
                    for i in 0..ts.len() {
                        out.push((ts.clone(), i));
                    }
                }
            }
        }
        out
    }
    let act_args = |t: &atm::Transition| cat(&[&[c.g(&t.read), c.g(&t.write), v(nm.mv(t.mv))], &bcv[..]]);
    for q in &m.states {
        for (ts, i) in shapes(m, q) {
            let t = ts[i];
            let k = ts.len();
            out.push(c.branch(&d(q), params.clone(), c.choices(), k, i, EAtom::call(ad(&t.to), act_args(t)), vec![]));
            out.push(c.branch(&d(q), params.clone(), vs(&b), k, i, EAtom::call(af(&t.to, &t.write), act_args(t)), vec![]));
            for g in &m.alphabet {
                let r = c.branch(&f(q, g), params.clone(), vs(&es), k, i, EAtom::call(af(&t.to, g), act_args(t)), es.clone());
                out.push(r.with_side(es.clone(), cc.clone()));
            }
        }
        for g in &m.alphabet {
            if has_leaf(q, g) {
                out.push(rule(&l(q, g), params.clone(), vec![], vec![EAtom::pts("x", 0, vs(&b))]));
            }
        }
    }
    let aparams = cat(&[&[s("x"), s("s"), s("w"), s("u")], &bc[..]]);
    let cell = EAtom::pts("x", 0, vec![v("s"), v("w"), v("u"), v("y")]);
    for q in &m.states {
        out.push(rule(&ad(q), aparams.clone(), vec![s("y")], vec![cell.clone(), EAtom::call(d(q), cat(&[&[v("y")], &bcv[..]]))]));
        for g in &m.alphabet {
            let head = af(q, g);
            out.push(rule(&head, aparams.clone(), vec![s("y")], vec![cell.clone(), EAtom::call(f(q, g), cat(&[&[v("y")], &bcv[..]]))]));
            if has_leaf(q, g) {
                out.push(rule(&head, aparams.clone(), vec![s("y")], vec![cell.clone(), EAtom::call(l(q, g), cat(&[&[v("y")], &bcv[..]]))]));
            }
        }
    }
    out
}

pub fn build_cm(p: &ReductionParams) -> Vec<ExtendedRule> {
    let cs: &[&str] = match p.variant {
        Variant::Literal => &["c1", "c2", "c3"],
        Variant::Repaired => &["c1", "c2", "c3", "c4"],
    };
    cs.iter()
        .map(|ci| {
            rule(
                CM,
                vec![s("x")],
                vec![s("y"), s("z")],
                vec![
                    EAtom::pts("x", 0, vec![v("y"), v("z")]),
                    EAtom::call(*ci, vec![v("y")]),
                    EAtom::call(CONST, vec![v("z")]),
                ],
            )
        })
        .collect()
}
