use std::collections::BTreeSet;

use proptest::prelude::*;
use sl_core::{parse_formula, parse_sid, satisfies, Atom, Heap, Loc, Sid, Structure, SymbolicHeap, Term};
use unfolding::{
    canonical_model, decorate, embed, enumerate_unfolding_trees, models_sid, oracle_models_sid, Budget,
    Enumerator, Program, UnfoldingTree, Verdict,
};

const TREES: &str = "p(x) <= x -> (nil,nil)\np(x) <= \\E y z . x -> (y,z) * p(y) * p(z)";

fn corpus() -> Vec<(&'static str, Sid, &'static str, usize)> {
    let src: Vec<(&str, &str, &str, usize)> = vec![
        ("trees", TREES, "p", 1),
        ("lists", "ls(x,y) <= x -> (y,nil)\nls(x,y) <= \\E z . x -> (z,nil) * ls(z,y)", "ls", 2),
        ("dll", "d(x,b) <= x -> (nil,b)\nd(x,b) <= \\E n . x -> (n,b) * d(n,x)", "d", 2),
        ("guarded", "q(x) <= \\E y . x -> (y,nil) * y != nil * r(y)\nr(x) <= x -> (nil,nil)\nr(x) <= \\E y . x -> (y,y) * r(y)", "q", 1),
        ("parent", "t(x,b) <= x -> (nil,b)\nt(x,b) <= \\E l r . x -> (l,r) * t(l,x) * t(r,x)", "t", 2),
        ("skip", "s(x,y) <= x -> (y,y)\ns(x,y) <= \\E a b . x -> (a,b) * s(a,y) * s(b,y)", "s", 2),
    ];
    src.into_iter().map(|(n, s, p, k)| (n, parse_sid(s).unwrap(), p, k)).collect()
}

fn args(k: usize) -> Vec<Term> {
    ["x", "y", "z"][..k].iter().map(|v| Term::var(*v)).collect()
}

fn atom(p: &str, k: usize) -> SymbolicHeap {
    SymbolicHeap::from_atoms(vec![Atom::pred(p, args(k))])
}

#[test]
fn single_rule_single_tree() {
    let sid = parse_sid("p(x) <= x -> (nil,nil)").unwrap();
    let ts = enumerate_unfolding_trees(&sid, "p", &[Term::var("z")], 3).unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].characteristic_formula().to_string(), "z -> (nil,nil)");
}

#[test]
fn binary_trees_by_size() {
    let sid = parse_sid(TREES).unwrap();
    let ts = enumerate_unfolding_trees(&sid, "p", &[Term::var("y")], 3).unwrap();
    let sizes: Vec<usize> = ts.iter().map(|t| t.size()).collect();
    assert_eq!(sizes, vec![1, 3]);
}

#[test]
fn two_level_formula() {
    let sid = parse_sid(TREES).unwrap();
    let ts = enumerate_unfolding_trees(&sid, "p", &[Term::var("x")], 3).unwrap();
    let f = ts[1].characteristic_formula();
    assert_eq!(f.to_string(), "\\E y z . x -> (y,z) * y -> (nil,nil) * z -> (nil,nil)");
}

// Bound names erased, atoms sorted: equality up to permutation and renaming
// of quantified variables.
fn erase_bound(f: &SymbolicHeap) -> (usize, Vec<String>) {
    let m = f.bound.iter().map(|b| (b.clone(), Term::var("_"))).collect();
    let mut atoms: Vec<String> = f.atoms.iter().map(|a| a.subst(&m).to_string()).collect();
    atoms.sort();
    (f.bound.len(), atoms)
}

#[test]
fn formula_independent_of_child_bijection() {
    let sid = parse_sid(
        "p(x) <= \\E y . x -> (y,nil) * e(y) * e(y)\ne(x) <= x != nil\ne(x) <= \\E z . x = z",
    )
    .unwrap();
    let trees = enumerate_unfolding_trees(&sid, "p", &[Term::var("x")], 3).unwrap();
    assert_eq!(trees.len(), 4);
    for t in &trees {
        let mut swapped = t.clone();
        swapped.root.children.swap(0, 1);
        assert_eq!(erase_bound(&t.characteristic_formula()), erase_bound(&swapped.characteristic_formula()));
    }
}

#[test]
fn tree_size_equals_heap_size() {
    for (name, sid, p, k) in corpus() {
        let prog = Program::new(&sid);
        let mut e = Enumerator::new(&prog, &Budget::all()).unwrap();
        let id = prog.id(p).unwrap();
        for shape in e.up_to(id, 10) {
            let Some(m) = canonical_model(&prog, &args(k), &shape) else { continue };
            assert_eq!(m.structure.heap.len(), shape.size, "{}", name);
            let t = UnfoldingTree::from_shape(&sid, p, &args(k), &shape);
            let f = t.characteristic_formula();
            assert!(satisfies(&m.structure, &f, &BTreeSet::new()).unwrap(), "{}: {}", name, f);
            assert_eq!(models_sid(&m.structure, &sid, &atom(p, k), 10).unwrap(), Verdict::True, "{}", name);
        }
    }
}

#[test]
fn embeddings_follow_pointers() {
    for (name, sid, p, k) in corpus() {
        let prog = Program::new(&sid);
        let mut e = Enumerator::new(&prog, &Budget::all()).unwrap();
        for shape in e.up_to(prog.id(p).unwrap(), 7) {
            let Some(m) = canonical_model(&prog, &args(k), &shape) else { continue };
            let t = UnfoldingTree::from_shape(&sid, p, &args(k), &shape);
            let emb = embed(&t, &m.structure).unwrap();
            assert_eq!(emb.len(), t.size(), "{}", name);
            let image: BTreeSet<Loc> = emb.values().copied().collect();
            assert_eq!(image.len(), emb.len());
            for (addr, l) in &emb {
                if let Some((_, parent)) = addr.split_last() {
                    let pl = emb[&parent.to_vec()];
                    assert!(m.structure.heap[&pl].contains(l), "{}: edge {:?}", name, addr);
                }
            }
            // The canonical model's own node map is an embedding as well.
            let canon: std::collections::BTreeMap<_, _> = m.nodes.iter().cloned().collect();
            assert_eq!(canon.len(), emb.len());
        }
    }
}

#[test]
fn decoration_matches_tree_labels() {
    let sid = parse_sid("p(x) <= \\E y . x -> (y,nil) * q(y)\nq(x) <= x -> (nil,nil)\nq(x) <= \\E y . x -> (nil,y) * p(y)").unwrap();
    let prog = Program::new(&sid);
    let mut e = Enumerator::new(&prog, &Budget::all()).unwrap();
    for shape in e.up_to(prog.id("p").unwrap(), 9) {
        let m = canonical_model(&prog, &args(1), &shape).unwrap();
        let t = UnfoldingTree::from_shape(&sid, "p", &args(1), &shape);
        let d = decorate(&m.structure, &sid, "p", &args(1)).unwrap();
        for ((_, n), (_, l)) in t.nodes().iter().zip(&m.nodes) {
            assert_eq!(d[l], n.pred);
        }
    }
}

#[test]
fn empty_heap_is_not_a_tree() {
    let sid = parse_sid(TREES).unwrap();
    let st = Structure::new([("x".to_string(), Loc(0))].into_iter().collect(), Heap::new());
    assert_eq!(models_sid(&st, &sid, &atom("p", 1), 5).unwrap(), Verdict::FalseWithinBound);
}

#[test]
fn non_progressing_uses_oracle() {
    let sid = parse_sid("l(x,y) <= x = y\nl(x,y) <= \\E z . x -> (z,nil) * l(z,y)").unwrap();
    let st = Structure::new(
        [("x".to_string(), Loc(0)), ("y".to_string(), Loc(2))].into_iter().collect(),
        [(Loc(0), vec![Loc(1), Loc::NIL]), (Loc(1), vec![Loc(2), Loc::NIL])].into_iter().collect(),
    );
    let f = parse_formula("l(x,y)").unwrap();
    assert_eq!(models_sid(&st, &sid, &f, 4).unwrap(), Verdict::True);
    assert_eq!(models_sid(&st, &sid, &f, 2).unwrap(), Verdict::FalseWithinBound);
}

fn small_structure() -> impl Strategy<Value = Structure> {
    let l = prop_oneof![1 => Just(Loc::NIL), 3 => (0i64..4).prop_map(Loc)];
    (
        proptest::collection::vec(0i64..4, 2),
        proptest::collection::btree_map(0i64..4, (l.clone(), l), 0..=4),
    )
        .prop_map(|(vs, cells)| {
            Structure::new(
                [("x".to_string(), Loc(vs[0])), ("y".to_string(), Loc(vs[1]))].into_iter().collect(),
                cells.into_iter().map(|(k, (a, b))| (Loc(k), vec![a, b])).collect(),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn evaluator_agrees_with_oracle(st in small_structure(), which in 0usize..6) {
        let (name, sid, p, k) = corpus().swap_remove(which);
        let f = atom(p, k);
        let fast = models_sid(&st, &sid, &f, 6).unwrap();
        let slow = oracle_models_sid(&st, &sid, &f, 6).unwrap();
        prop_assert_eq!(fast, slow, "{} on {:?}", name, st);
    }
}
