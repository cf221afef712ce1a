use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sl_core::{parse_formula, satisfies, Atom, Heap, Loc, Structure, SymbolicHeap, Term};

const FREE: [&str; 2] = ["x", "y"];
const BOUND: [&str; 2] = ["u", "v"];

fn loc() -> impl Strategy<Value = Loc> {
    prop_oneof![1 => Just(Loc::NIL), 4 => (0i64..5).prop_map(Loc)]
}

fn structure() -> impl Strategy<Value = Structure> {
    (
        (0i64..5, 0i64..5),
        proptest::collection::btree_map(0i64..5, (loc(), loc()), 0..=5),
    )
        .prop_map(|((x, y), cells)| {
            let store = [("x".to_string(), Loc(x)), ("y".to_string(), Loc(y))].into_iter().collect();
            let heap: Heap = cells.into_iter().map(|(k, (a, b))| (Loc(k), vec![a, b])).collect();
            Structure::new(store, heap)
        })
}

fn term(nbound: usize) -> impl Strategy<Value = Term> {
    let mut names: Vec<&'static str> = FREE.to_vec();
    names.extend(&BOUND[..nbound]);
    prop_oneof![
        1 => Just(Term::Nil),
        5 => proptest::sample::select(names).prop_map(Term::var),
    ]
}

fn atom(nbound: usize) -> impl Strategy<Value = Atom> {
    prop_oneof![
        4 => (term(nbound), term(nbound), term(nbound))
            .prop_map(|(s, a, b)| Atom::points_to(s, vec![a, b])),
        1 => (term(nbound), term(nbound)).prop_map(|(a, b)| Atom::Eq(a, b)),
        1 => (term(nbound), term(nbound)).prop_map(|(a, b)| Atom::Diseq(a, b)),
    ]
}

fn formula() -> impl Strategy<Value = SymbolicHeap> {
    (0usize..=2).prop_flat_map(|nb| {
        proptest::collection::vec(atom(nb), 0..=4).prop_map(move |atoms| {
            SymbolicHeap::new(BOUND[..nb].iter().map(|s| s.to_string()).collect(), atoms)
        })
    })
}

fn sat(st: &Structure, f: &SymbolicHeap) -> bool {
    satisfies(st, f, &BTreeSet::new()).unwrap()
}

/// Splits the heap every possible way among the atoms and tries every
/// witness assignment over the mentioned locations plus enough unused ones.
fn naive(st: &Structure, f: &SymbolicHeap) -> bool {
    let mut domain: BTreeSet<Loc> = st.locations();
    domain.insert(Loc::NIL);
    for k in 0..f.bound.len() as i64 {
        domain.insert(Loc(100 + k));
    }
    let domain: Vec<Loc> = domain.into_iter().collect();
    let cells: Vec<(Loc, Vec<Loc>)> = st.heap.iter().map(|(k, v)| (*k, v.clone())).collect();
    let nb = f.bound.len();
    let total = domain.len().pow(nb as u32);
    for code in 0..total {
        let mut env: BTreeMap<String, Loc> = st.store.clone();
        let mut c = code;
        for b in &f.bound {
            env.insert(b.clone(), domain[c % domain.len()]);
            c /= domain.len();
        }
        let val = |t: &Term| match t {
            Term::Nil => Loc::NIL,
            Term::Var(v) => env[v],
        };
        let n = f.atoms.len();
        if n == 0 {
            if cells.is_empty() {
                return true;
            }
            continue;
        }
        let splits = n.pow(cells.len() as u32);
        'split: for s in 0..splits {
            let mut owner = Vec::new();
            let mut x = s;
            for _ in 0..cells.len() {
                owner.push(x % n);
                x /= n;
            }
            for (i, a) in f.atoms.iter().enumerate() {
                let mine: Vec<&(Loc, Vec<Loc>)> =
                    cells.iter().zip(&owner).filter(|(_, o)| **o == i).map(|(c, _)| c).collect();
                let ok = match a {
                    Atom::Eq(p, q) => mine.is_empty() && val(p) == val(q),
                    Atom::Diseq(p, q) => mine.is_empty() && val(p) != val(q),
                    Atom::PointsTo { src, dst } => {
                        mine.len() == 1
                            && mine[0].0 == val(src)
                            && mine[0].1 == dst.iter().map(&val).collect::<Vec<_>>()
                    }
                    Atom::Pred { .. } => unreachable!(),
                };
                if !ok {
                    continue 'split;
                }
            }
            return true;
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2500))]

    #[test]
    fn pure_atoms_need_empty_heap(st in structure(), a in term(0), b in term(0), eq in any::<bool>()) {
        let atom = if eq { Atom::Eq(a, b) } else { Atom::Diseq(a, b) };
        if sat(&st, &SymbolicHeap::from_atoms(vec![atom])) {
            prop_assert!(st.heap.is_empty());
        }
    }

    #[test]
    fn points_to_is_exact(st in structure(), s in term(0), a in term(0), b in term(0)) {
        if sat(&st, &SymbolicHeap::from_atoms(vec![Atom::points_to(s, vec![a, b])])) {
            prop_assert_eq!(st.heap.len(), 1);
        }
    }

    #[test]
    fn star_is_order_insensitive(st in structure(), f in formula(), seed in any::<u64>()) {
        let mut g = f.clone();
        let n = g.atoms.len();
        let mut r = seed;
        for i in (1..n).rev() {
            r = r.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            g.atoms.swap(i, (r >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(sat(&st, &f), sat(&st, &g));
    }

    #[test]
    fn agrees_with_naive_splits(st in structure(), f in formula()) {
        prop_assert_eq!(sat(&st, &f), naive(&st, &f));
    }

    #[test]
    fn print_parse_round_trip(f in formula()) {
        let text = f.to_string();
        let g = parse_formula(&text).unwrap();
        prop_assert_eq!(g.to_string(), text);
        prop_assert_eq!(g.canonical(), f.canonical());
    }
}
