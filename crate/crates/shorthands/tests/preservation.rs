use std::collections::BTreeSet;

use shorthands::{expand_all, expand_disequality, parse_extended, thread_globals, wide_semantics, GlobalEnv};
use sl_core::{Heap, Loc, Sid, Structure, Term};
use unfolding::{canonical_model, Budget, Enumerator, Program};

type Model = (Vec<Loc>, Heap);

fn models(sid: &Sid, pred: &str, args: &[Term], max: usize) -> Vec<Structure> {
    let prog = Program::new(sid);
    let mut en = Enumerator::new(&prog, &Budget::all()).unwrap();
    let id = prog.id(pred).unwrap();
    en.up_to(id, max)
        .iter()
        .filter_map(|s| canonical_model(&prog, args, s))
        .map(|m| m.structure)
        .collect()
}

fn roots(st: &Structure, args: &[Term]) -> Vec<Loc> {
    args.iter().map(|t| st.eval(t).unwrap()).collect()
}

/// Stores every wide cell as a chain of two-field cells.
fn narrow(st: &Structure) -> Structure {
    let mut next = st.fresh_loc().0;
    let mut heap = Heap::new();
    for (&l, cell) in &st.heap {
        let mut cur = l;
        let n = cell.len();
        match n {
            1 => {
                heap.insert(l, vec![cell[0], Loc::NIL]);
            }
            _ => {
                for &t in &cell[..n - 2] {
                    let nx = Loc(next);
                    next += 1;
                    heap.insert(cur, vec![t, nx]);
                    cur = nx;
                }
                heap.insert(cur, cell[n - 2..].to_vec());
            }
        }
    }
    Structure::new(st.store.clone(), heap)
}

fn check(src: &str, pred: &str, env: &GlobalEnv, max: usize) -> usize {
    let rs = expand_disequality(&parse_extended(src).unwrap()).unwrap();
    let core = expand_all(&rs, env).unwrap();
    let wide = thread_globals(&wide_semantics(&rs, env).unwrap(), env).unwrap();
    let mut args = vec![Term::var("x")];
    args.extend(env.terms());

    let relabel = |st: &Structure| -> Model { st.canonical_relabel(&roots(st, &args)).unwrap() };
    let got: BTreeSet<Model> = models(&core, pred, &args, max).iter().map(relabel).collect();
    let want: BTreeSet<Model> = models(&wide, pred, &args, max)
        .iter()
        .map(narrow)
        .filter(|st| st.heap.len() <= max)
        .map(|st| relabel(&st))
        .collect();
    assert_eq!(got, want, "{}", src);
    assert!(pce::check_all(&core, 6).ok(), "{}", core);
    got.len()
}

#[test]
fn wide_trees_with_choices() {
    let src = "t(x) <= \\E l r . x -> (@,l,r) * t(l) * t(r)\nt(x) <= x -> (nil,nil,@)";
    assert_eq!(check(src, "t", &GlobalEnv::bits(), 9), 2 + 2 * 2 * 2);
}

#[test]
fn binary_variables_and_hats() {
    let src = "c(x) <= \\Eb b1 b2 . \\E y . x -> [y]^3 * d(y,b1,~b2)\n\
               d(x,u,v) <= x -> (u,v,@)\n\
               d(x,u,v) <= \\E y . x -> (v,y) * d(y,v,u)";
    assert!(check(src, "c", &GlobalEnv::bits(), 9) >= 8);
}

#[test]
fn side_conditions_then_tuples() {
    let env = GlobalEnv::new(vec!["zero".into(), "one".into(), "g0".into()]);
    let src = "s(x) <= \\E y . x -> (nil,y) * f(y,zero,one)\n\
               f(x,c1,c2) <= \\E e1 e2 y . x -> (e1,e2,g0,y) * s(y) | (e1,e2) != ~(c1,c2)\n\
               f(x,c1,c2) <= x -> (c2,c1,g0)";
    assert!(check(src, "s", &env, 12) > 3);
}

#[test]
fn unit_and_pair_tuples() {
    let src = "u(x) <= x -> (@)\nu(x) <= \\E y . x -> (@,y) * u(y)";
    assert_eq!(check(src, "u", &GlobalEnv::bits(), 4), 2 + 4 + 8 + 16);
}
