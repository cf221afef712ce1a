use std::collections::BTreeMap;

use atm::*;

fn cfg(q: &str, w: &str, i: u64) -> Config {
    Config { state: q.into(), tape: Tape(w.chars().map(|c| c.to_string()).collect()), head: i }
}

fn act<L>(r: &str, w: &str, mv: Move, child: Branch<L>) -> Action<L> {
    Action { read: r.into(), write: w.into(), mv, child }
}

fn node<L>(label: L, actions: Vec<Action<L>>) -> Branch<L> {
    Branch { label, actions }
}

fn pos(q: &str, i: u64) -> Pos {
    Pos { state: q.into(), pos: i }
}

fn derivation() -> DerivationTree {
    node(
        cfg("q0", "", 0),
        vec![
            act("_", "a", Move::R, node(cfg("q1", "a", 1), vec![act("_", "a", Move::L, Branch::leaf(cfg("q0", "aa", 0)))])),
            act("_", "b", Move::R, Branch::leaf(cfg("q2", "b", 1))),
        ],
    )
}

fn wrong_pseudo() -> PseudoDerivationTree {
    node(
        pos("q0", 0),
        vec![
            act(
                "b",
                "b",
                Move::R,
                node(
                    pos("q1", 1),
                    vec![act("_", "a", Move::L, node(pos("q0", 0), vec![act("c", "c", Move::R, Branch::leaf(pos("q2", 1)))]))],
                ),
            ),
            act("b", "b", Move::R, Branch::leaf(pos("q2", 0))),
        ],
    )
}

fn machine(kind: Kind, delta: &[(&str, &str, &str, &str, Move)]) -> Atm {
    let s = |x: &str| x.to_string();
    let kinds: BTreeMap<String, Kind> = [(s("q0"), kind), (s("q1"), Kind::Forall)].into_iter().collect();
    let delta = delta
        .iter()
        .map(|(q, a, p, b, mv)| Transition { from: s(q), read: s(a), to: s(p), write: s(b), mv: *mv })
        .collect();
    Atm::new(vec![s("q0"), s("q1")], vec![s("a"), s("_")], s("_"), s("q0"), kinds, delta).unwrap()
}

#[test]
fn derivation_of_the_example() {
    let m = Atm::example();
    let d = derivation();
    assert_eq!(d.size(), 7);
    assert!(check_derivation(&m, &d));
    let mut bad = d.clone();
    bad.actions[0].child.actions[0].child.label = cfg("q0", "aa", 1);
    assert!(!check_derivation(&m, &bad));
}

#[test]
fn vacuous_universal_root() {
    let m = machine(Kind::Forall, &[("q0", "a", "q1", "a", Move::R)]);
    assert!(check_derivation(&m, &Branch::leaf(cfg("q0", "", 0))));
    let p = Branch::leaf(pos("q0", 0));
    assert!(check_pseudo_derivation(&m, &p, 1));
    assert_eq!(pseudo_to_derivation(&m, &p), Some(Branch::leaf(cfg("q0", "", 0))));
}

#[test]
fn pseudo_derivations_of_the_example() {
    let m = Atm::example();
    let p = wrong_pseudo();
    assert!(check_pseudo_derivation(&m, &p, 1));
    assert!(check_pseudo_derivation(&m, &project(&derivation()), 1));
    let mut rooted = p.clone();
    rooted.label = pos("q1", 0);
    assert!(!check_pseudo_derivation(&m, &rooted, 1));
    let mut far = p.clone();
    far.actions[1].child.label.pos = 2;
    assert!(!check_pseudo_derivation(&m, &far, 1));
    assert!(check_pseudo_derivation(&m, &far, 2));
}

#[test]
fn relabeling() {
    let m = Atm::example();
    assert_eq!(pseudo_to_derivation(&m, &project(&derivation())), Some(derivation()));
    assert_eq!(pseudo_to_derivation(&m, &wrong_pseudo()), None);
}

#[test]
fn three_violations() {
    let m = Atm::example();
    let p = wrong_pseudo();
    let vs = violations(&m, &p);
    let shown: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    assert_eq!(shown, ["III at [] actions [0] [1]", "II at [0,0,0,0] actions [0,0,0,0,0] written at [0]", "I at [1,0] actions [1]"]);
    assert!(vs.iter().all(|v| v.confirm(&m, &p)));
    assert!(violations(&m, &project(&derivation())).is_empty());
}

#[test]
fn non_blank_first_read() {
    let m = machine(Kind::Exists, &[("q0", "a", "q1", "a", Move::R)]);
    let p = node(pos("q0", 0), vec![act("a", "a", Move::R, Branch::leaf(pos("q1", 1)))]);
    assert!(check_pseudo_derivation(&m, &p, 1));
    let vs = violations(&m, &p);
    assert_eq!(vs.len(), 1);
    assert_eq!(vs[0].kind, ViolationKind::NonBlankInit);
    assert_eq!(vs[0].node, Vec::<u32>::new());
}

#[test]
fn universal_leaf_on_a_live_symbol() {
    let m = Atm::example();
    let p = Branch::leaf(pos("q0", 0));
    assert!(check_pseudo_derivation(&m, &p, 1));
    let vs = violations(&m, &p);
    assert_eq!(vs.len(), 1);
    assert_eq!(vs[0].kind, ViolationKind::LeafRead);
    assert!(vs[0].confirm(&m, &p));
    assert_eq!(pseudo_to_derivation(&m, &p), None);
}

#[test]
fn search_finds_the_example() {
    let m = Atm::example();
    assert_eq!(search_derivation(&m, 1, 7), Some(derivation()));
    assert_eq!(search_derivation(&m, 1, 6), None);
}

#[test]
fn search_without_derivations() {
    let m = machine(Kind::Exists, &[]);
    for k in 0..15 {
        assert_eq!(search_derivation(&m, 2, k), None);
    }
    let m = machine(Kind::Forall, &[("q0", "_", "q1", "a", Move::L)]);
    for k in 0..=9 {
        assert_eq!(search_derivation(&m, 2, k), None);
    }
}

#[test]
fn violations_decide_derivations_exhaustively() {
    let m = Atm::example();
    let all = enumerate_pseudo_derivations(&m, 1, 9);
    assert!(all.len() > 20, "{}", all.len());
    let mut yielding = 0;
    for p in &all {
        assert!(check_pseudo_derivation(&m, p, 1), "{}", p);
        let vs = violations(&m, p);
        assert!(vs.iter().all(|v| v.confirm(&m, p)));
        let d = pseudo_to_derivation(&m, p);
        assert_eq!(vs.is_empty(), d.is_some(), "{}\n{:?}", p, vs);
        if let Some(d) = d {
            yielding += 1;
            assert_eq!(project(&d), *p);
        }
    }
    assert!(yielding >= 1);
}

#[test]
fn json_forms() {
    let d = derivation();
    assert_eq!(DerivationTree::from_json(&d.to_json()).unwrap(), d);
    let p = wrong_pseudo();
    let j = p.to_json();
    assert!(j.contains("\"move\": \"R\""));
    assert_eq!(PseudoDerivationTree::from_json(&j).unwrap(), p);
}
