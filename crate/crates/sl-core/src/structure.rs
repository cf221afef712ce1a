use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loc(pub i64);

impl Loc {
    pub const NIL: Loc = Loc(-1);

    pub fn is_nil(self) -> bool {
        self == Loc::NIL
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            f.write_str("nil")
        } else {
            write!(f, "l{}", self.0)
        }
    }
}

pub type Heap = BTreeMap<Loc, Vec<Loc>>;
pub type Store = BTreeMap<String, Loc>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("heaps overlap at {locs:?}")]
pub struct OverlapError {
    pub locs: Vec<Loc>,
}

pub fn heap_disjoint_union(h1: &Heap, h2: &Heap) -> Result<Heap, OverlapError> {
    let clash: Vec<Loc> = h1.keys().filter(|l| h2.contains_key(l)).copied().collect();
    if !clash.is_empty() {
        return Err(OverlapError { locs: clash });
    }
    let mut out = h1.clone();
    out.extend(h2.iter().map(|(k, v)| (*k, v.clone())));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Structure {
    pub store: Store,
    pub heap: Heap,
}

impl Structure {
    pub fn new(store: Store, heap: Heap) -> Structure {
        Structure { store, heap }
    }

    pub fn eval(&self, t: &Term) -> Option<Loc> {
        match t {
            Term::Nil => Some(Loc::NIL),
            Term::Var(v) => self.store.get(v).copied(),
        }
    }

    /// Every location mentioned by the store or the heap.
    pub fn locations(&self) -> BTreeSet<Loc> {
        let mut out: BTreeSet<Loc> = self.store.values().copied().collect();
        for (k, v) in &self.heap {
            out.insert(*k);
            out.extend(v.iter().copied());
        }
        out.remove(&Loc::NIL);
        out
    }

    /// A location not mentioned anywhere.
    pub fn fresh_loc(&self) -> Loc {
        Loc(self.locations().iter().map(|l| l.0).max().unwrap_or(-1) + 1)
    }

    /// Reads an `n`-tuple through nested binary cells: a tuple of length
    /// n > 2 at `l` is a cell `(t1, l')` with the rest stored at `l'`, a
    /// 1-tuple is `(t1, nil)`. Returns the fields and the cells used.
    pub fn read_tuple(&self, l: Loc, n: usize) -> Option<(Vec<Loc>, Vec<Loc>)> {
        let mut fields = Vec::with_capacity(n);
        let mut cells = Vec::new();
        let mut cur = l;
        let mut left = n;
        loop {
            let cell = self.heap.get(&cur)?;
            if cell.len() != 2 {
                return None;
            }
            cells.push(cur);
            match left {
                0 => return None,
                1 => {
                    if !cell[1].is_nil() {
                        return None;
                    }
                    fields.push(cell[0]);
                    return Some((fields, cells));
                }
                2 => {
                    fields.extend_from_slice(cell);
                    return Some((fields, cells));
                }
                _ => {
                    fields.push(cell[0]);
                    cur = cell[1];
                    left -= 1;
                }
            }
        }
    }

    /// Renames locations in breadth-first order from `roots`, fields left
    /// to right. Two structures whose cells are all reachable from their
    /// roots are isomorphic iff the results agree. `None` when some cell
    /// is unreachable.
    pub fn canonical_relabel(&self, roots: &[Loc]) -> Option<(Vec<Loc>, Heap)> {
        let mut names: BTreeMap<Loc, Loc> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::new();
        let name = |l: Loc, names: &mut BTreeMap<Loc, Loc>, queue: &mut std::collections::VecDeque<Loc>| {
            if l.is_nil() {
                return l;
            }
            let n = names.len() as i64;
            *names.entry(l).or_insert_with(|| {
                queue.push_back(l);
                Loc(n)
            })
        };
        let rs: Vec<Loc> = roots.iter().map(|&l| name(l, &mut names, &mut queue)).collect();
        let mut heap = Heap::new();
        while let Some(l) = queue.pop_front() {
            if let Some(cell) = self.heap.get(&l) {
                let c: Vec<Loc> = cell.iter().map(|&t| name(t, &mut names, &mut queue)).collect();
                heap.insert(names[&l], c);
            }
        }
        (heap.len() == self.heap.len()).then_some((rs, heap))
    }

    pub fn to_json(&self) -> StructureJson {
        StructureJson {
            store: self.store.iter().map(|(k, v)| (k.clone(), v.0)).collect(),
            heap: self
                .heap
                .iter()
                .map(|(k, v)| (k.0.to_string(), v.iter().map(|l| l.0).collect()))
                .collect(),
        }
    }
}

/// Serialized form with `NIL` written as -1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub store: BTreeMap<String, i64>,
    pub heap: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Error)]
pub enum StructureJsonError {
    #[error("heap key {0:?} is not an integer")]
    BadKey(String),
    #[error("nil cannot be allocated")]
    NilAllocated,
}

impl StructureJson {
    pub fn into_structure(self) -> Result<Structure, StructureJsonError> {
        let mut heap = Heap::new();
        for (k, v) in self.heap {
            let l: i64 = k.trim().parse().map_err(|_| StructureJsonError::BadKey(k.clone()))?;
            if l == Loc::NIL.0 {
                return Err(StructureJsonError::NilAllocated);
            }
            heap.insert(Loc(l), v.into_iter().map(Loc).collect());
        }
        let store = self.store.into_iter().map(|(k, v)| (k, Loc(v))).collect();
        Ok(Structure { store, heap })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(l: i64) -> Heap {
        [(Loc(l), vec![Loc::NIL, Loc::NIL])].into_iter().collect()
    }

    #[test]
    fn union_with_empty() {
        let h = cell(3);
        assert_eq!(heap_disjoint_union(&Heap::new(), &h).unwrap(), h);
    }

    #[test]
    fn union_of_disjoint_cells() {
        assert_eq!(heap_disjoint_union(&cell(1), &cell(2)).unwrap().len(), 2);
    }

    #[test]
    fn union_clash() {
        let e = heap_disjoint_union(&cell(1), &cell(1)).unwrap_err();
        assert_eq!(e.locs, vec![Loc(1)]);
    }

    #[test]
    fn relabel_ignores_location_names() {
        let a: Heap = [(Loc(7), vec![Loc(3), Loc::NIL]), (Loc(3), vec![Loc(7), Loc(9)])].into_iter().collect();
        let b: Heap = [(Loc(0), vec![Loc(1), Loc::NIL]), (Loc(1), vec![Loc(0), Loc(2)])].into_iter().collect();
        let ra = Structure::new(Store::new(), a).canonical_relabel(&[Loc(7)]).unwrap();
        let rb = Structure::new(Store::new(), b.clone()).canonical_relabel(&[Loc(0)]).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(rb.1, b);
        let unreachable = Structure::new(Store::new(), cell(4)).canonical_relabel(&[]);
        assert!(unreachable.is_none());
    }

    #[test]
    fn lens_reads_chains() {
        let mut h = Heap::new();
        h.insert(Loc(0), vec![Loc(5), Loc(1)]);
        h.insert(Loc(1), vec![Loc(6), Loc(7)]);
        let st = Structure::new(Store::new(), h);
        let (f, cells) = st.read_tuple(Loc(0), 3).unwrap();
        assert_eq!(f, vec![Loc(5), Loc(6), Loc(7)]);
        assert_eq!(cells, vec![Loc(0), Loc(1)]);
        assert!(st.read_tuple(Loc(0), 4).is_none());
    }

    #[test]
    fn json_round_trip() {
        let mut st = Structure::default();
        st.store.insert("x".into(), Loc(0));
        st.heap.insert(Loc(0), vec![Loc::NIL, Loc(2)]);
        let text = serde_json::to_string(&st.to_json()).unwrap();
        assert_eq!(text, r#"{"store":{"x":0},"heap":{"0":[-1,2]}}"#);
        let back: StructureJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_structure().unwrap(), st);
    }
}
