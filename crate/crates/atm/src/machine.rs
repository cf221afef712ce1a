use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

impl Move {
    /// `i^mu`, or `None` when moving left of 0.
    pub fn apply(self, i: u64) -> Option<u64> {
        match self {
            Move::L => i.checked_sub(1),
            Move::R => Some(i + 1),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Exists,
    Forall,
}

/// `(from, read, to, write, move)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: String,
    pub read: String,
    pub to: String,
    pub write: String,
    pub mv: Move,
}

impl Transition {
    fn sort_key(&self) -> (&str, &str, &str, Move) {
        (&self.read, &self.write, &self.to, self.mv)
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.from, self.read, self.to, self.write, self.mv)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AtmError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate state or symbol `{0}`")]
    Duplicate(String),
    #[error("state `{0}` has no kind")]
    MissingKind(String),
    #[error("transition {0} writes the blank")]
    WritesBlank(String),
    #[error("bad move `{0}`, expected L or R")]
    BadMove(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// File form. Transitions are `[from, read, to, write, move]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtmJson {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub blank: String,
    pub initial: String,
    pub kind: BTreeMap<String, Kind>,
    pub delta: Vec<[String; 5]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AtmJson", into = "AtmJson")]
pub struct Atm {
    pub states: Vec<String>,
    /// Includes the blank.
    pub alphabet: Vec<String>,
    pub blank: String,
    pub initial: String,
    pub kind: BTreeMap<String, Kind>,
    pub delta: Vec<Transition>,
}

impl TryFrom<AtmJson> for Atm {
    type Error = AtmError;

    fn try_from(j: AtmJson) -> Result<Atm, AtmError> {
        let mut delta = Vec::new();
        for [from, read, to, write, mv] in j.delta {
            let mv = match mv.as_str() {
                "L" => Move::L,
                "R" => Move::R,
                _ => return Err(AtmError::BadMove(mv)),
            };
            delta.push(Transition { from, read, to, write, mv });
        }
        let mut alphabet = j.alphabet;
        if !alphabet.contains(&j.blank) {
            alphabet.push(j.blank.clone());
        }
        Atm::new(j.states, alphabet, j.blank, j.initial, j.kind, delta)
    }
}

impl From<Atm> for AtmJson {
    fn from(m: Atm) -> AtmJson {
        AtmJson {
            states: m.states,
            alphabet: m.alphabet,
            blank: m.blank,
            initial: m.initial,
            kind: m.kind,
            delta: m
                .delta
                .into_iter()
                .map(|t| [t.from, t.read, t.to, t.write, t.mv.to_string()])
                .collect(),
        }
    }
}

impl Atm {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        blank: String,
        initial: String,
        kind: BTreeMap<String, Kind>,
        mut delta: Vec<Transition>,
    ) -> Result<Atm, AtmError> {
        let mut seen = BTreeSet::new();
        for s in states.iter().chain(&alphabet) {
            if !seen.insert(s) {
                return Err(AtmError::Duplicate(s.clone()));
            }
        }
        let is_state = |q: &String| states.contains(q);
        let is_sym = |a: &String| alphabet.contains(a);
        if !is_sym(&blank) {
            return Err(AtmError::UnknownSymbol(blank));
        }
        if !is_state(&initial) {
            return Err(AtmError::UnknownState(initial));
        }
        if let Some(q) = states.iter().find(|q| !kind.contains_key(*q)) {
            return Err(AtmError::MissingKind(q.clone()));
        }
        if let Some(q) = kind.keys().find(|q| !is_state(q)) {
            return Err(AtmError::UnknownState(q.clone()));
        }
        for t in &delta {
            for q in [&t.from, &t.to] {
                if !is_state(q) {
                    return Err(AtmError::UnknownState(q.clone()));
                }
            }
            for a in [&t.read, &t.write] {
                if !is_sym(a) {
                    return Err(AtmError::UnknownSymbol(a.clone()));
                }
            }
            if t.write == blank {
                return Err(AtmError::WritesBlank(t.to_string()));
            }
        }
        delta.sort_by(|a, b| (&a.from, a.sort_key()).cmp(&(&b.from, b.sort_key())));
        delta.dedup();
        Ok(Atm { states, alphabet, blank, initial, kind, delta })
    }

    pub fn from_json(src: &str) -> Result<Atm, AtmError> {
        let j: AtmJson = serde_json::from_str(src)?;
        Atm::try_from(j)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn kind(&self, q: &str) -> Kind {
        self.kind[q]
    }

    /// The transitions leaving `q` on `a`, ordered by (read, write, to, move).
    pub fn transitions<'a>(&'a self, q: &'a str, a: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.delta.iter().filter(move |t| t.from == q && t.read == a)
    }

    pub fn count(&self, q: &str, a: &str) -> usize {
        self.transitions(q, a).count()
    }

    /// Largest number of transitions on one (state, symbol) pair.
    pub fn branching_bound(&self) -> usize {
        let mut best = 0;
        for q in &self.states {
            for a in &self.alphabet {
                best = best.max(self.count(q, a));
            }
        }
        best
    }

    pub fn has_transition(&self, q: &str, a: &str, to: &str, b: &str, mv: Move) -> bool {
        self.transitions(q, a).any(|t| t.to == to && t.write == b && t.mv == mv)
    }

    /// The machine of the running example: on the empty tape it writes
    /// `a`, steps back and stops in a universal state reading `a`.
    pub fn example() -> Atm {
        let s = |x: &str| x.to_string();
        let t = |q: &str, a: &str, b: &str, p: &str, mv: Move| Transition {
            from: s(q),
            read: s(a),
            to: s(p),
            write: s(b),
            mv,
        };
        let kind = [("q0", Kind::Forall), ("q1", Kind::Exists), ("q2", Kind::Forall)]
            .into_iter()
            .map(|(q, k)| (s(q), k))
            .collect();
        Atm::new(
            vec![s("q0"), s("q1"), s("q2")],
            vec![s("a"), s("b"), s("c"), s("_")],
            s("_"),
            s("q0"),
            kind,
            vec![
                t("q0", "_", "a", "q1", Move::R),
                t("q0", "_", "b", "q2", Move::R),
                t("q0", "b", "b", "q2", Move::R),
                t("q0", "b", "b", "q1", Move::R),
                t("q0", "c", "c", "q2", Move::R),
                t("q1", "_", "a", "q0", Move::L),
            ],
        )
        .expect("well formed")
    }
}

/// Tape contents up to the last written cell.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tape(pub Vec<String>);

impl Tape {
    pub fn read<'a>(&'a self, i: u64, blank: &'a str) -> &'a str {
        self.0.get(i as usize).map(String::as_str).unwrap_or(blank)
    }

    pub fn write(&self, i: u64, b: &str, blank: &str) -> Tape {
        let mut v = self.0.clone();
        let i = i as usize;
        if v.len() <= i {
            v.resize(i + 1, blank.to_string());
        }
        v[i] = b.to_string();
        Tape(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Config {
    pub state: String,
    pub tape: Tape,
    pub head: u64,
}

impl Config {
    pub fn initial(m: &Atm) -> Config {
        Config { state: m.initial.clone(), tape: Tape::default(), head: 0 }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.tape.0.is_empty() { "eps".to_string() } else { self.tape.0.concat() };
        write!(f, "({},{},{})", self.state, w, self.head)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StepError {
    #[error("{0} is not a transition of the machine")]
    NotATransition(String),
    #[error("read `{found}` where the transition expects `{expected}`")]
    ReadMismatch { expected: String, found: String },
    #[error("move left from position 0")]
    FellOffLeft,
}

pub fn step(m: &Atm, c: &Config, tr: &Transition) -> Result<Config, StepError> {
    if !m.delta.contains(tr) || tr.from != c.state {
        return Err(StepError::NotATransition(tr.to_string()));
    }
    let found = c.tape.read(c.head, &m.blank);
    if found != tr.read {
        return Err(StepError::ReadMismatch { expected: tr.read.clone(), found: found.to_string() });
    }
    let head = tr.mv.apply(c.head).ok_or(StepError::FellOffLeft)?;
    Ok(Config { state: tr.to.clone(), tape: c.tape.write(c.head, &tr.write, &m.blank), head })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(m: &Atm, q: &str, a: &str, p: &str) -> Transition {
        m.delta.iter().find(|t| t.from == q && t.read == a && t.to == p).unwrap().clone()
    }

    #[test]
    fn steps_of_the_example() {
        let m = Atm::example();
        let c0 = Config::initial(&m);
        let c1 = step(&m, &c0, &tr(&m, "q0", "_", "q1")).unwrap();
        assert_eq!(c1.to_string(), "(q1,a,1)");
        let c2 = step(&m, &c1, &tr(&m, "q1", "_", "q0")).unwrap();
        assert_eq!(c2.to_string(), "(q0,aa,0)");
        assert_eq!(step(&m, &c2, &tr(&m, "q0", "_", "q1")).unwrap_err(), StepError::ReadMismatch {
            expected: "_".into(),
            found: "a".into()
        });
    }

    #[test]
    fn left_of_zero() {
        let m = Atm::example();
        let c = Config { state: "q1".into(), tape: Tape::default(), head: 0 };
        assert_eq!(step(&m, &c, &tr(&m, "q1", "_", "q0")), Err(StepError::FellOffLeft));
    }

    #[test]
    fn json_round_trip() {
        let m = Atm::example();
        let back = Atm::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.branching_bound(), 2);
    }

    #[test]
    fn rejects_blank_writes() {
        let src = r#"{"states":["q"],"alphabet":["a","_"],"blank":"_","initial":"q",
            "kind":{"q":"forall"},"delta":[["q","a","q","_","R"]]}"#;
        assert!(matches!(Atm::from_json(src), Err(AtmError::WritesBlank(_))));
    }
}
