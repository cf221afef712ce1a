//! Exhaustive checks of the encoding lemmas on small trees.

use std::fmt;

use atm::{PseudoDerivationTree, Violation};
use rayon::prelude::*;
use reduction::{Compiled, CM};

use crate::encoding::{check_encoding, decode, encode, is_model, isomorphic_h2};
use crate::entail::{bounded_entailment, EntailOptions, EntailmentVerdict};
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub tree: String,
    pub reason: String,
}

fn fail(t: &PseudoDerivationTree, reason: impl Into<String>) -> Failure {
    Failure { tree: t.to_json().split_whitespace().collect::<Vec<_>>().join(" "), reason: reason.into() }
}

/// Encode/decode round trip for every tree.
pub fn round_trips(c: &Compiled, trees: &[PseudoDerivationTree]) -> Vec<Failure> {
    trees
        .par_iter()
        .filter_map(|t| {
            let (st, _) = match encode(t, c) {
                Ok(e) => e,
                Err(e) => return Some(fail(t, format!("encode: {}", e))),
            };
            if !check_encoding(&st, t, c) {
                return Some(fail(t, "check_encoding rejects the encoding"));
            }
            let back = match decode(&st, c) {
                Ok(b) => b,
                Err(e) => return Some(fail(t, format!("decode: {}", e))),
            };
            if &back != t {
                return Some(fail(t, "decode(encode(t)) differs from t"));
            }
            match encode(&back, c) {
                Ok((st2, _)) if isomorphic_h2(&st, &st2, c) => None,
                Ok(_) => Some(fail(t, "encode(decode(s)) is not isomorphic to s")),
                Err(e) => Some(fail(t, format!("re-encode: {}", e))),
            }
        })
        .collect()
}

/// `encode(t) |= cM` iff `t` has a violation. Every tree decoded from the
/// encoding is checked, not only `t`.
pub fn violation_equivalence(c: &Compiled, trees: &[PseudoDerivationTree]) -> Vec<Failure> {
    let m = &c.params.machine;
    trees
        .par_iter()
        .filter_map(|t| {
            let st = match encode(t, c) {
                Ok((st, _)) => st,
                Err(e) => return Some(fail(t, format!("encode: {}", e))),
            };
            let in_cm = is_model(&st, c, CM);
            let mut readings = vec![t.clone()];
            if let Ok(d) = decode(&st, c) {
                if &d != t {
                    readings.push(d);
                }
            }
            for r in &readings {
                let vs: Vec<Violation> = atm::violations(m, r);
                if in_cm != !vs.is_empty() {
                    let what = if in_cm { "in cM without violations" } else { "not in cM" };
                    let list: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                    return Some(fail(r, format!("{} [{}]", what, list.join("; "))));
                }
            }
            None
        })
        .collect()
}

/// Outcome of comparing bounded acceptance with bounded entailment.
#[derive(Clone, Debug)]
pub struct Acceptance {
    pub accepts: bool,
    pub verdict: EntailmentVerdict,
    /// Whether a counter-model decodes to a derivation.
    pub counter_model_is_derivation: Option<bool>,
}

impl Acceptance {
    pub fn consistent(&self) -> bool {
        self.accepts != self.verdict.holds() && self.counter_model_is_derivation != Some(false)
    }
}

pub fn entailment_options(c: &Compiled, max_nodes: usize) -> EntailOptions {
    EntailOptions { max_nodes, counted: Some(c.naming.node_preds()) }
}

pub fn acceptance(c: &Compiled, k: usize) -> Result<Acceptance, HarnessError> {
    let m = &c.params.machine;
    let accepts = atm::search_derivation(m, c.params.n, k).is_some();
    let verdict = bounded_entailment(&c.sid, &c.lhs, &c.rhs, &entailment_options(c, k))?;
    let counter_model_is_derivation = verdict
        .counter_model()
        .map(|st| decode(st, c).ok().and_then(|t| atm::pseudo_to_derivation(m, &t)).is_some());
    Ok(Acceptance { accepts, verdict, counter_model_is_derivation })
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub k: usize,
    pub trees: usize,
    pub round_trip: Vec<Failure>,
    pub equivalence: Vec<Failure>,
    pub acceptance: Acceptance,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.round_trip.is_empty() && self.equivalence.is_empty() && self.acceptance.consistent()
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "pseudo-derivations with at most {} nodes: {}", self.k, self.trees)?;
        writeln!(f, "round trip: {} ({} failures)", status(self.round_trip.is_empty()), self.round_trip.len())?;
        for x in self.round_trip.iter().take(5) {
            writeln!(f, "  {}: {}", x.reason, x.tree)?;
        }
        writeln!(
            f,
            "cM membership iff violation: {} ({} failures)",
            status(self.equivalence.is_empty()),
            self.equivalence.len()
        )?;
        for x in self.equivalence.iter().take(5) {
            writeln!(f, "  {}: {}", x.reason, x.tree)?;
        }
        let a = &self.acceptance;
        let verdict = match &a.verdict {
            EntailmentVerdict::HoldsWithinBound { models, .. } => format!("holds on {} models", models),
            EntailmentVerdict::CounterModel { structure, .. } => format!("counter-model with {} cells", structure.heap.len()),
        };
        writeln!(
            f,
            "acceptance vs entailment: {} (accepts within bound: {}, entailment {})",
            status(a.consistent()),
            a.accepts,
            verdict
        )
    }
}

pub fn verify_lemmas(c: &Compiled, k: usize) -> Result<LemmaReport, HarnessError> {
    let trees = atm::enumerate_pseudo_derivations(&c.params.machine, c.params.n, k);
    Ok(LemmaReport {
        k,
        trees: trees.len(),
        round_trip: round_trips(c, &trees),
        equivalence: violation_equivalence(c, &trees),
        acceptance: acceptance(c, k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use atm::Atm;
    use reduction::{compile, ReductionParams, Variant};

    #[test]
    fn example_machine_small_bound() {
        let c = compile(&ReductionParams::new(Atm::example(), 1).unwrap()).unwrap();
        let r = verify_lemmas(&c, 7).unwrap();
        assert!(r.ok(), "{}", r);
        assert!(r.trees > 0);
    }

    #[test]
    fn literal_rules_miss_violations() {
        let p = ReductionParams::with_variant(Atm::example(), 2, Variant::Literal).unwrap();
        let c = compile(&p).unwrap();
        let ts = atm::enumerate_pseudo_derivations(&c.params.machine, 2, 7);
        assert!(round_trips(&c, &ts).is_empty());
        assert!(!violation_equivalence(&c, &ts).is_empty());
    }
}
