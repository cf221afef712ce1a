//! Checks tying machines, their compiled rule sets and structures together:
//! encoding and decoding of pseudo-derivations, bounded entailment and the
//! exhaustive lemma suites behind the `sidforge` command line.

pub mod encoding;
pub mod entail;
pub mod lemmas;

pub use encoding::{
    check_encoding, check_encoding_witness, decode, encode, h2_canonical, infer_space_exp, is_model, isomorphic_h2,
    EncodingWitness,
};
pub use entail::{bounded_entailment, lhs_models, reachable, EntailOptions, EntailmentVerdict};
pub use lemmas::{
    acceptance, entailment_options, round_trips, verify_lemmas, violation_equivalence, Acceptance, Failure, LemmaReport,
};

use atm::Addr;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("position {pos} at node {addr:?} does not fit the space bound")]
    PositionOverflow { addr: Addr, pos: u64 },
    #[error("tree is not a pseudo-derivation of the machine")]
    NotAPseudoDerivation,
    #[error("the built structure is not a model of the left-hand side")]
    EncodingRejected,
    #[error("structure is not a model of the left-hand side")]
    NotAModel,
    #[error("rule set is not progressing")]
    NotProgressing,
    #[error("`{0}` is not a predicate atom")]
    NotAPredicate(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("variable `{0}` of the right-hand side does not occur on the left")]
    FreeVariable(String),
    #[error("{0}")]
    Enumeration(String),
    #[error("counter-model failed re-verification")]
    UnverifiedCounterModel,
}
