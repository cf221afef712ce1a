//! Alternating Turing machines started on the empty tape, their
//! derivations, and pseudo-derivations that only track state and head
//! position.

mod machine;
mod search;
mod tree;
mod violations;

pub use machine::{step, Atm, AtmError, AtmJson, Config, Kind, Move, StepError, Tape, Transition};
pub use search::{enumerate_pseudo_derivations, search_derivation};
pub use tree::{
    check_derivation, check_pseudo_derivation, project, pseudo_to_derivation, Action, Addr, Branch, DerivationTree,
    Pos, PseudoDerivationTree,
};
pub use violations::{violations, Violation, ViolationKind};
