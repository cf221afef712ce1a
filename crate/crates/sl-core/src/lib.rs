//! Symbolic heaps over two-field cells.
//!
//! Formulas are kept in prenex form: an existential prefix over a
//! separating conjunction of atoms. Pure atoms are strict, i.e. they only
//! hold on the empty heap.

pub mod lex;
pub mod parse;
pub mod sat;
pub mod structure;
pub mod syntax;

pub use parse::{parse_atom, parse_formula, parse_rule, parse_sid, ParseError};
pub use sat::{find_match, satisfies, SatError};
pub use structure::{heap_disjoint_union, Heap, Loc, OverlapError, Store, Structure, StructureJson};
pub use syntax::{fresh_name, Atom, Rule, Sid, SidError, SymbolicHeap, Term};
