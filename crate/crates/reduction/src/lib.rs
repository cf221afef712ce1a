//! Compiles an alternating Turing machine with a space bound into an
//! entailment `pM(x) |= cM(x)` between inductive predicates.
//!
//! The left-hand side describes every pseudo-derivation tree of the machine
//! with positions written as `N`-bit numbers, the right-hand side describes
//! the pseudo-derivations that are not derivations. The entailment therefore
//! fails exactly when the machine accepts within `2^N` cells.

mod naming;
mod rules;

pub use naming::*;
pub use rules::*;

use atm::Atm;
use shorthands::{ExtendedRule, ShorthandError};
use sl_core::{Atom, Sid, Term};

/// Which rule set to generate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Rules exactly as in the original construction.
    Literal,
    /// Adds an initial-position predicate, full-range out-of-bounds moves,
    /// violations at the root branching node and stuck universal leaves.
    #[default]
    Repaired,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Variant, String> {
        match s {
            "literal" => Ok(Variant::Literal),
            "repaired" => Ok(Variant::Repaired),
            _ => Err(format!("unknown variant `{}` (expected literal or repaired)", s)),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("space exponent must be at least 1")]
    ZeroSpace,
    #[error("{0}")]
    BadState(String),
    #[error("position {pos} does not fit in {n} bits")]
    OutOfRange { pos: u64, n: u32 },
    #[error(transparent)]
    Shorthand(#[from] ShorthandError),
}

#[derive(Clone, Debug)]
pub struct ReductionParams {
    pub machine: Atm,
    /// Space exponent: positions range over `[0, 2^n)`.
    pub n: u32,
    /// Branching bound of the machine.
    pub b: usize,
    pub variant: Variant,
}

impl ReductionParams {
    pub fn new(machine: Atm, n: u32) -> Result<ReductionParams, ReductionError> {
        ReductionParams::with_variant(machine, n, Variant::default())
    }

    pub fn with_variant(machine: Atm, n: u32, variant: Variant) -> Result<ReductionParams, ReductionError> {
        if n == 0 {
            return Err(ReductionError::ZeroSpace);
        }
        for q in &machine.states {
            naming::check_state_name(q).map_err(ReductionError::BadState)?;
        }
        let b = machine.branching_bound();
        Ok(ReductionParams { machine, n, b, variant })
    }

    pub fn naming(&self) -> Naming {
        Naming::new(&self.machine, self.variant == Variant::Repaired)
    }
}

/// Big-endian binary encoding of `pos`, `true` standing for one.
pub fn bin(pos: u64, n: u32) -> Result<Vec<bool>, ReductionError> {
    if n < 64 && pos >> n != 0 {
        return Err(ReductionError::OutOfRange { pos, n });
    }
    Ok((0..n).rev().map(|k| k < 64 && (pos >> k) & 1 == 1).collect())
}

pub fn unbin(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

pub fn complement(bits: &[bool]) -> Vec<bool> {
    bits.iter().map(|b| !b).collect()
}

/// All extended rules, before shorthand expansion.
pub fn surface_rules(p: &ReductionParams) -> Vec<ExtendedRule> {
    let nm = p.naming();
    let mut out = build_pseudo_rules(p, &nm);
    out.extend(build_r_rules(p, &nm));
    out.extend(build_c1_rules(p, &nm));
    out.extend(build_c2_rules(p, &nm));
    out.extend(build_c3_rules(p, &nm));
    if p.variant == Variant::Repaired {
        out.extend(build_c4_rules(p, &nm));
    }
    out.extend(build_cm(p));
    shorthands::dedup(out)
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub params: ReductionParams,
    pub naming: Naming,
    pub surface: Vec<ExtendedRule>,
    pub sid: Sid,
    pub lhs: Atom,
    pub rhs: Atom,
}

impl Compiled {
    /// Arguments of both sides: `x` followed by the globals.
    pub fn args(&self) -> Vec<Term> {
        std::iter::once(Term::var("x")).chain(self.naming.env().terms()).collect()
    }
}

pub fn compile(p: &ReductionParams) -> Result<Compiled, ReductionError> {
    let naming = p.naming();
    let surface = surface_rules(p);
    let sid = shorthands::expand_all(&surface, naming.env())?;
    debug_assert!(sid
        .rules
        .iter()
        .all(|r| r.body.atoms.iter().all(|a| !matches!(a, Atom::Eq(..) | Atom::Diseq(..)))));
    let args = std::iter::once(Term::var("x")).chain(naming.env().terms()).collect::<Vec<_>>();
    Ok(Compiled {
        params: p.clone(),
        lhs: Atom::Pred { pred: PM.into(), args: args.clone() },
        rhs: Atom::Pred { pred: CM.into(), args },
        naming,
        surface,
        sid,
    })
}
