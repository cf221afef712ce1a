//! Extended rule syntax and its lowering to plain two-field rules.
//!
//! [`expand_all`] runs the passes in their required order: side conditions,
//! binary variables, wide tuples, binary choices, and finally threading of
//! the global variables through every predicate.

mod passes;
pub mod syntax;

pub use passes::{
    dedup, expand_binary_vars, expand_choices, expand_choices_naive, expand_disequality, expand_tuples,
    thread_globals, wide_semantics,
};
pub use syntax::{parse_extended, parse_extended_rule, EAtom, ETerm, ExtendedRule, SideCond};

use sl_core::{Sid, SidError, Term};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ShorthandError {
    #[error("rule `{rule}`: malformed side condition: {msg}")]
    MalformedSideCondition { rule: String, msg: String },
    #[error("rule `{rule}`: hat height {hat} too short for {binary} binary variables over {width} fields")]
    HatTooShort { rule: String, hat: usize, binary: usize, width: usize },
    #[error("rule `{rule}`: atom `{atom}` is not rooted at a field of the allocated tuple")]
    OrphanSubformula { rule: String, atom: String },
    #[error("rule `{rule}`: choice inside a tuple of width {width}")]
    ChoiceBeforeTupleExpansion { rule: String, width: usize },
    #[error("rule `{rule}`: {msg}")]
    PassOrder { rule: String, msg: String },
    #[error("rule `{rule}`: complement of `{var}` is not bound by a binary quantifier")]
    UnresolvedComplement { rule: String, var: String },
    #[error("rule `{rule}`: expected exactly one allocation")]
    BadAllocation { rule: String },
    #[error("rule `{rule}`: binds the global variable `{name}`")]
    GlobalCaptured { rule: String, name: String },
    #[error(transparent)]
    Sid(#[from] SidError),
}

/// Variables appended to every predicate. The first two name the bits
/// zero and one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalEnv {
    vars: Vec<String>,
}

impl GlobalEnv {
    pub fn new(vars: Vec<String>) -> GlobalEnv {
        assert!(vars.len() >= 2, "need at least zero and one");
        let mut seen = std::collections::BTreeSet::new();
        assert!(vars.iter().all(|v| seen.insert(v.clone())), "duplicate global");
        GlobalEnv { vars }
    }

    /// Just the two bits.
    pub fn bits() -> GlobalEnv {
        GlobalEnv::new(vec!["zero".into(), "one".into()])
    }

    pub fn zero(&self) -> &str {
        &self.vars[0]
    }

    pub fn one(&self) -> &str {
        &self.vars[1]
    }

    pub fn bit(&self, b: bool) -> &str {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> Vec<Term> {
        self.vars.iter().map(Term::var).collect()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.vars.iter().any(|g| g == v)
    }
}

fn validate(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<(), ShorthandError> {
    for r in rs {
        let bound = r.params.iter().chain(&r.exists).chain(&r.binary_exists);
        for b in bound {
            if env.contains(b) {
                return Err(ShorthandError::GlobalCaptured { rule: r.to_string(), name: b.clone() });
            }
        }
        for a in &r.atoms {
            for t in a.eterms() {
                if let ETerm::Compl(v) = &t {
                    if !r.binary_exists.contains(v) && !r.binary_params.iter().any(|(b, _)| b == v) {
                        return Err(ShorthandError::UnresolvedComplement { rule: r.to_string(), var: v.clone() });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Lowers extended rules to a two-field SID with the globals threaded
/// through. Free occurrences of global names refer to the globals.
pub fn expand_all(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<Sid, ShorthandError> {
    validate(rs, env)?;
    let rs = dedup(rs.to_vec());
    let rs = expand_disequality(&rs)?;
    let rs = expand_binary_vars(&rs, env)?;
    let rs = expand_tuples(&rs)?;
    let core = expand_choices(&rs, env)?;
    thread_globals(&core, env)
}

/// Like [`expand_all`] without threading the globals.
pub fn expand_unthreaded(rs: &[ExtendedRule], env: &GlobalEnv) -> Result<Vec<sl_core::Rule>, ShorthandError> {
    validate(rs, env)?;
    let rs = dedup(rs.to_vec());
    let rs = expand_disequality(&rs)?;
    let rs = expand_binary_vars(&rs, env)?;
    let rs = expand_tuples(&rs)?;
    expand_choices(&rs, env)
}
