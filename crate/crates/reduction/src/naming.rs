use std::collections::BTreeMap;

use atm::{Atm, Move};
use shorthands::GlobalEnv;

pub const PM: &str = "pM";
pub const PM_ROOT: &str = "pM_root";
pub const CM: &str = "cM";
pub const CONST: &str = "Const";
pub const CELL: &str = "Const_a";
pub const R: &str = "r";
pub const ACT_R: &str = "act_r";

const RESERVED: &[&str] = &[
    PM, PM_ROOT, CM, CONST, CELL, R, ACT_R, "c1", "d1", "act_d1", "act_e1", "f1", "d1x", "act_d1x", "act_e1x", "c2",
    "d2", "act_d2", "e2", "act_e2", "act_f2", "f2", "g2", "act_g2", "c3", "d3", "act_d3", "e3", "act_f3", "c4",
];
const RESERVED_PREFIXES: &[&str] = &["act_", "init_", "d4_", "f4_", "l4_"];

/// Names of globals and predicates of a compiled machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Naming {
    pub zero: String,
    pub one: String,
    /// Global variable standing for each tape symbol.
    pub symbols: BTreeMap<String, String>,
    /// Index of each symbol in the alphabet.
    pub index: BTreeMap<String, usize>,
    pub states: Vec<String>,
    pub initial: String,
    pub init: Option<String>,
    env: GlobalEnv,
}

impl Naming {
    pub fn new(m: &Atm, init_pred: bool) -> Naming {
        let symbols: BTreeMap<String, String> =
            m.alphabet.iter().enumerate().map(|(k, a)| (a.clone(), format!("g{}", k))).collect();
        let index = m.alphabet.iter().enumerate().map(|(k, a)| (a.clone(), k)).collect();
        let mut vars = vec!["zero".to_string(), "one".to_string()];
        vars.extend((0..m.alphabet.len()).map(|k| format!("g{}", k)));
        Naming {
            zero: "zero".into(),
            one: "one".into(),
            symbols,
            index,
            states: m.states.clone(),
            initial: m.initial.clone(),
            init: init_pred.then(|| format!("init_{}", m.initial)),
            env: GlobalEnv::new(vars),
        }
    }

    pub fn env(&self) -> &GlobalEnv {
        &self.env
    }

    pub fn sym(&self, a: &str) -> &str {
        &self.symbols[a]
    }

    pub fn mv(&self, mv: Move) -> &str {
        match mv {
            Move::L => &self.zero,
            Move::R => &self.one,
        }
    }

    pub fn bit(&self, b: bool) -> &str {
        if b {
            &self.one
        } else {
            &self.zero
        }
    }

    pub fn act(q: &str) -> String {
        format!("act_{}", q)
    }

    /// Predicate allocating the root branching node.
    pub fn root_pred(&self) -> &str {
        self.init.as_deref().unwrap_or(&self.initial)
    }

    /// State of a branching-node predicate.
    pub fn state_of(&self, pred: &str) -> Option<&str> {
        if self.init.as_deref() == Some(pred) {
            return Some(&self.initial);
        }
        self.states.iter().find(|q| *q == pred).map(String::as_str)
    }

    /// Target state of an action-node predicate.
    pub fn action_target(&self, pred: &str) -> Option<&str> {
        let q = pred.strip_prefix("act_")?;
        self.states.iter().find(|s| *s == q).map(String::as_str)
    }

    /// Predicates allocating pseudo-derivation nodes.
    pub fn node_preds(&self) -> Vec<String> {
        let mut out: Vec<String> = self.states.clone();
        out.extend(self.states.iter().map(|q| Naming::act(q)));
        out.extend(self.init.iter().cloned());
        out
    }
}

pub(crate) fn check_state_name(q: &str) -> Result<(), String> {
    if !sl_core::lex::is_ident(q) || q.contains(['\'', '~']) {
        return Err(format!("state `{}` is not a plain identifier", q));
    }
    if RESERVED.contains(&q) || RESERVED_PREFIXES.iter().any(|p| q.starts_with(p)) {
        return Err(format!("state `{}` clashes with a reserved predicate name", q));
    }
    Ok(())
}
