use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use atm::{Atm, DerivationTree, PseudoDerivationTree};
use clap::{Parser, Subcommand, ValueEnum};
use harness::{bounded_entailment, EntailOptions, EntailmentVerdict};
use reduction::{compile, Compiled, ReductionParams, Variant};
use sl_core::{Atom, StructureJson};

#[derive(Parser)]
#[command(name = "sidforge", version, about = "Inductive rule sets, machines and bounded entailment")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Literal,
    Repaired,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Literal => Variant::Literal,
            VariantArg::Repaired => Variant::Repaired,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pass {
    Disequality,
    BinaryVars,
    Tuples,
    Choices,
    Globals,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the progress, connectivity and establishment conditions.
    CheckPce {
        sid: PathBuf,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Lower an extended rule file to core rules.
    Expand {
        file: PathBuf,
        /// Global variables, first two standing for the binary digits.
        #[arg(long, value_delimiter = ',', default_value = "zero,one")]
        globals: Vec<String>,
        #[arg(long, value_enum)]
        emit_after: Option<Pass>,
    },
    /// Compile a machine into the rule set of its entailment problem.
    Compile {
        atm: PathBuf,
        #[arg(long)]
        space_exp: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit the rules before shorthand expansion.
        #[arg(long)]
        surface: bool,
        #[arg(long, value_enum, default_value = "repaired")]
        variant: VariantArg,
    },
    #[command(subcommand)]
    Atm(AtmCmd),
    /// Bounded entailment between two predicate atoms.
    Entail {
        sid: PathBuf,
        lhs: String,
        rhs: String,
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        /// Only these predicates count towards the bound.
        #[arg(long, value_delimiter = ',')]
        count_preds: Option<Vec<String>>,
        #[arg(long)]
        json: bool,
        /// Print the unfolding tree of a counter-model.
        #[arg(long)]
        dump_trees: bool,
    },
    /// Exhaustive encoding, violation and acceptance checks for a machine.
    VerifyLemmas {
        atm: PathBuf,
        #[arg(long, default_value_t = 1)]
        space_exp: u32,
        #[arg(long, default_value_t = 7)]
        k: usize,
        #[arg(long, value_enum, default_value = "repaired")]
        variant: VariantArg,
    },
    /// Encode a pseudo-derivation as a structure.
    Encode {
        atm: PathBuf,
        pseudo: PathBuf,
        #[arg(long)]
        space_exp: u32,
        #[arg(long, value_enum, default_value = "repaired")]
        variant: VariantArg,
    },
    /// Decode a structure into the pseudo-derivation it encodes.
    Decode {
        atm: PathBuf,
        structure: PathBuf,
        #[arg(long)]
        space_exp: Option<u32>,
        #[arg(long, value_enum, default_value = "repaired")]
        variant: VariantArg,
    },
}

#[derive(Subcommand)]
enum AtmCmd {
    /// Validate a derivation tree.
    CheckDerivation { atm: PathBuf, tree: PathBuf },
    /// List the violations of a pseudo-derivation.
    Violations {
        atm: PathBuf,
        pseudo: PathBuf,
        #[arg(long)]
        space_exp: Option<u32>,
    },
    /// Search for a derivation within a space and size bound.
    Search {
        atm: PathBuf,
        #[arg(long)]
        space_exp: u32,
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
    },
}

/// Input problems exit with 2, like usage errors.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Usage {
        Usage(e.into())
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn machine(p: &Path) -> Result<Atm> {
    Atm::from_json(&read(p)?).with_context(|| format!("parsing machine {}", p.display()))
}

fn compiled(m: Atm, n: u32, v: VariantArg) -> Result<Compiled> {
    Ok(compile(&ReductionParams::with_variant(m, n, v.into())?)?)
}

fn atom(src: &str) -> Result<Atom> {
    let (pred, args) = sl_core::parse_atom(src).map_err(|e| anyhow!("atom `{}`: {}", src, e))?;
    Ok(Atom::pred(pred, args))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn lines<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string() + "\n").collect()
}

fn run(cmd: Cmd) -> Result<bool, Usage> {
    match cmd {
        Cmd::CheckPce { sid, bound } => {
            let sid = sl_core::parse_sid(&read(&sid)?).map_err(|e| anyhow!("{}", e))?;
            let report = pce::check_all(&sid, bound);
            print!("{}", report);
            Ok(report.ok())
        }
        Cmd::Expand { file, globals, emit_after } => {
            let rs = shorthands::parse_extended(&read(&file)?).map_err(|e| anyhow!("{}", e))?;
            if globals.len() < 2 {
                return Err(anyhow!("at least two globals are needed").into());
            }
            let env = shorthands::GlobalEnv::new(globals);
            let stage = |p: Pass| emit_after == Some(p);
            let rs = shorthands::dedup(rs);
            let rs = shorthands::expand_disequality(&rs)?;
            if stage(Pass::Disequality) {
                print!("{}", lines(&rs));
                return Ok(true);
            }
            let rs = shorthands::expand_binary_vars(&rs, &env)?;
            if stage(Pass::BinaryVars) {
                print!("{}", lines(&rs));
                return Ok(true);
            }
            let rs = shorthands::expand_tuples(&rs)?;
            if stage(Pass::Tuples) {
                print!("{}", lines(&rs));
                return Ok(true);
            }
            let core = shorthands::expand_choices(&rs, &env)?;
            if stage(Pass::Choices) {
                print!("{}", lines(&core));
                return Ok(true);
            }
            print!("{}", shorthands::thread_globals(&core, &env)?);
            Ok(true)
        }
        Cmd::Compile { atm, space_exp, output, surface, variant } => {
            let c = compiled(machine(&atm)?, space_exp, variant)?;
            let text = if surface { lines(&c.surface) } else { c.sid.to_string() };
            emit(&output, &text)?;
            eprintln!("{} surface rules, {} core rules; check {} |= {}", c.surface.len(), c.sid.len(), c.lhs, c.rhs);
            Ok(true)
        }
        Cmd::Atm(a) => run_atm(a),
        Cmd::Entail { sid, lhs, rhs, max_nodes, count_preds, json, dump_trees } => {
            let sid = sl_core::parse_sid(&read(&sid)?).map_err(|e| anyhow!("{}", e))?;
            let opts = EntailOptions { max_nodes, counted: count_preds };
            let v = bounded_entailment(&sid, &atom(&lhs)?, &atom(&rhs)?, &opts)?;
            if json {
                println!("{}", v.to_json());
            } else {
                match &v {
                    EntailmentVerdict::HoldsWithinBound { bound, models } => {
                        println!("holds within bound {} ({} models checked)", bound, models)
                    }
                    EntailmentVerdict::CounterModel { structure, tree, note } => {
                        println!("counter-model: {}", note);
                        println!("{}", serde_json::to_string(&structure.to_json()).expect("serializable"));
                        if dump_trees {
                            println!("{}", serde_json::to_string_pretty(&tree.to_json()).expect("serializable"));
                        }
                    }
                }
            }
            Ok(v.holds())
        }
        Cmd::VerifyLemmas { atm, space_exp, k, variant } => {
            let c = compiled(machine(&atm)?, space_exp, variant)?;
            let report = harness::verify_lemmas(&c, k)?;
            print!("{}", report);
            Ok(report.ok())
        }
        Cmd::Encode { atm, pseudo, space_exp, variant } => {
            let c = compiled(machine(&atm)?, space_exp, variant)?;
            let t = PseudoDerivationTree::from_json(&read(&pseudo)?)?;
            let (st, _) = harness::encode(&t, &c)?;
            println!("{}", serde_json::to_string_pretty(&st.to_json()).expect("serializable"));
            Ok(true)
        }
        Cmd::Decode { atm, structure, space_exp, variant } => {
            let m = machine(&atm)?;
            let js: StructureJson = serde_json::from_str(&read(&structure)?)?;
            let st = js.into_structure()?;
            let n = match space_exp {
                Some(n) => n,
                None => harness::infer_space_exp(&st).ok_or_else(|| anyhow!("cannot read the space bound off the structure"))?,
            };
            let c = compiled(m, n, variant)?;
            match harness::decode(&st, &c) {
                Ok(t) => {
                    println!("{}", t.to_json());
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("{}", e);
                    Ok(false)
                }
            }
        }
    }
}

fn run_atm(a: AtmCmd) -> Result<bool, Usage> {
    match a {
        AtmCmd::CheckDerivation { atm, tree } => {
            let m = machine(&atm)?;
            let t = DerivationTree::from_json(&read(&tree)?)?;
            let ok = atm::check_derivation(&m, &t);
            println!("{}", if ok { "valid derivation" } else { "not a derivation" });
            Ok(ok)
        }
        AtmCmd::Violations { atm, pseudo, space_exp } => {
            let m = machine(&atm)?;
            let t = PseudoDerivationTree::from_json(&read(&pseudo)?)?;
            let n = space_exp.unwrap_or(63);
            if !atm::check_pseudo_derivation(&m, &t, n) {
                println!("not a pseudo-derivation");
                return Ok(false);
            }
            let vs = atm::violations(&m, &t);
            for v in &vs {
                println!("{}", v);
            }
            if vs.is_empty() {
                println!("no violations");
            }
            Ok(vs.is_empty())
        }
        AtmCmd::Search { atm, space_exp, max_nodes } => {
            let m = machine(&atm)?;
            match atm::search_derivation(&m, space_exp, max_nodes) {
                Some(t) => {
                    println!("{}", t.to_json());
                    Ok(true)
                }
                None => {
                    println!("no derivation with at most {} nodes", max_nodes);
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
