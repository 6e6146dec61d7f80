//! Command-line front end. [`run`] parses arguments, dispatches, and
//! returns the process exit status: 0 on success, 1 on bad input, 2 when
//! an internal invariant fails.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_traits::One;
use serde_json::json;

use crate::basis::{enumerate_basis, evaluate_expansion, expand, BasisError, Expansion};
use crate::chains::{is_boundary, normalize, scl_lower_bound, witness, Chain, ChainError};
use crate::counting::{big_phi, count_disjoint, phi, sample_defect, CountingError, Oracle};
use crate::cover::{lift_chain, lifts_to_json, schreier_basis, scl_via_cover, CosetTable, CoverError};
use crate::rational::{format_rational, int, Rational};
use crate::words::{abelianize, effective_rep, orient, primitive_decompose, Alphabet, Word, WordError};

#[derive(Debug, Parser)]
#[command(name = "quasichain", version, about = "Counting quasimorphisms and scl lower bounds in free groups")]
struct Cli {
    /// Rank (`2`) or symbol order (`aAbB`)
    #[arg(long, global = true, default_value = "2")]
    alphabet: String,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Longest random word used by `defect`
    #[arg(long = "max-len", global = true, default_value_t = 12)]
    max_len: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Freely reduce a word
    Reduce { word: String },
    /// Effective representative and basis orientation
    Effective { word: String },
    /// Primitive root and exponent
    Decompose { word: String },
    /// Disjoint occurrences of a pattern in a reduced word
    Count { pattern: String, word: String },
    /// Homogeneous counting quasimorphism
    Phi { pattern: String, word: String },
    /// Normal form of a chain over the basis
    Normalize {
        #[arg(allow_hyphen_values = true)]
        chain: String,
    },
    /// Whether a chain is a rational 1-boundary
    Boundary {
        #[arg(allow_hyphen_values = true)]
        chain: String,
    },
    /// Best counting quasimorphism for the chain
    Witness {
        #[arg(allow_hyphen_values = true)]
        chain: String,
    },
    /// Certified scl lower bound for a chain
    Sclbound {
        #[arg(allow_hyphen_values = true)]
        chain: String,
    },
    /// Basis words up to a length
    Basis { cutoff: usize },
    /// Expand an oracle over the basis (always JSON)
    Expand { oracle: String, cutoff: usize },
    /// Evaluate a saved expansion at a word
    EvalExpansion { file: PathBuf, word: String },
    /// Lift a word through a coset table
    Lift { table: PathBuf, word: String },
    /// scl lower bound computed in a finite-index subgroup
    Sclcover { table: PathBuf, word: String },
    /// Sampled defect of an oracle
    Defect { oracle: String },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<WordError> for Failure {
    fn from(e: WordError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CountingError> for Failure {
    fn from(e: CountingError) -> Self {
        match e {
            CountingError::PeriodNotFound { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<BasisError> for Failure {
    fn from(e: BasisError) -> Self {
        match e {
            BasisError::Oracle(inner) => inner.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            let _ = writeln!(out, "{text}");
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn pretty(value: serde_json::Value) -> String {
    serde_json::to_string_pretty(&value).expect("JSON values serialize")
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let alph = Alphabet::parse_arg(&cli.alphabet)?;
    let word = |s: &str| alph.parse_word(s);
    let fmt = |w: &Word| alph.format(w);
    let json = cli.json;

    Ok(match &cli.command {
        Command::Reduce { word: w } => {
            let g = word(w)?;
            if json { pretty(json!({ "word": fmt(&g) })) } else { fmt(&g) }
        }
        Command::Effective { word: w } => {
            let e = effective_rep(&alph, &word(w)?)?;
            let (b, sign) = orient(&alph, &e);
            if json {
                pretty(json!({ "effective": fmt(e.word()), "basis": fmt(b.word()), "sign": sign.signum() }))
            } else {
                format!("{} basis {} sign {}", fmt(e.word()), fmt(b.word()), sign.signum())
            }
        }
        Command::Decompose { word: w } => {
            let (root, m) = primitive_decompose(&alph, &word(w)?)?;
            if json { pretty(json!({ "root": fmt(&root), "exponent": m })) } else { format!("{} {m}", fmt(&root)) }
        }
        Command::Count { pattern, word: w } => {
            let n = count_disjoint(&word(pattern)?, &word(w)?)?;
            if json { pretty(json!({ "count": n })) } else { n.to_string() }
        }
        Command::Phi { pattern, word: w } => {
            let (p, g) = (word(pattern)?, word(w)?);
            let value = phi(&alph, &p, &g)?;
            if json {
                pretty(json!({ "phi": format_rational(&value), "big_phi": big_phi(&alph, &p, &g)? }))
            } else {
                format_rational(&value)
            }
        }
        Command::Normalize { chain } => {
            let n = normalize(&alph, &Chain::parse(&alph, chain)?);
            if json { pretty(json!(n.to_json(&alph))) } else { n.format(&alph) }
        }
        Command::Boundary { chain } => {
            let c = Chain::parse(&alph, chain)?;
            let b = is_boundary(&alph, &c);
            if json {
                let mut total = vec![int(0); alph.rank()];
                for (r, g) in c.terms() {
                    for (t, e) in total.iter_mut().zip(abelianize(&alph, g)) {
                        *t += r * int(e);
                    }
                }
                let abel: Vec<String> = total.iter().map(format_rational).collect();
                pretty(json!({ "boundary": b, "abelianization": abel }))
            } else {
                b.to_string()
            }
        }
        Command::Witness { chain } => {
            let c = Chain::parse(&alph, chain)?;
            match witness(&alph, &c) {
                Some((w, value)) if json => {
                    pretty(json!({ "witness": fmt(w.word()), "value": format_rational(&value) }))
                }
                Some((w, value)) => format!("{} value {}", fmt(w.word()), format_rational(&value)),
                None if json => pretty(json!({ "witness": null })),
                None => "none".into(),
            }
        }
        Command::Sclbound { chain } => {
            let bound = scl_lower_bound(&alph, &Chain::parse(&alph, chain)?);
            if json { pretty(bound.to_json(&alph)) } else { bound.format(&alph) }
        }
        Command::Basis { cutoff } => {
            let basis = enumerate_basis(&alph, *cutoff)?;
            let words: Vec<String> = basis.words.iter().map(|w| fmt(w.word())).collect();
            if json { pretty(json!({ "cutoff": cutoff, "words": words })) } else { words.join("\n") }
        }
        Command::Expand { oracle, cutoff } => {
            let o = Oracle::parse(&alph, oracle)?;
            let e = expand(&alph, &o, *cutoff)?;
            serde_json::to_string_pretty(&e.to_json(&alph)).expect("JSON values serialize")
        }
        Command::EvalExpansion { file, word: w } => {
            let e = Expansion::parse_json(&alph, &read_file(file)?)?;
            let v = evaluate_expansion(&alph, &e, &word(w)?);
            if json {
                pretty(json!({ "value": format_rational(&v.value), "truncated": v.truncated }))
            } else if v.truncated {
                format!("{} truncated", format_rational(&v.value))
            } else {
                format_rational(&v.value)
            }
        }
        Command::Lift { table, word: w } => {
            let t = CosetTable::parse(&alph, &read_file(table)?)?;
            let data = schreier_basis(&alph, &t)?;
            let lifts = lift_chain(&alph, &data, &word(w)?)?;
            let lifts = lifts_to_json(&alph, &data, &lifts);
            if json {
                let generators: Vec<_> = data
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(k, g)| {
                        json!({
                            "name": data.subgroup.generator_names()[k],
                            "expression": fmt(&g.expression),
                            "coset": g.coset,
                            "generator": alph.generator_names()[g.generator],
                        })
                    })
                    .collect();
                pretty(json!({ "index": data.index(), "generators": generators, "lifts": lifts }))
            } else {
                let mut lines: Vec<String> = data
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(k, g)| format!("{} = {}", data.subgroup.generator_names()[k], fmt(&g.expression)))
                    .collect();
                lines.extend(lifts.iter().map(|l| {
                    format!("lift {} degree {} start {} ambient {}", l.element, l.degree, l.start_coset, l.ambient)
                }));
                lines.join("\n")
            }
        }
        Command::Sclcover { table, word: w } => {
            let t = CosetTable::parse(&alph, &read_file(table)?)?;
            let data = schreier_basis(&alph, &t)?;
            let g = word(w)?;
            let bound = scl_via_cover(&alph, &data, &g)?;
            if json {
                let lifts = lifts_to_json(&alph, &data, &lift_chain(&alph, &data, &g)?);
                let direct = scl_lower_bound(&alph, &Chain::from_terms([(Rational::one(), g)])?);
                let mut v = bound.to_json(&data);
                v["lifts"] = json!(lifts);
                v["direct"] = direct.to_json(&alph);
                pretty(v)
            } else {
                bound.format(&data)
            }
        }
        Command::Defect { oracle } => {
            let o = Oracle::parse(&alph, oracle)?;
            let sampled = sample_defect(&alph, &o, cli.trials, cli.max_len, cli.seed)?;
            let bound = o.defect_bound().map(|b| format_rational(&b));
            if json {
                pretty(json!({
                    "oracle": o.describe(&alph),
                    "trials": cli.trials,
                    "seed": cli.seed,
                    "max_len": cli.max_len,
                    "sampled": format_rational(&sampled),
                    "bound": bound,
                }))
            } else {
                format!("sampled {} bound {}", format_rational(&sampled), bound.as_deref().unwrap_or("unknown"))
            }
        }
    })
}
