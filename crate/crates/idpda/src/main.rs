//! Command-line front end: witness generation, gadget strings,
//! determinization, runs, equivalence checking, and the verification suite.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use idpda::automaton::Didpda;
use idpda::determinize::{determinize, metrics};
use idpda::format;
use idpda::gadget;
use idpda::relation::Relation;
use idpda::sim;
use idpda::verify::{self, SuiteProfile};
use idpda::witness::{self, WitnessParams};
use idpda::Nidpda;

#[derive(Parser)]
#[command(name = "idpda", version, about = "Input-driven pushdown automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    A,
    B,
    Bns,
    B12,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileName {
    Desk,
    Quick,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a witness automaton document.
    Witness {
        #[arg(value_enum)]
        family: Family,
        /// State count.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Left-bracket count (Bns family).
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a gadget string.
    Gadget {
        /// One of: u, v, w, y, y-explicit, anchors, f, g, h.
        name: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        x: usize,
        /// Relation as a row-major 0/1 string of length n*n (gadget w).
        #[arg(long)]
        relation: Option<String>,
        /// Comma-separated relations for gadget f.
        #[arg(long)]
        relations: Option<String>,
        /// Comma-separated bracket indices for gadget f.
        #[arg(long)]
        indices: Option<String>,
    },
    /// Determinize an automaton document and report size metrics.
    Determinize {
        #[arg(long)]
        automaton: PathBuf,
        /// Output path for the determinized document; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an automaton on an input string.
    Run {
        #[arg(long)]
        automaton: PathBuf,
        /// Input string in the token syntax of the automaton's alphabet.
        #[arg(long)]
        input: String,
        /// Print one line per symbol: position, token, states, stack height.
        #[arg(long)]
        trace: bool,
    },
    /// Decide equivalence of two automata; prints a counterexample if any.
    Equiv {
        first: PathBuf,
        second: PathBuf,
    },
    /// Run the verification suite and print its report.
    Verify {
        #[arg(long, value_enum, default_value_t = ProfileName::Desk)]
        profile: ProfileName,
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on the bounded-equivalence scan lengths.
        #[arg(long)]
        max_len: Option<usize>,
    },
}

fn parse_relation(text: &str, n: usize) -> Result<Relation> {
    let bits: Vec<char> = text.trim().chars().collect();
    if bits.len() != n * n || bits.iter().any(|&c| c != '0' && c != '1') {
        bail!("relation must be a 0/1 string of length {}", n * n);
    }
    let mut r = Relation::empty(n);
    for (t, &c) in bits.iter().enumerate() {
        if c == '1' {
            r = r.insert(t / n, t % n);
        }
    }
    Ok(r)
}

fn load_automaton(path: &PathBuf) -> Result<Nidpda> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format::parse_automaton(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn witness_cmd(family: Family, n: usize, s: usize, out: Option<PathBuf>) -> Result<()> {
    let a = match family {
        Family::A => {
            WitnessParams::new(n, 1)?;
            witness::build_a(n)
        }
        Family::B => {
            WitnessParams::new(n, 1)?;
            witness::build_b(n)
        }
        Family::Bns => witness::build_bns(n, s)?,
        Family::B12 => witness::build_b12(),
    };
    emit(out, &format::serialize_automaton(&a))
}

#[allow(clippy::too_many_arguments)]
fn gadget_cmd(
    name: &str,
    n: usize,
    s: usize,
    m: usize,
    i: usize,
    j: usize,
    k: usize,
    x: usize,
    relation: Option<String>,
    relations: Option<String>,
    indices: Option<String>,
) -> Result<()> {
    match name {
        "u" => println!("{}", gadget::gadget_u(i, n)?),
        "v" => println!("{}", gadget::gadget_v(j, n)?),
        "w" => {
            let text = relation.context("gadget w needs --relation")?;
            println!("{}", gadget::gadget_w(&parse_relation(&text, n)?, n)?);
        }
        "y" => println!("{}", gadget::gadget_y(i, n)?),
        "y-explicit" => println!("{}", gadget::gadget_y_explicit(i, n)?),
        "anchors" => {
            let (push, pop) = gadget::gadget_anchors(n)?;
            println!("{push}");
            println!("{pop}");
        }
        "f" => {
            let rel_text = relations.context("gadget f needs --relations")?;
            let rels: Vec<Relation> = rel_text
                .split(',')
                .map(|t| parse_relation(t, n))
                .collect::<Result<_>>()?;
            let idx_text = indices.context("gadget f needs --indices")?;
            let idx: Vec<usize> = idx_text
                .split(',')
                .map(|t| t.trim().parse().context("bracket index"))
                .collect::<Result<_>>()?;
            println!("{}", gadget::gadget_f(&rels, &idx, n, s)?);
        }
        "g" => println!("{}", gadget::gadget_g(i, j, k, m, n)?),
        "h" => println!("{}", gadget::gadget_h(k, x, m, n, s)?),
        other => bail!("unknown gadget {other:?}; expected u, v, w, y, y-explicit, anchors, f, g or h"),
    }
    Ok(())
}

fn determinize_cmd(path: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let a = load_automaton(&path)?;
    let det = determinize(&a)?;
    let m = metrics(&det);
    let mut doc = String::new();
    let _ = writeln!(doc, "#! determinization of {}", path.display());
    let _ = writeln!(
        doc,
        "#! states {} stack-symbols {} reachable-states {} reachable-pushed {}",
        m.states, m.stack_symbols, m.reachable_states, m.reachable_pushed
    );
    for (q, r) in det.state_label.iter().enumerate() {
        let _ = writeln!(doc, "#! state {q} relation {r}");
    }
    for (g, (r, sym)) in det.pushed_symbol_label.iter().enumerate() {
        let _ = writeln!(doc, "#! stack g{g} relation {r} bracket {}", a.alphabet().name(*sym));
    }
    doc.push_str(&format::serialize_didpda(&det.automaton));
    emit(out, &doc)?;
    println!("states {}", m.states);
    println!("stack-symbols {}", m.stack_symbols);
    println!("reachable-states {}", m.reachable_states);
    println!("reachable-pushed {}", m.reachable_pushed);
    Ok(())
}

const TRACE_LIMIT: usize = 10_000;

fn run_cmd(path: PathBuf, input: String, trace: bool) -> Result<ExitCode> {
    let a = load_automaton(&path)?;
    let w = format::tokenize(a.alphabet(), &input)?;
    if trace {
        let snaps = sim::nidpda_frontiers(&a, &w, sim::DEFAULT_CONFIG_CAP)?;
        for (pos, snap) in snaps.iter().enumerate().skip(1).take(TRACE_LIMIT) {
            let token = a.alphabet().name(w.tokens()[pos - 1]);
            let states: BTreeSet<usize> = snap.configs.iter().map(|(q, _)| *q).collect();
            let states = states
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",");
            let height = snap.uniform_height().map(|h| h.to_string()).unwrap_or_else(|| "-".into());
            println!("{pos} {token} {{{states}}} {height}");
        }
    }
    let accepted = sim::nidpda_accepts(&a, &w)?;
    println!("{}", if accepted { "accept" } else { "reject" });
    Ok(ExitCode::SUCCESS)
}

fn as_deterministic(a: &Nidpda, label: &str) -> Result<Didpda> {
    match Didpda::from_nidpda(a) {
        Ok(d) => Ok(d),
        Err(_) => {
            eprintln!("{label}: nondeterministic input, determinizing first");
            Ok(determinize(a)?.automaton)
        }
    }
}

fn equiv_cmd(first: PathBuf, second: PathBuf) -> Result<ExitCode> {
    let a1 = load_automaton(&first)?;
    let a2 = load_automaton(&second)?;
    let d1 = as_deterministic(&a1, "first")?;
    let d2 = as_deterministic(&a2, "second")?;
    match verify::product_inequivalence(&d1, &d2)? {
        None => {
            println!("equivalent");
            Ok(ExitCode::SUCCESS)
        }
        Some(w) => {
            println!("inequivalent");
            println!("counterexample: {}", format::render_string(d1.alphabet(), &w));
            Ok(ExitCode::FAILURE)
        }
    }
}

fn verify_cmd(profile: ProfileName, seed: Option<u64>, max_len: Option<usize>) -> Result<ExitCode> {
    let mut p = match profile {
        ProfileName::Desk => SuiteProfile::desk(),
        ProfileName::Quick => SuiteProfile::quick(),
    };
    if let Some(seed) = seed {
        p.seed = seed;
    }
    if let Some(len) = max_len {
        p.equiv_len = p.equiv_len.min(len);
        p.equiv_len_bns = p.equiv_len_bns.min(len);
        p.b12_match_len = p.b12_match_len.min(len);
    }
    let report = verify::run_suite(&p)?;
    print!("{}", report.render());
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<ExitCode> = match cli.command {
        Command::Witness { family, n, s, out } => {
            witness_cmd(family, n, s, out).map(|()| ExitCode::SUCCESS)
        }
        Command::Gadget { name, n, s, m, i, j, k, x, relation, relations, indices } => {
            gadget_cmd(&name, n, s, m, i, j, k, x, relation, relations, indices)
                .map(|()| ExitCode::SUCCESS)
        }
        Command::Determinize { automaton, out } => {
            determinize_cmd(automaton, out).map(|()| ExitCode::SUCCESS)
        }
        Command::Run { automaton, input, trace } => run_cmd(automaton, input, trace),
        Command::Equiv { first, second } => equiv_cmd(first, second),
        Command::Verify { profile, seed, max_len } => verify_cmd(profile, seed, max_len),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
