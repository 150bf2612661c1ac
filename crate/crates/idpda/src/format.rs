//! Bit-exact textual formats: automaton documents, input strings, and check
//! reports.
//!
//! An automaton document is line-based and versioned by a leading
//! `idpda-format 1` line. `#!` starts a comment line. The header lines
//!
//! ```text
//! alphabet neutral: - #
//! alphabet open: <
//! alphabet close: >
//! states: 2
//! initial: 0
//! accepting: 0 1
//! stack: 0 1
//! ```
//!
//! appear in exactly this order (their token lists may be empty) and are
//! followed by transition lines, one outcome set per line:
//!
//! ```text
//! t0 <sym> <state> -> <state>...          neutral
//! t+ <sym> <state> -> (<state>,<stack>)...  open
//! t- <sym> <state> <stack> -> <state>...  close
//! ```
//!
//! A key without a line denotes the empty outcome set. Serialization is
//! deterministic (symbols in declaration order, states ascending) and
//! `parse(serialize(a))` is structurally `a`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, InputString, SymbolClass};
use crate::automaton::{
    CloseTable, Didpda, Nidpda, NeutralTable, OpenTable, StackSym, ValidationError,
};
use crate::verify::{CheckResult, CheckStatus};

/// Version line of every automaton document.
pub const FORMAT_VERSION_LINE: &str = "idpda-format 1";

/// Errors raised by the text formats.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("unrecognized character sequence at offset {offset}: {snippet:?}")]
    Lex { offset: usize, snippet: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("missing or wrong version line, expected {FORMAT_VERSION_LINE:?}")]
    Version,
    #[error("document ended before the {header:?} header")]
    MissingHeader { header: &'static str },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Longest-match tokenization of `text` over the alphabet's token names.
/// Whitespace separates tokens and is otherwise ignored.
pub fn tokenize(a: &Alphabet, text: &str) -> Result<InputString, FormatError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut tokens = Vec::new();
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let rest = &text[pos..];
        let hit = a
            .iter()
            .filter(|(_, name, _)| rest.starts_with(name))
            .max_by_key(|(_, name, _)| name.len());
        match hit {
            Some((sym, name, _)) => {
                tokens.push(sym);
                pos += name.len();
            }
            None => {
                let snippet: String = rest.chars().take(8).collect();
                return Err(FormatError::Lex { offset: pos, snippet });
            }
        }
    }
    Ok(InputString::from_syms(tokens))
}

/// Concatenated token names.
pub fn render_string(a: &Alphabet, w: &InputString) -> String {
    w.tokens().iter().map(|&s| a.name(s)).collect()
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("#!"))
}

fn expect_prefix<'a>(
    line: Option<(usize, &'a str)>,
    header: &'static str,
) -> Result<(usize, &'a str), FormatError> {
    let (no, l) = line.ok_or(FormatError::MissingHeader { header })?;
    let rest = l.strip_prefix(header).ok_or_else(|| FormatError::Syntax {
        line: no,
        msg: format!("expected {header:?} header, found {l:?}"),
    })?;
    Ok((no, rest.trim()))
}

fn parse_states(no: usize, text: &str) -> Result<Vec<usize>, FormatError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| FormatError::Syntax {
                line: no,
                msg: format!("expected a state number, found {t:?}"),
            })
        })
        .collect()
}

/// Parses an automaton document. Syntax errors carry the line number;
/// range and class violations come from automaton validation.
pub fn parse_automaton(text: &str) -> Result<Nidpda, FormatError> {
    let mut lines = significant_lines(text);
    match lines.next() {
        Some((_, l)) if l == FORMAT_VERSION_LINE => {}
        _ => return Err(FormatError::Version),
    }
    let (_, neutral_toks) = expect_prefix(lines.next(), "alphabet neutral:")?;
    let (_, open_toks) = expect_prefix(lines.next(), "alphabet open:")?;
    let (_, close_toks) = expect_prefix(lines.next(), "alphabet close:")?;
    let alphabet = Alphabet::new(
        &neutral_toks.split_whitespace().collect::<Vec<_>>(),
        &open_toks.split_whitespace().collect::<Vec<_>>(),
        &close_toks.split_whitespace().collect::<Vec<_>>(),
    )?;
    let (no, states_text) = expect_prefix(lines.next(), "states:")?;
    let n_states: usize = states_text.parse().map_err(|_| FormatError::Syntax {
        line: no,
        msg: format!("expected a state count, found {states_text:?}"),
    })?;
    let (no, initial_text) = expect_prefix(lines.next(), "initial:")?;
    let initial: BTreeSet<usize> = parse_states(no, initial_text)?.into_iter().collect();
    let (no, accepting_text) = expect_prefix(lines.next(), "accepting:")?;
    let accepting: BTreeSet<usize> = parse_states(no, accepting_text)?.into_iter().collect();
    let (_, stack_text) = expect_prefix(lines.next(), "stack:")?;
    let stack_names: Vec<String> = stack_text.split_whitespace().map(String::from).collect();

    let stack_sym = |no: usize, name: &str| -> Result<StackSym, FormatError> {
        stack_names
            .iter()
            .position(|n| n == name)
            .map(|i| StackSym(i as u16))
            .ok_or_else(|| FormatError::Semantic {
                line: no,
                msg: format!("stack symbol {name:?} is not declared"),
            })
    };
    let input_sym = |no: usize, name: &str| {
        alphabet.sym(name).ok_or_else(|| FormatError::Semantic {
            line: no,
            msg: format!("input symbol {name:?} is not declared"),
        })
    };

    let mut neutral = NeutralTable::new();
    let mut open = OpenTable::new();
    let mut close = CloseTable::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let syntax = |msg: String| FormatError::Syntax { line: no, msg };
        let arrow_at = |want: usize| -> Result<(), FormatError> {
            if fields.len() <= want || fields[want] != "->" {
                return Err(syntax(format!("expected \"->\" as field {}", want + 1)));
            }
            Ok(())
        };
        match fields.first() {
            Some(&"t0") => {
                if fields.len() < 3 {
                    return Err(syntax("neutral line needs a symbol and a state".into()));
                }
                arrow_at(3)?;
                let sym = input_sym(no, fields[1])?;
                let q = parse_states(no, fields[2])?[0];
                let succs: BTreeSet<usize> =
                    parse_states(no, &fields[4..].join(" "))?.into_iter().collect();
                neutral.insert((sym, q), succs);
            }
            Some(&"t+") => {
                if fields.len() < 3 {
                    return Err(syntax("open line needs a symbol and a state".into()));
                }
                arrow_at(3)?;
                let sym = input_sym(no, fields[1])?;
                let q = parse_states(no, fields[2])?[0];
                let mut succs = BTreeSet::new();
                for pair in &fields[4..] {
                    let inner = pair
                        .strip_prefix('(')
                        .and_then(|p| p.strip_suffix(')'))
                        .ok_or_else(|| syntax(format!("expected (state,stack), found {pair:?}")))?;
                    let (qs, gs) = inner
                        .split_once(',')
                        .ok_or_else(|| syntax(format!("expected (state,stack), found {pair:?}")))?;
                    let r = parse_states(no, qs)?[0];
                    succs.insert((r, stack_sym(no, gs)?));
                }
                open.insert((sym, q), succs);
            }
            Some(&"t-") => {
                if fields.len() < 4 {
                    return Err(syntax("close line needs a symbol, a state and a stack symbol".into()));
                }
                arrow_at(4)?;
                let sym = input_sym(no, fields[1])?;
                let q = parse_states(no, fields[2])?[0];
                let g = stack_sym(no, fields[3])?;
                let succs: BTreeSet<usize> =
                    parse_states(no, &fields[5..].join(" "))?.into_iter().collect();
                close.insert((sym, q, g), succs);
            }
            Some(other) => {
                return Err(syntax(format!("unknown line kind {other:?}")));
            }
            None => unreachable!("blank lines are filtered"),
        }
    }
    // Canonical form never stores empty outcome sets.
    neutral.retain(|_, s| !s.is_empty());
    open.retain(|_, s| !s.is_empty());
    close.retain(|_, s| !s.is_empty());
    Ok(Nidpda::new(alphabet, n_states, stack_names, initial, accepting, neutral, open, close)?)
}

/// Serializes an automaton document in canonical order.
pub fn serialize_automaton(a: &Nidpda) -> String {
    let al = a.alphabet();
    let names = |class: SymbolClass| {
        al.iter()
            .filter(|&(_, _, c)| c == class)
            .map(|(_, n, _)| n)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let states = |set: &BTreeSet<usize>| {
        set.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_VERSION_LINE}");
    let _ = writeln!(out, "alphabet neutral: {}", names(SymbolClass::Neutral));
    let _ = writeln!(out, "alphabet open: {}", names(SymbolClass::Open));
    let _ = writeln!(out, "alphabet close: {}", names(SymbolClass::Close));
    let _ = writeln!(out, "states: {}", a.n_states());
    let _ = writeln!(out, "initial: {}", states(a.initial()));
    let _ = writeln!(out, "accepting: {}", states(a.accepting()));
    let _ = writeln!(out, "stack: {}", a.stack_names().join(" "));
    for (&(sym, q), succs) in a.neutral_table() {
        if succs.is_empty() {
            continue;
        }
        let _ = writeln!(out, "t0 {} {q} -> {}", al.name(sym), states(succs));
    }
    for (&(sym, q), succs) in a.open_table() {
        if succs.is_empty() {
            continue;
        }
        let rhs = succs
            .iter()
            .map(|&(r, g)| format!("({r},{})", a.stack_name(g)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "t+ {} {q} -> {rhs}", al.name(sym));
    }
    for (&(sym, q, g), succs) in a.close_table() {
        if succs.is_empty() {
            continue;
        }
        let _ = writeln!(out, "t- {} {q} {} -> {}", al.name(sym), a.stack_name(g), states(succs));
    }
    out
}

/// Serializes a deterministic automaton as its widened document.
pub fn serialize_didpda(d: &Didpda) -> String {
    serialize_automaton(&d.to_nidpda())
}

/// Parses a document that must describe a deterministic automaton.
pub fn parse_didpda(text: &str) -> Result<Didpda, FormatError> {
    let a = parse_automaton(text)?;
    Ok(Didpda::from_nidpda(&a)?)
}

/// Renders check results, one line per check, ending in a summary line.
/// The exit status of the tools is success iff every line is a PASS.
pub fn render_report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    let mut failed = 0usize;
    for r in results {
        match r.status {
            CheckStatus::Pass => {
                let _ = writeln!(out, "CHECK {} PASS", r.id);
            }
            CheckStatus::Fail => {
                failed += 1;
                let _ = writeln!(out, "CHECK {} FAIL expected={} got={}", r.id, r.expected, r.observed);
            }
            CheckStatus::Budget => {
                failed += 1;
                let _ = writeln!(out, "CHECK {} BUDGET got={}", r.id, r.observed);
            }
        }
    }
    if failed == 0 {
        let _ = writeln!(out, "ALL PASS");
    } else {
        let _ = writeln!(out, "FAIL {failed}/{}", results.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{build_a, build_b, build_b12, build_bns};
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        let a2 = build_a(2);
        let w = tokenize(a2.alphabet(), "<--").unwrap();
        assert_eq!(render_string(a2.alphabet(), &w), "<--");
        assert_eq!(w.len(), 3);

        // Longest match takes the triple bracket as one token.
        let b24 = build_bns(2, 4).unwrap();
        let w = tokenize(b24.alphabet(), ">>>").unwrap();
        assert_eq!(w.len(), 1);
        let w = tokenize(b24.alphabet(), "<3>-").unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(render_string(b24.alphabet(), &w), "<3>-");

        // The double close wins over two singles.
        let b12 = build_b12();
        let w = tokenize(b12.alphabet(), "<>>").unwrap();
        assert_eq!(w.len(), 2);

        let err = tokenize(a2.alphabet(), "<-x-").unwrap_err();
        assert_eq!(err, FormatError::Lex { offset: 2, snippet: "x-".into() });
    }

    #[test]
    fn tokenize_ignores_whitespace() {
        let a2 = build_a(2);
        let spaced = tokenize(a2.alphabet(), " # < >\t-\n").unwrap();
        let tight = tokenize(a2.alphabet(), "#<>-").unwrap();
        assert_eq!(spaced, tight);
    }

    #[test]
    fn round_trip_all_witnesses() {
        let mut all = vec![build_b12()];
        for n in 1..=3 {
            all.push(build_a(n));
            all.push(build_b(n));
            for s in 1..=4 {
                all.push(build_bns(n, s).unwrap());
            }
        }
        for a in all {
            let doc = serialize_automaton(&a);
            let back = parse_automaton(&doc).unwrap();
            assert_eq!(back, a);
            // Serialization is canonical, so a second trip is byte-identical.
            assert_eq!(serialize_automaton(&back), doc);
        }
    }

    #[test]
    fn deterministic_round_trip() {
        let det = crate::determinize::determinize(&build_a(2)).unwrap();
        let doc = serialize_didpda(&det.automaton);
        let back = parse_didpda(&doc).unwrap();
        assert_eq!(back, det.automaton);
    }

    #[test]
    fn missing_header_is_a_parse_error() {
        let a2 = build_a(2);
        let doc = serialize_automaton(&a2);
        let without_accepting: String = doc
            .lines()
            .filter(|l| !l.starts_with("accepting:"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = parse_automaton(&without_accepting).unwrap_err();
        assert!(matches!(err, FormatError::Syntax { .. }), "got {err:?}");
    }

    #[test]
    fn version_line_is_required() {
        let doc = serialize_automaton(&build_a(2));
        let stripped = doc.replacen(FORMAT_VERSION_LINE, "#! no version", 1);
        assert_eq!(parse_automaton(&stripped).unwrap_err(), FormatError::Version);
    }

    #[test]
    fn undeclared_stack_symbol_is_rejected() {
        let doc = serialize_automaton(&build_a(2));
        let bad = format!("{doc}t+ < 1 -> (1,zz)\n");
        let err = parse_automaton(&bad).unwrap_err();
        assert!(matches!(err, FormatError::Semantic { .. }), "got {err:?}");
    }

    #[test]
    fn out_of_range_state_is_a_validation_error() {
        let doc = serialize_automaton(&build_a(2));
        let bad = format!("{doc}t0 - 0 -> 9\n");
        let err = parse_automaton(&bad).unwrap_err();
        assert!(matches!(err, FormatError::Validation(_)), "got {err:?}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored()  {
        let a2 = build_a(2);
        let doc = serialize_automaton(&a2);
        let commented: String = doc
            .lines()
            .flat_map(|l| [l.to_string(), "#! note".to_string(), String::new()])
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(parse_automaton(&commented).unwrap(), a2);
    }

    #[test]
    fn report_rendering() {
        use std::time::Duration;
        let pass = CheckResult {
            id: "a.b".into(),
            status: CheckStatus::Pass,
            expected: "16".into(),
            observed: "16".into(),
            runtime: Duration::ZERO,
        };
        let fail = CheckResult {
            id: "c.d".into(),
            status: CheckStatus::Fail,
            expected: "15".into(),
            observed: "14".into(),
            runtime: Duration::ZERO,
        };
        assert_eq!(render_report(&[pass.clone()]), "CHECK a.b PASS\nALL PASS\n");
        assert_eq!(
            render_report(&[pass, fail]),
            "CHECK a.b PASS\nCHECK c.d FAIL expected=15 got=14\nFAIL 1/2\n"
        );
    }

    proptest! {
        /// Rendering token sequences and re-tokenizing them is the identity
        /// for the canonical alphabets, whose names are longest-match safe,
        /// provided tokens are separated by spaces.
        #[test]
        fn tokenize_render_round_trip(len in 0usize..30, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let b24 = build_bns(2, 4).unwrap();
            let al = b24.alphabet();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let tokens: Vec<_> = (0..len)
                .map(|_| crate::alphabet::Sym(rng.gen_range(0..al.len()) as u16))
                .collect();
            let w = InputString::from_syms(tokens);
            let spaced: Vec<String> =
                w.tokens().iter().map(|&s| al.name(s).to_string()).collect();
            let back = tokenize(al, &spaced.join(" ")).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
