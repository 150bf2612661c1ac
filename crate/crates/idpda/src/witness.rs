//! Generators for the witness automaton families `A_n`, `B_n`, `B_{n,s}`
//! and the one-state bracket-matching automaton `B_{1,2}`.
//!
//! All four are hard cases for determinization: any equivalent deterministic
//! automaton needs `2^(n^2)` states, and for the `B` families additionally
//! `s * (2^(n^2) - 1)` stack symbols for `s` left brackets.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::alphabet::{Alphabet, Sym};
use crate::automaton::{CloseTable, Nidpda, NeutralTable, OpenTable, StackSym, State};
use crate::relation::Relation;

/// Parameter errors for the witness builders.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("state count n={n} outside 1..={max}", max = Relation::MAX_STATES)]
    BadStateCount { n: usize },
    #[error("left bracket count s={s} outside 1..={max} for n={n}")]
    BadBracketCount { n: usize, s: usize, max: u128 },
}

/// Parameters shared by the witness builders: the state count `n` and, for
/// the multi-bracket family, the left-bracket count `s <= 2^(n^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessParams {
    pub n: usize,
    pub s: usize,
}

impl WitnessParams {
    pub fn new(n: usize, s: usize) -> Result<Self, WitnessError> {
        if n < 1 || n > Relation::MAX_STATES {
            return Err(WitnessError::BadStateCount { n });
        }
        let max = 1u128 << (n * n);
        // Sym is 16 bits wide, which caps the alphabet size in practice.
        let max = max.min(u16::MAX as u128 - 5);
        if s < 1 || s as u128 > max {
            return Err(WitnessError::BadBracketCount { n, s, max });
        }
        Ok(WitnessParams { n, s })
    }
}

fn sgn_sym(q: State) -> StackSym {
    // Stack symbol "0" has index 0 and "1" index 1 in every family here.
    StackSym(if q == 0 { 0 } else { 1 })
}

fn insert_neutral(t: &mut NeutralTable, sym: Sym, q: State, succs: impl IntoIterator<Item = State>) {
    t.insert((sym, q), succs.into_iter().collect());
}

/// Builds `A_n`: alphabet `{-, #, <, >}`, stack alphabet `{0, 1}`,
/// initial state 0, all states accepting.
///
/// `#` moves from every state to every state; `-` decrements the state
/// modulo `n`; `<` keeps the state and pushes 0 in state 0 and 1 otherwise;
/// `>` keeps the state except that popping 0 in state 0 rejects.
pub fn build_a(n: usize) -> Nidpda {
    assert!(n >= 1, "A_n needs at least one state");
    let alphabet = Alphabet::new(&["-", "#"], &["<"], &[">"]).unwrap();
    let dash = alphabet.sym("-").unwrap();
    let hash = alphabet.sym("#").unwrap();
    let open = alphabet.sym("<").unwrap();
    let close = alphabet.sym(">").unwrap();

    let mut neutral = NeutralTable::new();
    let mut open_t = OpenTable::new();
    let mut close_t = CloseTable::new();
    for q in 0..n {
        insert_neutral(&mut neutral, dash, q, [(q + n - 1) % n]);
        insert_neutral(&mut neutral, hash, q, 0..n);
        open_t.insert((open, q), BTreeSet::from([(q, sgn_sym(q))]));
        for g in 0..2u16 {
            if (q, g) != (0, 0) {
                close_t.insert((close, q, StackSym(g)), BTreeSet::from([q]));
            }
        }
    }
    Nidpda::new(
        alphabet,
        n,
        vec!["0".into(), "1".into()],
        BTreeSet::from([0]),
        (0..n).collect(),
        neutral,
        open_t,
        close_t,
    )
    .expect("A_n construction is valid")
}

/// Stack alphabet of `B_n` / `B_{n,s}`: `0`, `1`, then `h0..h(n-1)` for the
/// saved old state and `r0..r(n-1)` for the announced new state.
fn b_stack_names(n: usize) -> Vec<String> {
    let mut names = vec!["0".to_string(), "1".to_string()];
    names.extend((0..n).map(|i| format!("h{i}")));
    names.extend((0..n).map(|i| format!("r{i}")));
    names
}

fn h_sym(n: usize, i: State) -> StackSym {
    let _ = n;
    StackSym(2 + i as u16)
}

fn r_sym(n: usize, i: State) -> StackSym {
    StackSym(2 + n as u16 + i as u16)
}

/// The open-bracket options of `B_n` from state `q`: keep the state and push
/// its sign, or jump to any state `j` while pushing either the old state as
/// `h{q}` or the new state as `r{j}`.
fn b_open_options(n: usize, q: State) -> BTreeSet<(State, StackSym)> {
    let mut succs = BTreeSet::from([(q, sgn_sym(q))]);
    for j in 0..n {
        succs.insert((j, h_sym(n, q)));
        succs.insert((j, r_sym(n, j)));
    }
    succs
}

/// Builds `B_n`: `A_n` plus a double right bracket `>>` and `2n` extra stack
/// symbols. `>>` pops `h{i}` only in state 0 (moving to `i`) and `r{j}` only
/// in state 1 (moving to `j`); popping `0`/`1` at `>>`, or an extra symbol
/// at `>`, rejects.
pub fn build_b(n: usize) -> Nidpda {
    assert!(n >= 1, "B_n needs at least one state");
    let alphabet = Alphabet::new(&["-", "#"], &["<"], &[">", ">>"]).unwrap();
    let dash = alphabet.sym("-").unwrap();
    let hash = alphabet.sym("#").unwrap();
    let open = alphabet.sym("<").unwrap();
    let close = alphabet.sym(">").unwrap();
    let dbl = alphabet.sym(">>").unwrap();

    let mut neutral = NeutralTable::new();
    let mut open_t = OpenTable::new();
    let mut close_t = CloseTable::new();
    for q in 0..n {
        insert_neutral(&mut neutral, dash, q, [(q + n - 1) % n]);
        insert_neutral(&mut neutral, hash, q, 0..n);
        open_t.insert((open, q), b_open_options(n, q));
        for g in 0..2u16 {
            if (q, g) != (0, 0) {
                close_t.insert((close, q, StackSym(g)), BTreeSet::from([q]));
            }
        }
    }
    for i in 0..n {
        close_t.insert((dbl, 0, h_sym(n, i)), BTreeSet::from([i]));
        if n >= 2 {
            close_t.insert((dbl, 1, r_sym(n, i)), BTreeSet::from([i]));
        }
    }
    Nidpda::new(
        alphabet,
        n,
        b_stack_names(n),
        BTreeSet::from([0]),
        (0..n).collect(),
        neutral,
        open_t,
        close_t,
    )
    .expect("B_n construction is valid")
}

/// Number of bits used to index the left brackets of `B_{n,s}` for `s >= 2`.
pub fn bracket_bit_count(s: usize) -> usize {
    assert!(s >= 2);
    ((s - 1) as u64).ilog2() as usize + 1
}

/// Builds `B_{n,s}` with `s` indexed left brackets `<0 .. <{s-1}`, right
/// brackets `>`, `>>`, `>>>` and stack symbols of `B_n` plus bit markers
/// `c0 .. c{floor(log2(s-1))}`.
///
/// Every left bracket `<l` has all open options of `B_n` and can also jump
/// to any state while pushing `c{x}` for each set bit `x` of `l`. The triple
/// bracket pops `c{x}` only when moving from state `x mod n` to `x / n`.
///
/// Degenerate parameters delegate: `s = 1` yields [`build_b`] and
/// `n = 1, s = 2` yields [`build_b12`].
pub fn build_bns(n: usize, s: usize) -> Result<Nidpda, WitnessError> {
    WitnessParams::new(n, s)?;
    if s == 1 {
        return Ok(build_b(n));
    }
    if n == 1 {
        // s <= 2^(n^2) leaves only s = 2 here.
        return Ok(build_b12());
    }

    let bits = bracket_bit_count(s);
    let open_names: Vec<String> = (0..s).map(|l| format!("<{l}")).collect();
    let alphabet = Alphabet::new(
        &["-", "#"],
        &open_names.iter().map(String::as_str).collect::<Vec<_>>(),
        &[">", ">>", ">>>"],
    )
    .unwrap();
    let dash = alphabet.sym("-").unwrap();
    let hash = alphabet.sym("#").unwrap();
    let close = alphabet.sym(">").unwrap();
    let dbl = alphabet.sym(">>").unwrap();
    let trp = alphabet.sym(">>>").unwrap();

    let mut stack_names = b_stack_names(n);
    let c_base = stack_names.len() as u16;
    stack_names.extend((0..bits).map(|x| format!("c{x}")));
    let c_sym = |x: usize| StackSym(c_base + x as u16);

    let mut neutral = NeutralTable::new();
    let mut open_t = OpenTable::new();
    let mut close_t = CloseTable::new();
    for q in 0..n {
        insert_neutral(&mut neutral, dash, q, [(q + n - 1) % n]);
        insert_neutral(&mut neutral, hash, q, 0..n);
        for (l, name) in open_names.iter().enumerate() {
            let sym = alphabet.sym(name).unwrap();
            let mut succs = b_open_options(n, q);
            for x in 0..bits {
                if l >> x & 1 == 1 {
                    for r in 0..n {
                        succs.insert((r, c_sym(x)));
                    }
                }
            }
            open_t.insert((sym, q), succs);
        }
        for g in 0..2u16 {
            if (q, g) != (0, 0) {
                close_t.insert((close, q, StackSym(g)), BTreeSet::from([q]));
            }
        }
    }
    for i in 0..n {
        close_t.insert((dbl, 0, h_sym(n, i)), BTreeSet::from([i]));
        close_t.insert((dbl, 1, r_sym(n, i)), BTreeSet::from([i]));
    }
    for x in 0..bits {
        // x <= n^2 - 1 because s <= 2^(n^2), so x / n is a valid state.
        close_t.insert((trp, x % n, c_sym(x)), BTreeSet::from([x / n]));
    }
    Ok(Nidpda::new(
        alphabet,
        n,
        stack_names,
        BTreeSet::from([0]),
        (0..n).collect(),
        neutral,
        open_t,
        close_t,
    )
    .expect("B_{n,s} construction is valid"))
}

/// Builds the one-state automaton `B_{1,2}` over `{<, <<, >, >>}` with no
/// neutral symbols. `<` pushes 0 and `<<` pushes 1; `>` pops only 0 and
/// `>>` pops only 1, so a string is accepted iff every bracket is closed by
/// the matching bracket type.
pub fn build_b12() -> Nidpda {
    let alphabet = Alphabet::new::<&str>(&[], &["<", "<<"], &[">", ">>"]).unwrap();
    let open1 = alphabet.sym("<").unwrap();
    let open2 = alphabet.sym("<<").unwrap();
    let close1 = alphabet.sym(">").unwrap();
    let close2 = alphabet.sym(">>").unwrap();

    let mut open_t = OpenTable::new();
    open_t.insert((open1, 0), BTreeSet::from([(0, StackSym(0))]));
    open_t.insert((open2, 0), BTreeSet::from([(0, StackSym(1))]));
    let mut close_t = CloseTable::new();
    close_t.insert((close1, 0, StackSym(0)), BTreeSet::from([0]));
    close_t.insert((close2, 0, StackSym(1)), BTreeSet::from([0]));
    Nidpda::new(
        alphabet,
        1,
        vec!["0".into(), "1".into()],
        BTreeSet::from([0]),
        BTreeSet::from([0]),
        NeutralTable::new(),
        open_t,
        close_t,
    )
    .expect("B_{1,2} construction is valid")
}
