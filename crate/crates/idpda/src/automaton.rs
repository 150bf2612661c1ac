//! Nondeterministic and deterministic input-driven pushdown automata.
//!
//! Transition tables are keyed by `(symbol, state)` for neutral symbols and
//! left brackets and by `(symbol, state, stack symbol)` for right brackets;
//! a missing key means the empty set, i.e. the branch rejects. Deterministic
//! automata must be complete: every key maps to exactly one outcome.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::alphabet::{Alphabet, Sym, SymbolClass};

/// Automaton states are integers `0..n_states`.
pub type State = usize;

/// Index of a stack symbol in the automaton's stack alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackSym(pub u16);

/// Transition table of a nondeterministic automaton.
pub type NeutralTable = BTreeMap<(Sym, State), BTreeSet<State>>;
/// Left-bracket table: target state plus pushed stack symbol.
pub type OpenTable = BTreeMap<(Sym, State), BTreeSet<(State, StackSym)>>;
/// Right-bracket table, keyed additionally by the popped stack symbol.
pub type CloseTable = BTreeMap<(Sym, State, StackSym), BTreeSet<State>>;

/// All invariant violations found while validating an automaton.
#[derive(Debug, Error, PartialEq, Eq)]
pub struct ValidationError {
    pub issues: Vec<String>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation issue(s):", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

/// Flattened successor lists for fast simulation. Derived data only; never
/// part of structural equality.
#[derive(Clone, Debug, Default)]
struct DenseTables {
    // Indexed by sym.0 * n_states + state.
    neutral: Vec<Vec<State>>,
    open: Vec<Vec<(State, StackSym)>>,
    // Indexed by (sym.0 * n_states + state) * n_stack + stack_sym.
    close: Vec<Vec<State>>,
}

fn validate_stack_names(stack_names: &[String], issues: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for name in stack_names {
        if name.is_empty() {
            issues.push("stack symbol name may not be empty".into());
        }
        if name.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ',') {
            issues.push(format!("stack symbol name {name:?} contains a reserved character"));
        }
        if !seen.insert(name) {
            issues.push(format!("duplicate stack symbol name {name:?}"));
        }
    }
}

/// A nondeterministic input-driven pushdown automaton.
#[derive(Clone, Debug)]
pub struct Nidpda {
    alphabet: Alphabet,
    n_states: usize,
    stack_names: Vec<String>,
    initial: BTreeSet<State>,
    accepting: BTreeSet<State>,
    neutral: NeutralTable,
    open: OpenTable,
    close: CloseTable,
    dense: DenseTables,
}

impl PartialEq for Nidpda {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.n_states == other.n_states
            && self.stack_names == other.stack_names
            && self.initial == other.initial
            && self.accepting == other.accepting
            && self.neutral == other.neutral
            && self.open == other.open
            && self.close == other.close
    }
}

impl Eq for Nidpda {}

impl Nidpda {
    /// Validates the parts and assembles an automaton.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alphabet: Alphabet,
        n_states: usize,
        stack_names: Vec<String>,
        initial: BTreeSet<State>,
        accepting: BTreeSet<State>,
        neutral: NeutralTable,
        open: OpenTable,
        close: CloseTable,
    ) -> Result<Nidpda, ValidationError> {
        let issues = validate_parts(
            &alphabet,
            n_states,
            &stack_names,
            &initial,
            &accepting,
            &neutral,
            &open,
            &close,
        );
        if !issues.is_empty() {
            return Err(ValidationError { issues });
        }
        let dense = build_dense(&alphabet, n_states, stack_names.len(), &neutral, &open, &close);
        Ok(Nidpda {
            alphabet,
            n_states,
            stack_names,
            initial,
            accepting,
            neutral,
            open,
            close,
            dense,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn stack_names(&self) -> &[String] {
        &self.stack_names
    }

    /// Looks a stack symbol up by name.
    pub fn stack_sym(&self, name: &str) -> Option<StackSym> {
        self.stack_names.iter().position(|n| n == name).map(|i| StackSym(i as u16))
    }

    pub fn stack_name(&self, s: StackSym) -> &str {
        &self.stack_names[s.0 as usize]
    }

    pub fn initial(&self) -> &BTreeSet<State> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<State> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: State) -> bool {
        self.accepting.contains(&q)
    }

    /// Successors for a neutral symbol; empty slice means reject.
    pub fn neutral_succ(&self, sym: Sym, q: State) -> &[State] {
        &self.dense.neutral[sym.0 as usize * self.n_states + q]
    }

    /// Successor pairs `(state, pushed symbol)` for a left bracket.
    pub fn open_succ(&self, sym: Sym, q: State) -> &[(State, StackSym)] {
        &self.dense.open[sym.0 as usize * self.n_states + q]
    }

    /// Successors for a right bracket with the given popped symbol.
    pub fn close_succ(&self, sym: Sym, q: State, s: StackSym) -> &[State] {
        let idx = (sym.0 as usize * self.n_states + q) * self.stack_names.len() + s.0 as usize;
        &self.dense.close[idx]
    }

    /// Raw neutral table, for serialization.
    pub fn neutral_table(&self) -> &NeutralTable {
        &self.neutral
    }

    pub fn open_table(&self) -> &OpenTable {
        &self.open
    }

    pub fn close_table(&self) -> &CloseTable {
        &self.close
    }
}

#[allow(clippy::too_many_arguments)]
fn validate_parts(
    alphabet: &Alphabet,
    n_states: usize,
    stack_names: &[String],
    initial: &BTreeSet<State>,
    accepting: &BTreeSet<State>,
    neutral: &NeutralTable,
    open: &OpenTable,
    close: &CloseTable,
) -> Vec<String> {
    let mut issues = Vec::new();
    if n_states == 0 {
        issues.push("automaton must have at least one state".into());
    }
    validate_stack_names(stack_names, &mut issues);
    let check_state = |q: State, at: &str, issues: &mut Vec<String>| {
        if q >= n_states {
            issues.push(format!("{at}: state {q} out of range (states: {n_states})"));
        }
    };
    for &q in initial {
        check_state(q, "initial set", &mut issues);
    }
    for &q in accepting {
        check_state(q, "accepting set", &mut issues);
    }
    let check_sym = |sym: Sym, want: SymbolClass, at: &str, issues: &mut Vec<String>| {
        match alphabet.class(sym) {
            Ok(c) if c == want => {}
            Ok(c) => issues.push(format!("{at}: symbol {:?} has class {c:?}, expected {want:?}", alphabet.name(sym))),
            Err(_) => issues.push(format!("{at}: symbol index {} not in alphabet", sym.0)),
        }
    };
    let check_stack = |s: StackSym, at: &str, issues: &mut Vec<String>| {
        if s.0 as usize >= stack_names.len() {
            issues.push(format!("{at}: stack symbol index {} not declared", s.0));
        }
    };
    for (&(sym, q), succs) in neutral {
        let at = format!("neutral transition ({}, {q})", sym.0);
        check_sym(sym, SymbolClass::Neutral, &at, &mut issues);
        check_state(q, &at, &mut issues);
        for &r in succs {
            check_state(r, &at, &mut issues);
        }
    }
    for (&(sym, q), succs) in open {
        let at = format!("open transition ({}, {q})", sym.0);
        check_sym(sym, SymbolClass::Open, &at, &mut issues);
        check_state(q, &at, &mut issues);
        for &(r, s) in succs {
            check_state(r, &at, &mut issues);
            check_stack(s, &at, &mut issues);
        }
    }
    for (&(sym, q, s), succs) in close {
        let at = format!("close transition ({}, {q}, {})", sym.0, s.0);
        check_sym(sym, SymbolClass::Close, &at, &mut issues);
        check_state(q, &at, &mut issues);
        check_stack(s, &at, &mut issues);
        for &r in succs {
            check_state(r, &at, &mut issues);
        }
    }
    issues
}

fn build_dense(
    alphabet: &Alphabet,
    n_states: usize,
    n_stack: usize,
    neutral: &NeutralTable,
    open: &OpenTable,
    close: &CloseTable,
) -> DenseTables {
    let n_syms = alphabet.len();
    let mut dense = DenseTables {
        neutral: vec![Vec::new(); n_syms * n_states],
        open: vec![Vec::new(); n_syms * n_states],
        close: vec![Vec::new(); n_syms * n_states * n_stack],
    };
    for (&(sym, q), succs) in neutral {
        dense.neutral[sym.0 as usize * n_states + q] = succs.iter().copied().collect();
    }
    for (&(sym, q), succs) in open {
        dense.open[sym.0 as usize * n_states + q] = succs.iter().copied().collect();
    }
    for (&(sym, q, s), succs) in close {
        let idx = (sym.0 as usize * n_states + q) * n_stack + s.0 as usize;
        dense.close[idx] = succs.iter().copied().collect();
    }
    dense
}

/// A deterministic input-driven pushdown automaton: unique initial state and
/// exactly one outcome for every symbol, state and (for closes) stack symbol.
#[derive(Clone, Debug)]
pub struct Didpda {
    alphabet: Alphabet,
    n_states: usize,
    stack_names: Vec<String>,
    initial: State,
    accepting: BTreeSet<State>,
    neutral: BTreeMap<(Sym, State), State>,
    open: BTreeMap<(Sym, State), (State, StackSym)>,
    close: BTreeMap<(Sym, State, StackSym), State>,
    // Dense copies, usize::MAX-free by completeness.
    neutral_dense: Vec<State>,
    open_dense: Vec<(State, StackSym)>,
    close_dense: Vec<State>,
}

impl PartialEq for Didpda {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.n_states == other.n_states
            && self.stack_names == other.stack_names
            && self.initial == other.initial
            && self.accepting == other.accepting
            && self.neutral == other.neutral
            && self.open == other.open
            && self.close == other.close
    }
}

impl Eq for Didpda {}

impl Didpda {
    /// Validates ranges and completeness and assembles the automaton.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alphabet: Alphabet,
        n_states: usize,
        stack_names: Vec<String>,
        initial: State,
        accepting: BTreeSet<State>,
        neutral: BTreeMap<(Sym, State), State>,
        open: BTreeMap<(Sym, State), (State, StackSym)>,
        close: BTreeMap<(Sym, State, StackSym), State>,
    ) -> Result<Didpda, ValidationError> {
        let mut issues = Vec::new();
        if n_states == 0 {
            issues.push("automaton must have at least one state".into());
        }
        validate_stack_names(&stack_names, &mut issues);
        if initial >= n_states {
            issues.push(format!("initial state {initial} out of range (states: {n_states})"));
        }
        for &q in &accepting {
            if q >= n_states {
                issues.push(format!("accepting set: state {q} out of range"));
            }
        }
        let n_stack = stack_names.len();
        for (sym, name, class) in alphabet.iter() {
            for q in 0..n_states {
                match class {
                    SymbolClass::Neutral => match neutral.get(&(sym, q)) {
                        None => issues.push(format!("missing neutral transition ({name}, {q})")),
                        Some(&r) if r >= n_states => {
                            issues.push(format!("neutral transition ({name}, {q}): target {r} out of range"))
                        }
                        _ => {}
                    },
                    SymbolClass::Open => match open.get(&(sym, q)) {
                        None => issues.push(format!("missing open transition ({name}, {q})")),
                        Some(&(r, s)) => {
                            if r >= n_states {
                                issues.push(format!("open transition ({name}, {q}): target {r} out of range"));
                            }
                            if s.0 as usize >= n_stack {
                                issues.push(format!("open transition ({name}, {q}): stack symbol {} not declared", s.0));
                            }
                        }
                    },
                    SymbolClass::Close => {
                        for g in 0..n_stack {
                            match close.get(&(sym, q, StackSym(g as u16))) {
                                None => issues.push(format!(
                                    "missing close transition ({name}, {q}, {})",
                                    stack_names[g]
                                )),
                                Some(&r) if r >= n_states => issues.push(format!(
                                    "close transition ({name}, {q}, {}): target {r} out of range",
                                    stack_names[g]
                                )),
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
        for &(sym, _) in neutral.keys() {
            if alphabet.class(sym) != Ok(SymbolClass::Neutral) {
                issues.push(format!("neutral table keyed by non-neutral symbol index {}", sym.0));
            }
        }
        for &(sym, _) in open.keys() {
            if alphabet.class(sym) != Ok(SymbolClass::Open) {
                issues.push(format!("open table keyed by non-open symbol index {}", sym.0));
            }
        }
        for &(sym, _, _) in close.keys() {
            if alphabet.class(sym) != Ok(SymbolClass::Close) {
                issues.push(format!("close table keyed by non-close symbol index {}", sym.0));
            }
        }
        if !issues.is_empty() {
            return Err(ValidationError { issues });
        }

        let n_syms = alphabet.len();
        let mut neutral_dense = vec![0; n_syms * n_states];
        let mut open_dense = vec![(0, StackSym(0)); n_syms * n_states];
        let mut close_dense = vec![0; n_syms * n_states * n_stack];
        for (&(sym, q), &r) in &neutral {
            neutral_dense[sym.0 as usize * n_states + q] = r;
        }
        for (&(sym, q), &t) in &open {
            open_dense[sym.0 as usize * n_states + q] = t;
        }
        for (&(sym, q, s), &r) in &close {
            close_dense[(sym.0 as usize * n_states + q) * n_stack + s.0 as usize] = r;
        }
        Ok(Didpda {
            alphabet,
            n_states,
            stack_names,
            initial,
            accepting,
            neutral,
            open,
            close,
            neutral_dense,
            open_dense,
            close_dense,
        })
    }

    /// Checks that a nondeterministic automaton is in fact deterministic and
    /// complete, and converts it.
    pub fn from_nidpda(a: &Nidpda) -> Result<Didpda, ValidationError> {
        let mut issues = Vec::new();
        if a.initial().len() != 1 {
            issues.push(format!("expected exactly one initial state, found {}", a.initial().len()));
        }
        let mut neutral = BTreeMap::new();
        let mut open = BTreeMap::new();
        let mut close = BTreeMap::new();
        for (sym, name, class) in a.alphabet().iter() {
            for q in 0..a.n_states() {
                match class {
                    SymbolClass::Neutral => {
                        let succs = a.neutral_succ(sym, q);
                        if succs.len() != 1 {
                            issues.push(format!(
                                "neutral transition ({name}, {q}) has {} outcomes, expected 1",
                                succs.len()
                            ));
                        } else {
                            neutral.insert((sym, q), succs[0]);
                        }
                    }
                    SymbolClass::Open => {
                        let succs = a.open_succ(sym, q);
                        if succs.len() != 1 {
                            issues.push(format!(
                                "open transition ({name}, {q}) has {} outcomes, expected 1",
                                succs.len()
                            ));
                        } else {
                            open.insert((sym, q), succs[0]);
                        }
                    }
                    SymbolClass::Close => {
                        for g in 0..a.stack_names().len() {
                            let s = StackSym(g as u16);
                            let succs = a.close_succ(sym, q, s);
                            if succs.len() != 1 {
                                issues.push(format!(
                                    "close transition ({name}, {q}, {}) has {} outcomes, expected 1",
                                    a.stack_name(s),
                                    succs.len()
                                ));
                            } else {
                                close.insert((sym, q, s), succs[0]);
                            }
                        }
                    }
                }
            }
        }
        if !issues.is_empty() {
            return Err(ValidationError { issues });
        }
        Didpda::new(
            a.alphabet().clone(),
            a.n_states(),
            a.stack_names().to_vec(),
            *a.initial().iter().next().unwrap(),
            a.accepting().clone(),
            neutral,
            open,
            close,
        )
    }

    /// Widens every outcome to a singleton set.
    pub fn to_nidpda(&self) -> Nidpda {
        let neutral = self
            .neutral
            .iter()
            .map(|(&k, &r)| (k, BTreeSet::from([r])))
            .collect();
        let open = self
            .open
            .iter()
            .map(|(&k, &t)| (k, BTreeSet::from([t])))
            .collect();
        let close = self
            .close
            .iter()
            .map(|(&k, &r)| (k, BTreeSet::from([r])))
            .collect();
        Nidpda::new(
            self.alphabet.clone(),
            self.n_states,
            self.stack_names.clone(),
            BTreeSet::from([self.initial]),
            self.accepting.clone(),
            neutral,
            open,
            close,
        )
        .expect("widened deterministic automaton is a valid NIDPDA")
    }

    /// Same automaton with a different accepting set.
    pub fn with_accepting(&self, accepting: BTreeSet<State>) -> Result<Didpda, ValidationError> {
        Didpda::new(
            self.alphabet.clone(),
            self.n_states,
            self.stack_names.clone(),
            self.initial,
            accepting,
            self.neutral.clone(),
            self.open.clone(),
            self.close.clone(),
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn stack_names(&self) -> &[String] {
        &self.stack_names
    }

    pub fn stack_name(&self, s: StackSym) -> &str {
        &self.stack_names[s.0 as usize]
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<State> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: State) -> bool {
        self.accepting.contains(&q)
    }

    /// The unique neutral successor.
    pub fn neutral_step(&self, sym: Sym, q: State) -> State {
        self.neutral_dense[sym.0 as usize * self.n_states + q]
    }

    /// The unique open successor with its pushed symbol.
    pub fn open_step(&self, sym: Sym, q: State) -> (State, StackSym) {
        self.open_dense[sym.0 as usize * self.n_states + q]
    }

    /// The unique close successor for a popped symbol.
    pub fn close_step(&self, sym: Sym, q: State, s: StackSym) -> State {
        self.close_dense[(sym.0 as usize * self.n_states + q) * self.stack_names.len() + s.0 as usize]
    }
}
