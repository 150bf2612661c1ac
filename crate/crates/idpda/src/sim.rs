//! Execution of automata on input strings: nondeterministic frontier
//! simulation, behavior-relation computation, a relation-based acceptance
//! evaluator, and deterministic runs.
//!
//! The frontier simulation and the relation evaluator are independent
//! implementations of the same acceptance question and cross-check each
//! other throughout the verification suites.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::alphabet::{self, InputString, Sym, SymbolClass};
use crate::automaton::{Didpda, Nidpda, StackSym, State};
use crate::relation::Relation;

/// Default bound on the number of simultaneously tracked configurations.
pub const DEFAULT_CONFIG_CAP: usize = 1_000_000;

/// Errors raised during simulation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("input string is not well-nested")]
    IllNested,
    #[error("input string closes a bracket that was never opened")]
    NotAPrefix,
    #[error(transparent)]
    Alphabet(#[from] alphabet::AlphabetError),
    #[error("configuration frontier exceeded the cap of {cap}")]
    FrontierCap { cap: usize },
    #[error("relation-based evaluation supports at most {max} states, automaton has {n}")]
    StateLimit { n: usize, max: usize },
}

/// The frontier of a nondeterministic computation after some prefix: every
/// reachable `(state, stack contents)` pair.
///
/// Because the input drives the stack, all stacks in one frontier have the
/// same height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigurationSet {
    pub position: usize,
    pub configs: BTreeSet<(State, Vec<StackSym>)>,
}

impl ConfigurationSet {
    /// The shared stack height, or `None` for an empty frontier.
    pub fn uniform_height(&self) -> Option<usize> {
        let mut heights = self.configs.iter().map(|(_, st)| st.len());
        let first = heights.next()?;
        assert!(heights.all(|h| h == first), "frontier stacks have unequal heights");
        Some(first)
    }
}

/// Interned stacks: a stack is a path from the root node 0, so pushes and
/// pops are O(1) and equal stacks share one id.
#[derive(Default)]
pub(crate) struct StackArena {
    nodes: Vec<(u32, StackSym)>,
    ids: HashMap<(u32, StackSym), u32>,
}

impl StackArena {
    pub(crate) const EMPTY: u32 = 0;

    fn new() -> Self {
        StackArena { nodes: vec![(0, StackSym(0))], ids: HashMap::new() }
    }

    fn reset(&mut self) {
        self.nodes.truncate(1);
        self.ids.clear();
    }

    fn push(&mut self, stack: u32, sym: StackSym) -> u32 {
        *self.ids.entry((stack, sym)).or_insert_with(|| {
            self.nodes.push((stack, sym));
            (self.nodes.len() - 1) as u32
        })
    }

    fn top(&self, stack: u32) -> (u32, StackSym) {
        debug_assert_ne!(stack, Self::EMPTY, "pop from empty stack");
        self.nodes[stack as usize]
    }

    fn materialize(&self, mut stack: u32) -> Vec<StackSym> {
        let mut out = Vec::new();
        while stack != Self::EMPTY {
            let (parent, sym) = self.nodes[stack as usize];
            out.push(sym);
            stack = parent;
        }
        out.reverse();
        out
    }
}

type Config = (u32, u32); // (state, interned stack)

/// Nondeterministic frontier simulation with depth snapshots, so a scan can
/// push and pop symbols while walking an enumeration tree.
pub(crate) struct FrontierDfs<'a> {
    a: &'a Nidpda,
    arena: StackArena,
    levels: Vec<Vec<Config>>,
    depth: usize,
    cap: usize,
}

impl<'a> FrontierDfs<'a> {
    pub(crate) fn new(a: &'a Nidpda, cap: usize) -> Self {
        FrontierDfs { a, arena: StackArena::new(), levels: vec![Vec::new()], depth: 0, cap }
    }

    /// Clears interned stacks and restarts from the given states.
    pub(crate) fn reset<I: IntoIterator<Item = State>>(&mut self, starts: I) {
        self.arena.reset();
        self.depth = 0;
        self.levels[0].clear();
        for q in starts {
            self.levels[0].push((q as u32, StackArena::EMPTY));
        }
    }

    /// Extends every configuration by one input symbol.
    pub(crate) fn push_sym(&mut self, sym: Sym) -> Result<(), SimError> {
        if self.levels.len() == self.depth + 1 {
            self.levels.push(Vec::new());
        }
        let (cur, rest) = self.levels.split_at_mut(self.depth + 1);
        let cur = &cur[self.depth];
        let next = &mut rest[0];
        next.clear();
        let a = self.a;
        match a.alphabet().class(sym)? {
            SymbolClass::Neutral => {
                for &(q, st) in cur {
                    for &r in a.neutral_succ(sym, q as State) {
                        next.push((r as u32, st));
                    }
                }
            }
            SymbolClass::Open => {
                for &(q, st) in cur {
                    for &(r, g) in a.open_succ(sym, q as State) {
                        next.push((r as u32, self.arena.push(st, g)));
                    }
                }
            }
            SymbolClass::Close => {
                for &(q, st) in cur {
                    if st == StackArena::EMPTY {
                        return Err(SimError::NotAPrefix);
                    }
                    let (parent, g) = self.arena.top(st);
                    for &r in a.close_succ(sym, q as State, g) {
                        next.push((r as u32, parent));
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.len() > self.cap {
            return Err(SimError::FrontierCap { cap: self.cap });
        }
        self.depth += 1;
        Ok(())
    }

    /// Undoes the most recent `push_sym`.
    pub(crate) fn pop_sym(&mut self) {
        debug_assert!(self.depth > 0);
        self.depth -= 1;
    }

    fn current(&self) -> &[Config] {
        &self.levels[self.depth]
    }

    /// End states among empty-stack configurations.
    pub(crate) fn final_states(&self) -> impl Iterator<Item = State> + '_ {
        self.current()
            .iter()
            .filter(|&&(_, st)| st == StackArena::EMPTY)
            .map(|&(q, _)| q as State)
    }

    /// True iff some empty-stack configuration is in an accepting state.
    pub(crate) fn accepts_now(&self) -> bool {
        self.final_states().any(|q| self.a.is_accepting(q))
    }

    fn snapshot(&self, position: usize) -> ConfigurationSet {
        let configs = self
            .current()
            .iter()
            .map(|&(q, st)| (q as State, self.arena.materialize(st)))
            .collect();
        ConfigurationSet { position, configs }
    }
}

fn require_well_nested(a: &Nidpda, w: &InputString) -> Result<(), SimError> {
    if !alphabet::is_well_nested(a.alphabet(), w)? {
        return Err(SimError::IllNested);
    }
    Ok(())
}

/// True iff some computation from an initial state with an empty stack ends
/// in an accepting state with an empty stack.
pub fn nidpda_accepts(a: &Nidpda, w: &InputString) -> Result<bool, SimError> {
    nidpda_accepts_capped(a, w, DEFAULT_CONFIG_CAP)
}

/// [`nidpda_accepts`] with an explicit frontier cap.
pub fn nidpda_accepts_capped(a: &Nidpda, w: &InputString, cap: usize) -> Result<bool, SimError> {
    require_well_nested(a, w)?;
    let mut dfs = FrontierDfs::new(a, cap);
    dfs.reset(a.initial().iter().copied());
    for &sym in w.tokens() {
        dfs.push_sym(sym)?;
    }
    Ok(dfs.accepts_now())
}

/// Frontier snapshots after every prefix of `w`, including the empty prefix.
pub fn nidpda_frontiers(
    a: &Nidpda,
    w: &InputString,
    cap: usize,
) -> Result<Vec<ConfigurationSet>, SimError> {
    if !alphabet::is_well_nested_prefix(a.alphabet(), w)? {
        return Err(SimError::NotAPrefix);
    }
    let mut dfs = FrontierDfs::new(a, cap);
    dfs.reset(a.initial().iter().copied());
    let mut out = vec![dfs.snapshot(0)];
    for (i, &sym) in w.tokens().iter().enumerate() {
        dfs.push_sym(sym)?;
        out.push(dfs.snapshot(i + 1));
    }
    Ok(out)
}

/// The behavior relation of `a` on a well-nested string: `(i, j)` is in the
/// result iff some computation from state `i` with an empty stack traverses
/// `w` and leaves it in state `j` with an empty stack.
pub fn behavior_relation(a: &Nidpda, w: &InputString) -> Result<Relation, SimError> {
    behavior_relation_capped(a, w, DEFAULT_CONFIG_CAP)
}

/// [`behavior_relation`] with an explicit frontier cap.
pub fn behavior_relation_capped(
    a: &Nidpda,
    w: &InputString,
    cap: usize,
) -> Result<Relation, SimError> {
    require_well_nested(a, w)?;
    let n = a.n_states();
    if n > Relation::MAX_STATES {
        return Err(SimError::StateLimit { n, max: Relation::MAX_STATES });
    }
    let mut rel = Relation::empty(n);
    let mut dfs = FrontierDfs::new(a, cap);
    for i in 0..n {
        dfs.reset([i]);
        let mut ok = true;
        for &sym in w.tokens() {
            dfs.push_sym(sym)?;
            if dfs.current().is_empty() {
                ok = false;
                break;
            }
        }
        if ok {
            for j in dfs.final_states() {
                rel = rel.insert(i, j);
            }
        }
    }
    Ok(rel)
}

/// The transition calculus on behavior relations: one step per input symbol,
/// mirroring how the determinized automaton updates its state.
pub(crate) struct RelationOps<'a> {
    a: &'a Nidpda,
    n: usize,
    neutral_step: HashMap<Sym, Relation>,
    open_restart: HashMap<Sym, Relation>,
}

impl<'a> RelationOps<'a> {
    pub(crate) fn new(a: &'a Nidpda) -> Result<Self, SimError> {
        let n = a.n_states();
        if n > Relation::MAX_STATES {
            return Err(SimError::StateLimit { n, max: Relation::MAX_STATES });
        }
        let mut neutral_step = HashMap::new();
        for sym in a.alphabet().neutral_syms() {
            let mut m = Relation::empty(n);
            for q in 0..n {
                for &r in a.neutral_succ(sym, q) {
                    m = m.insert(q, r);
                }
            }
            neutral_step.insert(sym, m);
        }
        let mut open_restart = HashMap::new();
        for sym in a.alphabet().open_syms() {
            // Diagonal over the bracket's successor states: segments behind
            // the bracket can only begin in one of them.
            let mut d = Relation::empty(n);
            for q in 0..n {
                for &(r, _) in a.open_succ(sym, q) {
                    d = d.insert(r, r);
                }
            }
            open_restart.insert(sym, d);
        }
        Ok(RelationOps { a, n, neutral_step, open_restart })
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// Relation of the empty segment.
    pub(crate) fn initial(&self) -> Relation {
        Relation::diagonal(self.n)
    }

    pub(crate) fn neutral(&self, r: Relation, sym: Sym) -> Relation {
        r.compose(&self.neutral_step[&sym]).expect("same automaton")
    }

    pub(crate) fn open_restart(&self, sym: Sym) -> Relation {
        self.open_restart[&sym]
    }

    /// Relation after a matched bracket pair: the saved outer relation,
    /// then the open transition, the inner relation, and the close
    /// transition on the symbol pushed by that open.
    pub(crate) fn close(
        &self,
        saved: Relation,
        open_sym: Sym,
        inner: Relation,
        close_sym: Sym,
    ) -> Relation {
        let mut through = Relation::empty(self.n);
        for p in 0..self.n {
            for &(r, g) in self.a.open_succ(open_sym, p) {
                let mut row = inner.row(r);
                while row != 0 {
                    let r2 = row.trailing_zeros() as usize;
                    row &= row - 1;
                    for &q in self.a.close_succ(close_sym, r2, g) {
                        through = through.insert(p, q);
                    }
                }
            }
        }
        saved.compose(&through).expect("same automaton")
    }

    /// True iff the relation connects an initial state to an accepting one.
    pub(crate) fn accepting(&self, r: Relation) -> bool {
        self.a
            .initial()
            .iter()
            .any(|&q0| self.a.accepting().iter().any(|&f| r.contains(q0, f)))
    }
}

/// Relation-stack evaluation with depth snapshots, the lazy counterpart of
/// the determinization construction.
pub(crate) struct RelationDfs<'a> {
    ops: RelationOps<'a>,
    cur: Vec<Relation>,
    stack: Vec<(Relation, Sym)>,
    undo: Vec<RelUndo>,
}

enum RelUndo {
    Plain,
    Pushed,
    Popped(Relation, Sym),
}

impl<'a> RelationDfs<'a> {
    pub(crate) fn new(a: &'a Nidpda) -> Result<Self, SimError> {
        let ops = RelationOps::new(a)?;
        let init = ops.initial();
        Ok(RelationDfs { ops, cur: vec![init], stack: Vec::new(), undo: Vec::new() })
    }

    pub(crate) fn push_sym(&mut self, sym: Sym) -> Result<(), SimError> {
        let cur = *self.cur.last().unwrap();
        let (next, undo) = match self.ops.a.alphabet().class(sym)? {
            SymbolClass::Neutral => (self.ops.neutral(cur, sym), RelUndo::Plain),
            SymbolClass::Open => {
                if cur.is_empty() {
                    // The sink never pushes the empty relation; any non-empty
                    // relation rejects just the same.
                    self.stack.push((Relation::full(self.ops.n()), sym));
                    (cur, RelUndo::Pushed)
                } else {
                    self.stack.push((cur, sym));
                    (self.ops.open_restart(sym), RelUndo::Pushed)
                }
            }
            SymbolClass::Close => {
                let (saved, open_sym) = self.stack.pop().ok_or(SimError::NotAPrefix)?;
                (self.ops.close(saved, open_sym, cur, sym), RelUndo::Popped(saved, open_sym))
            }
        };
        self.cur.push(next);
        self.undo.push(undo);
        Ok(())
    }

    pub(crate) fn pop_sym(&mut self) {
        self.cur.pop();
        match self.undo.pop().expect("pop without matching push") {
            RelUndo::Plain => {}
            RelUndo::Pushed => {
                self.stack.pop();
            }
            RelUndo::Popped(saved, open_sym) => self.stack.push((saved, open_sym)),
        }
    }

    pub(crate) fn accepts_now(&self) -> bool {
        self.ops.accepting(*self.cur.last().unwrap())
    }
}

/// Acceptance via the behavior-relation calculus, without materializing the
/// determinized automaton. Agrees with [`nidpda_accepts`] on every input.
pub fn relation_accepts(a: &Nidpda, w: &InputString) -> Result<bool, SimError> {
    require_well_nested(a, w)?;
    let mut dfs = RelationDfs::new(a)?;
    for &sym in w.tokens() {
        dfs.push_sym(sym)?;
    }
    Ok(dfs.accepts_now())
}

/// Deterministic run with depth snapshots.
pub(crate) struct DetDfs<'a> {
    d: &'a Didpda,
    states: Vec<State>,
    stack: Vec<StackSym>,
    undo: Vec<DetUndo>,
}

enum DetUndo {
    Plain,
    Pushed,
    Popped(StackSym),
}

impl<'a> DetDfs<'a> {
    pub(crate) fn new(d: &'a Didpda) -> Self {
        DetDfs { d, states: vec![d.initial()], stack: Vec::new(), undo: Vec::new() }
    }

    pub(crate) fn push_sym(&mut self, sym: Sym) -> Result<(), SimError> {
        let q = *self.states.last().unwrap();
        let (next, undo) = match self.d.alphabet().class(sym)? {
            SymbolClass::Neutral => (self.d.neutral_step(sym, q), DetUndo::Plain),
            SymbolClass::Open => {
                let (r, g) = self.d.open_step(sym, q);
                self.stack.push(g);
                (r, DetUndo::Pushed)
            }
            SymbolClass::Close => {
                let g = self.stack.pop().ok_or(SimError::NotAPrefix)?;
                (self.d.close_step(sym, q, g), DetUndo::Popped(g))
            }
        };
        self.states.push(next);
        self.undo.push(undo);
        Ok(())
    }

    pub(crate) fn pop_sym(&mut self) {
        self.states.pop();
        match self.undo.pop().expect("pop without matching push") {
            DetUndo::Plain => {}
            DetUndo::Pushed => {
                self.stack.pop();
            }
            DetUndo::Popped(g) => self.stack.push(g),
        }
    }

    pub(crate) fn state(&self) -> State {
        *self.states.last().unwrap()
    }

    pub(crate) fn accepts_now(&self) -> bool {
        self.stack.is_empty() && self.d.is_accepting(self.state())
    }
}

/// Runs the unique computation of a deterministic automaton. The input must
/// be a well-nested prefix; the returned stack holds one symbol per
/// unmatched left bracket and is empty for well-nested inputs.
pub fn didpda_run(d: &Didpda, w: &InputString) -> Result<(State, Vec<StackSym>), SimError> {
    if !alphabet::is_well_nested_prefix(d.alphabet(), w)? {
        return Err(SimError::NotAPrefix);
    }
    let mut dfs = DetDfs::new(d);
    for &sym in w.tokens() {
        dfs.push_sym(sym)?;
    }
    Ok((dfs.state(), dfs.stack.clone()))
}

/// Acceptance of a deterministic automaton on a well-nested string.
pub fn didpda_accepts(d: &Didpda, w: &InputString) -> Result<bool, SimError> {
    if !alphabet::is_well_nested(d.alphabet(), w)? {
        return Err(SimError::IllNested);
    }
    let (q, stack) = didpda_run(d, w)?;
    debug_assert!(stack.is_empty());
    Ok(d.is_accepting(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::WellNestedSet;
    use crate::gadget;
    use crate::witness::{build_a, build_b};
    use proptest::prelude::*;

    fn parse(a: &Nidpda, text: &str) -> InputString {
        crate::format::tokenize(a.alphabet(), text).unwrap()
    }

    #[test]
    fn a2_acceptance_examples() {
        let a2 = build_a(2);
        // Empty string: initial state 0 is accepting.
        assert!(nidpda_accepts(&a2, &InputString::default()).unwrap());
        // "<>": the only run pushes 0 in state 0 and dies at the pop.
        assert!(!nidpda_accepts(&a2, &parse(&a2, "<>")).unwrap());
        // "#<>": the hash can branch to state 1, which survives the pair.
        assert!(nidpda_accepts(&a2, &parse(&a2, "#<>")).unwrap());
    }

    #[test]
    fn a2_behavior_relation_examples() {
        let a2 = build_a(2);
        assert_eq!(behavior_relation(&a2, &parse(&a2, "#")).unwrap(), Relation::full(2));
        assert_eq!(
            behavior_relation(&a2, &parse(&a2, "-")).unwrap(),
            Relation::from_pairs(2, [(0, 1), (1, 0)])
        );
        assert_eq!(
            behavior_relation(&a2, &parse(&a2, "<>")).unwrap(),
            Relation::from_pairs(2, [(1, 1)])
        );
    }

    #[test]
    fn relation_accepts_examples() {
        let a2 = build_a(2);
        assert!(relation_accepts(&a2, &parse(&a2, "#<>")).unwrap());
        assert!(!relation_accepts(&a2, &parse(&a2, "<>")).unwrap());
    }

    #[test]
    fn ill_nested_inputs_are_rejected_with_errors() {
        let a2 = build_a(2);
        let w = parse(&a2, "><");
        assert_eq!(nidpda_accepts(&a2, &w).unwrap_err(), SimError::IllNested);
        assert_eq!(relation_accepts(&a2, &w).unwrap_err(), SimError::IllNested);
        assert_eq!(behavior_relation(&a2, &w).unwrap_err(), SimError::IllNested);
    }

    #[test]
    fn frontier_cap_is_a_resource_error() {
        let b2 = build_b(2);
        let w = parse(&b2, "<<<<<<<#>>>>>>>");
        assert_eq!(
            nidpda_accepts_capped(&b2, &w, 10).unwrap_err(),
            SimError::FrontierCap { cap: 10 }
        );
        // The same string is fine under the default cap.
        nidpda_accepts(&b2, &w).unwrap();
    }

    #[test]
    fn frontier_and_relation_paths_agree_exhaustively() {
        let a2 = build_a(2);
        let mut checked = 0u64;
        for len in 0..=8 {
            let set = WellNestedSet::generate(a2.alphabet(), len);
            for tokens in set.iter() {
                let w = InputString::from_syms(tokens.to_vec());
                assert_eq!(
                    nidpda_accepts(&a2, &w).unwrap(),
                    relation_accepts(&a2, &w).unwrap(),
                    "paths disagree on {tokens:?}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 6917);
    }

    #[test]
    fn behavior_relation_composes_over_concatenation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for n in [2usize, 3] {
            let a = build_a(n);
            let mask = (1u64 << (n * n)) - 1;
            for _ in 0..40 {
                let r1 = Relation::from_bits(n, rng.gen::<u64>() & mask);
                let r2 = Relation::from_bits(n, rng.gen::<u64>() & mask);
                let w1 = gadget::gadget_w(&r1, n).unwrap();
                let w2 = gadget::gadget_w(&r2, n).unwrap();
                let joined = InputString::concat([w1.tokens(), w2.tokens()]);
                assert_eq!(
                    behavior_relation(&a, &joined).unwrap(),
                    behavior_relation(&a, w1.tokens())
                        .unwrap()
                        .compose(&behavior_relation(&a, w2.tokens()).unwrap())
                        .unwrap()
                );
            }
        }
    }

    #[test]
    fn didpda_run_examples() {
        let det_a2 = crate::determinize::determinize(&build_a(2)).unwrap();
        let (q, stack) = didpda_run(&det_a2.automaton, &InputString::default()).unwrap();
        assert_eq!(q, det_a2.automaton.initial());
        assert!(stack.is_empty());

        let d = &det_a2.automaton;
        let a2 = build_a(2);
        let (q, _) = didpda_run(d, &parse(&a2, "#")).unwrap();
        assert_eq!(det_a2.state_label[q], Relation::full(2));

        // Two unmatched opens leave two symbols on the stack.
        let det_b2 = crate::determinize::determinize(&build_b(2)).unwrap();
        let (_, stack) = didpda_run(&det_b2.automaton, &parse(&build_b(2), "<#<")).unwrap();
        assert_eq!(stack.len(), 2);
    }

    #[test]
    fn didpda_run_rejects_stray_close() {
        let det_a2 = crate::determinize::determinize(&build_a(2)).unwrap();
        let a2 = build_a(2);
        assert_eq!(
            didpda_run(&det_a2.automaton, &parse(&a2, ">")).unwrap_err(),
            SimError::NotAPrefix
        );
    }

    proptest! {
        /// All stacks in a frontier share the height dictated by the prefix.
        #[test]
        fn frontier_stack_heights_are_uniform(len in 0usize..=10, seed in any::<u64>()) {
            use rand::SeedableRng;
            let b2 = build_b(2);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            if let Some(w) = crate::enumerate::random_well_nested(b2.alphabet(), len, &mut rng) {
                let snaps = nidpda_frontiers(&b2, &w, DEFAULT_CONFIG_CAP).unwrap();
                let mut expected = 0i64;
                for (i, snap) in snaps.iter().enumerate() {
                    if i > 0 {
                        match b2.alphabet().class(w.tokens()[i - 1]).unwrap() {
                            SymbolClass::Open => expected += 1,
                            SymbolClass::Close => expected -= 1,
                            SymbolClass::Neutral => {}
                        }
                    }
                    if let Some(h) = snap.uniform_height() {
                        prop_assert_eq!(h as i64, expected);
                    }
                }
            }
        }
    }
}
