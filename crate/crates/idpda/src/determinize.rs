//! Determinization of input-driven pushdown automata.
//!
//! The deterministic automaton tracks the behavior relation of the current
//! well-nested segment. A left bracket pushes the pair (current relation,
//! bracket) and restarts the segment; the matching right bracket pops the
//! pair and stitches the outer relation, the bracket transitions and the
//! inner relation back together. The empty relation is an absorbing
//! rejecting state whose open transitions push a canonical non-empty
//! relation instead, so no stack symbol ever carries the empty relation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::alphabet::Sym;
use crate::automaton::{Didpda, Nidpda, StackSym, State};
use crate::relation::Relation;
use crate::sim::RelationOps;

/// Errors from the determinization construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeterminizeError {
    #[error("determinization supports at most {max} states, automaton has {n}")]
    StateLimit { n: usize, max: usize },
}

/// A determinized automaton together with the labels that explain it: every
/// state is a behavior relation and every stack symbol is a (relation,
/// bracket) pair.
#[derive(Clone, Debug)]
pub struct DeterminizationResult {
    pub automaton: Didpda,
    /// Relation of each determinized state; injective by construction.
    pub state_label: Vec<Relation>,
    /// Label of each determinized stack symbol; no relation here is empty.
    pub pushed_symbol_label: Vec<(Relation, Sym)>,
}

/// Builds the deterministic automaton for the language of `a`, constructing
/// only states reachable from the relation of the empty segment.
pub fn determinize(a: &Nidpda) -> Result<DeterminizationResult, DeterminizeError> {
    let ops = RelationOps::new(a).map_err(|_| DeterminizeError::StateLimit {
        n: a.n_states(),
        max: Relation::MAX_STATES,
    })?;
    let alphabet = a.alphabet().clone();
    let neutral_syms = alphabet.neutral_syms();
    let open_syms = alphabet.open_syms();
    let close_syms = alphabet.close_syms();

    let mut state_label: Vec<Relation> = Vec::new();
    let mut state_of: HashMap<u64, State> = HashMap::new();
    let mut symbol_label: Vec<(Relation, Sym)> = Vec::new();
    let mut symbol_of: HashMap<(u64, Sym), StackSym> = HashMap::new();

    let mut neutral = BTreeMap::new();
    let mut open = BTreeMap::new();
    let mut close = BTreeMap::new();

    let mut pending_states: VecDeque<State> = VecDeque::new();
    // Close transitions are filled per (state, stack symbol); new states and
    // new symbols both enqueue the missing combinations.
    let mut pending_pairs: VecDeque<(State, StackSym)> = VecDeque::new();

    let mut intern_state =
        |r: Relation, pending: &mut VecDeque<State>, labels: &mut Vec<Relation>| -> State {
            *state_of.entry(r.bits()).or_insert_with(|| {
                labels.push(r);
                pending.push_back(labels.len() - 1);
                labels.len() - 1
            })
        };

    let initial = intern_state(ops.initial(), &mut pending_states, &mut state_label);

    while let Some(q) = pending_states.pop_front() {
        let r = state_label[q];
        for &sym in &neutral_syms {
            let t = intern_state(ops.neutral(r, sym), &mut pending_states, &mut state_label);
            neutral.insert((sym, q), t);
        }
        for &sym in &open_syms {
            let (pushed_rel, target_rel) = if r.is_empty() {
                // Rejecting sink: stay put and push any non-empty relation.
                (Relation::full(ops.n()), r)
            } else {
                (r, ops.open_restart(sym))
            };
            let g = *symbol_of.entry((pushed_rel.bits(), sym)).or_insert_with(|| {
                symbol_label.push((pushed_rel, sym));
                let g = StackSym((symbol_label.len() - 1) as u16);
                for p in 0..state_label.len() {
                    pending_pairs.push_back((p, g));
                }
                g
            });
            let t = intern_state(target_rel, &mut pending_states, &mut state_label);
            open.insert((sym, q), (t, g));
        }
        for g in 0..symbol_label.len() {
            pending_pairs.push_back((q, StackSym(g as u16)));
        }
        while let Some((p, g)) = pending_pairs.pop_front() {
            let (saved, open_sym) = symbol_label[g.0 as usize];
            let inner = state_label[p];
            for &sym in &close_syms {
                if close.contains_key(&(sym, p, g)) {
                    continue;
                }
                let t = intern_state(
                    ops.close(saved, open_sym, inner, sym),
                    &mut pending_states,
                    &mut state_label,
                );
                close.insert((sym, p, g), t);
            }
        }
    }

    let accepting: BTreeSet<State> = state_label
        .iter()
        .enumerate()
        .filter(|(_, r)| ops.accepting(**r))
        .map(|(q, _)| q)
        .collect();
    debug_assert!(symbol_label.iter().all(|(r, _)| !r.is_empty()));

    let stack_names = (0..symbol_label.len()).map(|i| format!("g{i}")).collect();
    let automaton = Didpda::new(
        alphabet,
        state_label.len(),
        stack_names,
        initial,
        accepting,
        neutral,
        open,
        close,
    )
    .expect("determinization output is complete and in range");
    Ok(DeterminizationResult { automaton, state_label, pushed_symbol_label: symbol_label })
}

/// A square bit matrix over determinized states.
#[derive(Clone, Debug)]
pub struct SummaryMatrix {
    size: usize,
    words: usize,
    bits: Vec<u64>,
}

impl SummaryMatrix {
    fn identity(size: usize) -> Self {
        let words = size.div_ceil(64).max(1);
        let mut m = SummaryMatrix { size, words, bits: vec![0; size * words] };
        for i in 0..size {
            m.set(i, i);
        }
        m
    }

    fn set(&mut self, p: usize, q: usize) {
        self.bits[p * self.words + q / 64] |= 1u64 << (q % 64);
    }

    /// True iff some well-nested string leads from `p` to `q`.
    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.bits[p * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn row(&self, p: usize) -> &[u64] {
        &self.bits[p * self.words..(p + 1) * self.words]
    }

    fn or_row_into(&mut self, src: usize, dst: usize) -> bool {
        let mut changed = false;
        for w in 0..self.words {
            let v = self.bits[src * self.words + w];
            let d = &mut self.bits[dst * self.words + w];
            if *d | v != *d {
                *d |= v;
                changed = true;
            }
        }
        changed
    }

    /// States reachable from `p`.
    pub fn successors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(p).iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Reachability facts about a deterministic automaton: which states some
/// well-nested prefix can reach, the relation "a well-nested string leads
/// from p to q", and which stack symbols a reachable open transition pushes.
#[derive(Clone, Debug)]
pub struct ReachabilitySummary {
    pub surface_states: BTreeSet<State>,
    pub summary: SummaryMatrix,
    pub pushed: BTreeSet<StackSym>,
}

/// Least-fixpoint reachability: the summary closes under neutral moves and
/// matched bracket excursions, and the surface set closes under summary
/// moves and descents through unmatched left brackets.
pub fn summarize(d: &Didpda) -> ReachabilitySummary {
    let n = d.n_states();
    let alphabet = d.alphabet();
    let neutral_syms = alphabet.neutral_syms();
    let open_syms = alphabet.open_syms();
    let close_syms = alphabet.close_syms();

    let mut summary = SummaryMatrix::identity(n);
    // Single-step edges under the current summary, rebuilt until stable.
    loop {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for q in 0..n {
            for &sym in &neutral_syms {
                edges.push((q, d.neutral_step(sym, q)));
            }
            for &osym in &open_syms {
                let (r, g) = d.open_step(osym, q);
                for r2 in summary.successors(r).collect::<Vec<_>>() {
                    for &csym in &close_syms {
                        edges.push((q, d.close_step(csym, r2, g)));
                    }
                }
            }
        }
        let mut changed = false;
        for &(p, q) in &edges {
            if !summary.contains(p, q) {
                summary.set(p, q);
                changed = true;
            }
        }
        // Transitive closure over the accumulated edges.
        for k in 0..n {
            for p in 0..n {
                if summary.contains(p, k) && summary.or_row_into(k, p) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut surface: BTreeSet<State> = BTreeSet::new();
    let mut pushed: BTreeSet<StackSym> = BTreeSet::new();
    let mut queue = VecDeque::from([d.initial()]);
    surface.insert(d.initial());
    while let Some(q) = queue.pop_front() {
        for t in summary.successors(q) {
            if surface.insert(t) {
                queue.push_back(t);
            }
        }
        for &osym in &open_syms {
            let (r, g) = d.open_step(osym, q);
            pushed.insert(g);
            if surface.insert(r) {
                queue.push_back(r);
            }
        }
    }

    ReachabilitySummary { surface_states: surface, summary, pushed }
}

/// Size figures of a determinization result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Metrics {
    /// Constructed states (the construction only builds reachable ones).
    pub states: usize,
    /// Constructed stack symbols.
    pub stack_symbols: usize,
    /// States reachable by some well-nested prefix.
    pub reachable_states: usize,
    /// Stack symbols pushed by some reachable open transition.
    pub reachable_pushed: usize,
}

/// Counts states and stack symbols, both as constructed and as reachable
/// under [`summarize`].
pub fn metrics(r: &DeterminizationResult) -> Metrics {
    let summary = summarize(&r.automaton);
    Metrics {
        states: r.automaton.n_states(),
        stack_symbols: r.pushed_symbol_label.len(),
        reachable_states: summary.surface_states.len(),
        reachable_pushed: summary.pushed.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::InputString;
    use crate::enumerate::WellNestedSet;
    use crate::sim;
    use crate::witness::{build_a, build_b, build_bns};

    #[test]
    fn det_a1_has_two_states() {
        let det = determinize(&build_a(1)).unwrap();
        assert_eq!(det.automaton.n_states(), 2);
        let summary = summarize(&det.automaton);
        assert_eq!(summary.surface_states.len(), 2);
    }

    #[test]
    fn det_a2_reaches_all_sixteen_relations() {
        let det = determinize(&build_a(2)).unwrap();
        let m = metrics(&det);
        assert_eq!(m.states, 16);
        assert_eq!(m.reachable_states, 16);
        assert_eq!(m.reachable_pushed, 15);
        // State labels are pairwise distinct.
        let mut seen: Vec<u64> = det.state_label.iter().map(Relation::bits).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), det.state_label.len());
    }

    #[test]
    fn det_b2_pushes_every_nonempty_relation_once() {
        let det = determinize(&build_b(2)).unwrap();
        assert_eq!(metrics(&det).reachable_pushed, 15);
    }

    #[test]
    fn det_b22_pushes_per_bracket() {
        let det = determinize(&build_bns(2, 2).unwrap()).unwrap();
        assert_eq!(metrics(&det).reachable_pushed, 30);
    }

    #[test]
    fn no_pushed_symbol_is_empty() {
        for a in [build_a(2), build_b(2), build_bns(2, 3).unwrap()] {
            let det = determinize(&a).unwrap();
            assert!(det.pushed_symbol_label.iter().all(|(r, _)| !r.is_empty()));
        }
    }

    #[test]
    fn det_state_tracks_behavior_relation() {
        let a2 = build_a(2);
        let det = determinize(&a2).unwrap();
        for len in 0..=6 {
            let set = WellNestedSet::generate(a2.alphabet(), len);
            for tokens in set.iter() {
                let w = InputString::from_syms(tokens.to_vec());
                let (q, stack) = sim::didpda_run(&det.automaton, &w).unwrap();
                assert!(stack.is_empty());
                assert_eq!(
                    det.state_label[q],
                    sim::behavior_relation(&a2, &w).unwrap(),
                    "label mismatch on {tokens:?}"
                );
            }
        }
    }

    #[test]
    fn det_preserves_acceptance_on_short_strings() {
        let a2 = build_a(2);
        let det = determinize(&a2).unwrap();
        for len in 0..=8 {
            let set = WellNestedSet::generate(a2.alphabet(), len);
            for tokens in set.iter() {
                let w = InputString::from_syms(tokens.to_vec());
                assert_eq!(
                    sim::nidpda_accepts(&a2, &w).unwrap(),
                    sim::didpda_accepts(&det.automaton, &w).unwrap()
                );
            }
        }
    }

    #[test]
    fn state_limit_is_reported() {
        // Nine states exceed the packed-relation width.
        let alphabet = crate::alphabet::Alphabet::new(&["c"], &["("], &[")"]).unwrap();
        let c = alphabet.sym("c").unwrap();
        let op = alphabet.sym("(").unwrap();
        let cl = alphabet.sym(")").unwrap();
        let mut neutral = std::collections::BTreeMap::new();
        let mut open = std::collections::BTreeMap::new();
        let mut close = std::collections::BTreeMap::new();
        for q in 0..9usize {
            neutral.insert((c, q), std::collections::BTreeSet::from([q]));
            open.insert((op, q), std::collections::BTreeSet::from([(q, StackSym(0))]));
            close.insert((cl, q, StackSym(0)), std::collections::BTreeSet::from([q]));
        }
        let a = Nidpda::new(
            alphabet,
            9,
            vec!["s".into()],
            std::collections::BTreeSet::from([0]),
            std::collections::BTreeSet::from([0]),
            neutral,
            open,
            close,
        )
        .unwrap();
        assert_eq!(
            determinize(&a).unwrap_err(),
            DeterminizeError::StateLimit { n: 9, max: Relation::MAX_STATES }
        );
    }
}
