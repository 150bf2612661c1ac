//! Claim-by-claim verification: acceptance certificates for the witness
//! families, exact state and stack-symbol counts, bounded language
//! equivalence, and exact equivalence via a product construction.
//!
//! Every acceptance question is answered by two independent evaluators
//! (frontier simulation and the relation calculus) and the suite fails on
//! any disagreement between them.

use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::alphabet::{Alphabet, InputString, Sym};
use crate::automaton::{Didpda, Nidpda, StackSym, State};
use crate::batch::{self, Execution};
use crate::determinize::{determinize, metrics, DeterminizationResult, DeterminizeError};
use crate::enumerate::{count_well_nested, WellNestedSet};
use crate::gadget::{self, GadgetError};
use crate::relation::Relation;
use crate::sim::{self, DetDfs, FrontierDfs, RelationDfs, SimError, DEFAULT_CONFIG_CAP};
use crate::witness::{self, WitnessError};

/// Errors raised while configuring or driving the checks.
#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("the two automata have different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Determinize(#[from] DeterminizeError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A resource budget ran out before the check could decide.
    Budget,
}

/// One verified claim with its expected and observed values.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub id: String,
    pub status: CheckStatus,
    pub expected: String,
    pub observed: String,
    pub runtime: Duration,
}

impl CheckResult {
    fn decide(id: &str, expected: String, observed: String, started: Instant) -> CheckResult {
        CheckResult {
            id: id.to_string(),
            status: if expected == observed { CheckStatus::Pass } else { CheckStatus::Fail },
            expected,
            observed,
            runtime: started.elapsed(),
        }
    }

    fn budget(id: &str, expected: String, reason: String, started: Instant) -> CheckResult {
        CheckResult {
            id: id.to_string(),
            status: CheckStatus::Budget,
            expected,
            observed: reason,
            runtime: started.elapsed(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Per-check knobs: randomness seed, frontier cap and execution mode.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub seed: u64,
    pub frontier_cap: usize,
    pub execution: Execution,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 0,
            frontier_cap: DEFAULT_CONFIG_CAP,
            execution: Execution::default(),
        }
    }
}

/// Running tally of frontier-vs-relation comparisons.
#[derive(Clone, Debug, Default)]
pub struct OracleTally {
    pub comparisons: u64,
    pub mismatches: u64,
    pub example: Option<String>,
}

impl OracleTally {
    fn merge(&mut self, other: &OracleTally) {
        self.comparisons += other.comparisons;
        self.mismatches += other.mismatches;
        if self.example.is_none() {
            self.example = other.example.clone();
        }
    }
}

/// Evaluates one claim string on both simulation paths.
///
/// Returns `Ok(None)` when both paths agree with the expected answer, and a
/// description of the first discrepancy otherwise.
fn claim_accept(
    a: &Nidpda,
    w: &InputString,
    want: bool,
    opts: &CheckOptions,
    tally: &mut OracleTally,
) -> Result<Option<String>, SimError> {
    let frontier = sim::nidpda_accepts_capped(a, w, opts.frontier_cap)?;
    let relation = sim::relation_accepts(a, w)?;
    tally.comparisons += 1;
    let rendered = || crate::format::render_string(a.alphabet(), w);
    if frontier != relation {
        tally.mismatches += 1;
        let msg = format!("oracle-split;input={};frontier={frontier};relation={relation}", rendered());
        tally.example.get_or_insert_with(|| msg.clone());
        return Ok(Some(msg));
    }
    if frontier != want {
        return Ok(Some(format!("input={};want={want};got={frontier}", rendered())));
    }
    Ok(None)
}

fn pow2(n: usize) -> u64 {
    1u64 << n
}

fn random_nonempty_relation<R: Rng>(rng: &mut R, n: usize) -> Relation {
    let mask = (1u64 << (n * n)) - 1;
    loop {
        let bits = rng.gen::<u64>() & mask;
        if bits != 0 {
            return Relation::from_bits(n, bits);
        }
    }
}

/// The prefix whose determinized state must identify `R`: a hash, the
/// anchor push block, then the realizer of `R`.
fn distinguishing_prefix(n: usize, r: &Relation) -> Result<InputString, VerifyError> {
    let a = witness::build_a(n);
    let hash = InputString::from_names(a.alphabet(), &["#"]).unwrap();
    let (x_push, _) = gadget_anchors_cached(n)?;
    let w = gadget::gadget_w(r, n)?;
    Ok(InputString::concat([&hash, x_push.tokens(), w.tokens()]))
}

fn gadget_anchors_cached(n: usize) -> Result<(gadget::GadgetString, gadget::GadgetString), VerifyError> {
    Ok(gadget::gadget_anchors(n)?)
}

/// The full certificate string `# x w_R y_j # x' y_i`.
fn certificate_string(
    n: usize,
    r: &Relation,
    i: usize,
    j: usize,
) -> Result<InputString, VerifyError> {
    let a = witness::build_a(n);
    let hash = InputString::from_names(a.alphabet(), &["#"]).unwrap();
    let (x_push, x_pop) = gadget_anchors_cached(n)?;
    let w = gadget::gadget_w(r, n)?;
    let y_j = gadget::gadget_y(j, n)?;
    let y_i = gadget::gadget_y(i, n)?;
    Ok(InputString::concat([
        &hash,
        x_push.tokens(),
        w.tokens(),
        y_j.tokens(),
        &hash,
        x_pop.tokens(),
        y_i.tokens(),
    ]))
}

/// Checks for the `A_n` family: exact determinized state counts, pairwise
/// distinct states after the distinguishing prefixes, and the acceptance
/// certificate (exhaustive for n <= 2, seeded samples for n = 3).
pub fn check_theorem2(
    n: usize,
    opts: &CheckOptions,
) -> Result<(Vec<CheckResult>, OracleTally), VerifyError> {
    if !(1..=3).contains(&n) {
        return Err(VerifyError::Config(format!("theorem-2 checks support n in 1..=3, got {n}")));
    }
    let mut results = Vec::new();
    let mut tally = OracleTally::default();
    let a = witness::build_a(n);
    let expected_states = pow2(n * n);

    let t0 = Instant::now();
    let det = determinize(&a)?;
    let m = metrics(&det);
    results.push(CheckResult::decide(
        &format!("thm2.det-states.n{n}"),
        format!("reachable={expected_states}"),
        format!("reachable={}", m.reachable_states),
        t0,
    ));

    let t0 = Instant::now();
    let mut finals: BTreeSet<State> = BTreeSet::new();
    for r in Relation::all(n) {
        let prefix = distinguishing_prefix(n, &r)?;
        let (q, _) = sim::didpda_run(&det.automaton, &prefix)?;
        finals.insert(q);
    }
    results.push(CheckResult::decide(
        &format!("thm2.distinct-prefixes.n{n}"),
        format!("distinct-states={expected_states}"),
        format!("distinct-states={}", finals.len()),
        t0,
    ));

    let t0 = Instant::now();
    let mut ran = 0u64;
    let mut first_bad = None;
    let mut run_one =
        |r: Relation, i: usize, j: usize, tally: &mut OracleTally| -> Result<(), VerifyError> {
            let w = certificate_string(n, &r, i, j)?;
            if let Some(bad) = claim_accept(&a, &w, r.contains(i, j), opts, tally)? {
                if first_bad.is_none() {
                    first_bad = Some(bad);
                }
            }
            ran += 1;
            Ok(())
        };
    if n <= 2 {
        for r in Relation::all(n) {
            for i in 0..n {
                for j in 0..n {
                    run_one(r, i, j, &mut tally)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mask = (1u64 << (n * n)) - 1;
        for _ in 0..200 {
            let r = Relation::from_bits(n, rng.gen::<u64>() & mask);
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            run_one(r, i, j, &mut tally)?;
        }
    }
    results.push(CheckResult::decide(
        &format!("thm2.acceptance.n{n}"),
        format!("mismatches=0/{ran}"),
        match first_bad {
            None => format!("mismatches=0/{ran}"),
            Some(bad) => format!("first-mismatch:{bad}"),
        },
        t0,
    ));
    Ok((results, tally))
}

fn nonempty_relations(n: usize) -> Vec<Relation> {
    Relation::all(n).filter(|r| !r.is_empty()).collect()
}

/// Checks for `B_2`: acceptance of `f g` strings (exhaustive at m = 1,
/// seeded samples at m = 2, 3), the exact pushed-symbol count 15, and
/// injectivity of the (state, stack) outcomes across the 15 `f` strings.
pub fn check_theorem3(
    opts: &CheckOptions,
    sample_ms: &[usize],
    samples_per_m: usize,
) -> Result<(Vec<CheckResult>, OracleTally), VerifyError> {
    let n = 2usize;
    let b = witness::build_b(n);
    let mut results = Vec::new();
    let mut tally = OracleTally::default();

    let t0 = Instant::now();
    let mut ran = 0u64;
    let mut first_bad = None;
    for r in nonempty_relations(n) {
        let f = gadget::gadget_f(&[r], &[0, 0], n, 1)?;
        for i in 0..n {
            for j in 0..n {
                let g = gadget::gadget_g(i, j, 1, 1, n)?;
                let w = InputString::concat([f.tokens(), g.tokens()]);
                if let Some(bad) = claim_accept(&b, &w, r.contains(i, j), opts, &mut tally)? {
                    first_bad.get_or_insert(bad);
                }
                ran += 1;
            }
        }
    }
    results.push(CheckResult::decide(
        "thm3.fg.m1",
        format!("mismatches=0/{ran}"),
        match first_bad {
            None => format!("mismatches=0/{ran}"),
            Some(bad) => format!("first-mismatch:{bad}"),
        },
        t0,
    ));

    for &m in sample_ms {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(m as u64));
        let mut ran = 0u64;
        let mut first_bad = None;
        for _ in 0..samples_per_m {
            let rels: Vec<Relation> =
                (0..m).map(|_| random_nonempty_relation(&mut rng, n)).collect();
            let k = rng.gen_range(1..=m);
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let f = gadget::gadget_f(&rels, &vec![0; m + 1], n, 1)?;
            let g = gadget::gadget_g(i, j, k, m, n)?;
            let w = InputString::concat([f.tokens(), g.tokens()]);
            if let Some(bad) = claim_accept(&b, &w, rels[k - 1].contains(i, j), opts, &mut tally)? {
                first_bad.get_or_insert(bad);
            }
            ran += 1;
        }
        results.push(CheckResult::decide(
            &format!("thm3.fg.m{m}"),
            format!("mismatches=0/{ran}"),
            match first_bad {
                None => format!("mismatches=0/{ran}"),
                Some(bad) => format!("first-mismatch:{bad}"),
            },
            t0,
        ));
    }

    let t0 = Instant::now();
    let det = determinize(&b)?;
    let m = metrics(&det);
    results.push(CheckResult::decide(
        "thm3.pushed",
        "reachable-pushed=15".into(),
        format!("reachable-pushed={}", m.reachable_pushed),
        t0,
    ));

    let t0 = Instant::now();
    let mut outcomes: BTreeSet<(State, Vec<StackSym>)> = BTreeSet::new();
    let mut total = 0usize;
    for r in nonempty_relations(n) {
        let f = gadget::gadget_f(&[r], &[0, 0], n, 1)?;
        outcomes.insert(sim::didpda_run(&det.automaton, f.tokens())?);
        total += 1;
    }
    results.push(CheckResult::decide(
        "thm3.injectivity.m1",
        format!("distinct-outcomes={total}"),
        format!("distinct-outcomes={}", outcomes.len()),
        t0,
    ));
    Ok((results, tally))
}

/// Checks for `B_{2,s}`: acceptance of `f g` strings over indexed brackets,
/// acceptance of `f h` bit probes when requested, the exact pushed-symbol
/// count `15 s`, and outcome injectivity across the `15 s^2` `f` strings.
pub fn check_theorem4(
    s: usize,
    check_bits: bool,
    opts: &CheckOptions,
    m2_samples: usize,
) -> Result<(Vec<CheckResult>, OracleTally), VerifyError> {
    let n = 2usize;
    witness::WitnessParams::new(n, s)?;
    if s < 2 {
        return Err(VerifyError::Config("theorem-4 checks need s >= 2".into()));
    }
    let b = witness::build_bns(n, s)?;
    let mut results = Vec::new();
    let mut tally = OracleTally::default();
    let rels = nonempty_relations(n);

    let t0 = Instant::now();
    let mut ran = 0u64;
    let mut first_bad = None;
    for r in &rels {
        for l1 in 0..s {
            for l2 in 0..s {
                let f = gadget::gadget_f(&[*r], &[l1, l2], n, s)?;
                for i in 0..n {
                    for j in 0..n {
                        let g = gadget::gadget_g(i, j, 1, 1, n)?;
                        // g is built over the plain B_n alphabet; rename by
                        // token to the indexed alphabet.
                        let g = rename(&g, b.alphabet());
                        let w = InputString::concat([f.tokens(), &g]);
                        if let Some(bad) =
                            claim_accept(&b, &w, r.contains(i, j), opts, &mut tally)?
                        {
                            first_bad.get_or_insert(bad);
                        }
                        ran += 1;
                    }
                }
            }
        }
    }
    results.push(CheckResult::decide(
        &format!("thm4.fg.s{s}.m1"),
        format!("mismatches=0/{ran}"),
        match first_bad {
            None => format!("mismatches=0/{ran}"),
            Some(bad) => format!("first-mismatch:{bad}"),
        },
        t0,
    ));

    if m2_samples > 0 {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(40 + s as u64));
        let mut ran = 0u64;
        let mut first_bad = None;
        for _ in 0..m2_samples {
            let m = 2;
            let sample: Vec<Relation> =
                (0..m).map(|_| random_nonempty_relation(&mut rng, n)).collect();
            let indices: Vec<usize> = (0..=m).map(|_| rng.gen_range(0..s)).collect();
            let k = rng.gen_range(1..=m);
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let f = gadget::gadget_f(&sample, &indices, n, s)?;
            let g = rename(&gadget::gadget_g(i, j, k, m, n)?, b.alphabet());
            let w = InputString::concat([f.tokens(), &g]);
            if let Some(bad) =
                claim_accept(&b, &w, sample[k - 1].contains(i, j), opts, &mut tally)?
            {
                first_bad.get_or_insert(bad);
            }
            ran += 1;
        }
        results.push(CheckResult::decide(
            &format!("thm4.fg.s{s}.m2"),
            format!("mismatches=0/{ran}"),
            match first_bad {
                None => format!("mismatches=0/{ran}"),
                Some(bad) => format!("first-mismatch:{bad}"),
            },
            t0,
        ));
    }

    if check_bits {
        let t0 = Instant::now();
        let bits = witness::bracket_bit_count(s);
        let mut ran = 0u64;
        let mut first_bad = None;
        for r in &rels {
            for l1 in 0..s {
                for l2 in 0..s {
                    let f = gadget::gadget_f(&[*r], &[l1, l2], n, s)?;
                    for k in 1..=2usize {
                        for x in 0..bits {
                            if x / n >= n {
                                continue;
                            }
                            let h = gadget::gadget_h(k, x, 1, n, s)?;
                            let w = InputString::concat([f.tokens(), h.tokens()]);
                            let l_k = if k == 1 { l1 } else { l2 };
                            let want = l_k >> x & 1 == 1;
                            if let Some(bad) = claim_accept(&b, &w, want, opts, &mut tally)? {
                                first_bad.get_or_insert(bad);
                            }
                            ran += 1;
                        }
                    }
                }
            }
        }
        results.push(CheckResult::decide(
            &format!("thm4.fh.s{s}"),
            format!("mismatches=0/{ran}"),
            match first_bad {
                None => format!("mismatches=0/{ran}"),
                Some(bad) => format!("first-mismatch:{bad}"),
            },
            t0,
        ));
    }

    let t0 = Instant::now();
    let det = determinize(&b)?;
    let m = metrics(&det);
    results.push(CheckResult::decide(
        &format!("thm4.pushed.s{s}"),
        format!("reachable-pushed={}", 15 * s),
        format!("reachable-pushed={}", m.reachable_pushed),
        t0,
    ));

    let t0 = Instant::now();
    let mut outcomes: BTreeSet<(State, Vec<StackSym>)> = BTreeSet::new();
    let mut total = 0usize;
    for r in &rels {
        for l1 in 0..s {
            for l2 in 0..s {
                let f = gadget::gadget_f(&[*r], &[l1, l2], n, s)?;
                outcomes.insert(sim::didpda_run(&det.automaton, f.tokens())?);
                total += 1;
            }
        }
    }
    results.push(CheckResult::decide(
        &format!("thm4.injectivity.s{s}"),
        format!("distinct-outcomes={total}"),
        format!("distinct-outcomes={}", outcomes.len()),
        t0,
    ));
    Ok((results, tally))
}

/// Maps tokens of one alphabet to same-named tokens of another.
fn rename(g: &gadget::GadgetString, to: &Alphabet) -> InputString {
    InputString::from_syms(
        g.tokens()
            .tokens()
            .iter()
            .map(|&s| to.sym(g.alphabet().name(s)).expect("token missing in target alphabet"))
            .collect(),
    )
}

/// Checks for `B_{1,2}`: the determinization keeps at least two states and
/// exactly two reachable pushed symbols, and acceptance equals exact
/// bracket-type matching (checked against an independent stack matcher).
pub fn check_b12(
    match_len: usize,
    opts: &CheckOptions,
) -> Result<(Vec<CheckResult>, OracleTally), VerifyError> {
    let b12 = witness::build_b12();
    let mut results = Vec::new();
    let mut tally = OracleTally::default();

    let t0 = Instant::now();
    let det = determinize(&b12)?;
    let m = metrics(&det);
    results.push(CheckResult::decide(
        "b12.det-size",
        "states>=2;reachable-pushed=2".into(),
        format!("states>={};reachable-pushed={}", if m.reachable_states >= 2 { 2 } else { m.reachable_states }, m.reachable_pushed),
        t0,
    ));

    let t0 = Instant::now();
    let al = b12.alphabet();
    let pairs: HashMap<Sym, Sym> = HashMap::from([
        (al.sym(">").unwrap(), al.sym("<").unwrap()),
        (al.sym(">>").unwrap(), al.sym("<<").unwrap()),
    ]);
    let type_match = |tokens: &[Sym]| -> bool {
        let mut stack = Vec::new();
        for &s in tokens {
            if let Some(&want_open) = pairs.get(&s) {
                if stack.pop() != Some(want_open) {
                    return false;
                }
            } else {
                stack.push(s);
            }
        }
        stack.is_empty()
    };
    let mut ran = 0u64;
    let mut first_bad = None;
    for len in 0..=match_len {
        let set = WellNestedSet::generate(al, len);
        for tokens in set.iter() {
            let w = InputString::from_syms(tokens.to_vec());
            if let Some(bad) = claim_accept(&b12, &w, type_match(tokens), opts, &mut tally)? {
                first_bad.get_or_insert(bad);
            }
            ran += 1;
        }
    }
    results.push(CheckResult::decide(
        "b12.type-match",
        format!("mismatches=0/{ran}"),
        match first_bad {
            None => format!("mismatches=0/{ran}"),
            Some(bad) => format!("first-mismatch:{bad}"),
        },
        t0,
    ));
    Ok((results, tally))
}

/// One result per determinization asserting that no constructed stack
/// symbol carries the empty relation.
pub fn check_improvement(named: &[(&str, &DeterminizationResult)]) -> Vec<CheckResult> {
    named
        .iter()
        .map(|(name, det)| {
            let t0 = Instant::now();
            let empties =
                det.pushed_symbol_label.iter().filter(|(r, _)| r.is_empty()).count();
            CheckResult::decide(
                &format!("improvement.{name}"),
                "empty-relation-symbols=0".into(),
                format!("empty-relation-symbols={empties}"),
                t0,
            )
        })
        .collect()
}

/// First disagreement found by a tri-path scan.
#[derive(Clone, Debug)]
pub struct ScanMismatch {
    pub input: InputString,
    pub frontier: bool,
    pub relation: bool,
    pub det: bool,
}

enum ScanHit {
    Mismatch(ScanMismatch),
    Budget(SimError),
}

/// All three evaluators advanced in lockstep over a depth-first string
/// enumeration, sharing work across common prefixes.
struct TriSim<'a> {
    frontier: FrontierDfs<'a>,
    relation: RelationDfs<'a>,
    det: DetDfs<'a>,
    depth: usize,
}

impl<'a> TriSim<'a> {
    fn new(a: &'a Nidpda, d: &'a Didpda, cap: usize) -> Result<Self, SimError> {
        let mut frontier = FrontierDfs::new(a, cap);
        frontier.reset(a.initial().iter().copied());
        Ok(TriSim { frontier, relation: RelationDfs::new(a)?, det: DetDfs::new(d), depth: 0 })
    }

    fn rewind_to(&mut self, depth: usize) {
        while self.depth > depth {
            self.frontier.pop_sym();
            self.relation.pop_sym();
            self.det.pop_sym();
            self.depth -= 1;
        }
    }

    fn push(&mut self, sym: Sym) -> Result<(), SimError> {
        self.frontier.push_sym(sym)?;
        if let Err(e) = self.relation.push_sym(sym) {
            self.frontier.pop_sym();
            return Err(e);
        }
        if let Err(e) = self.det.push_sym(sym) {
            self.frontier.pop_sym();
            self.relation.pop_sym();
            return Err(e);
        }
        self.depth += 1;
        Ok(())
    }

    fn verdicts(&self) -> (bool, bool, bool) {
        (self.frontier.accepts_now(), self.relation.accepts_now(), self.det.accepts_now())
    }

    fn scan_chunk(&mut self, chunk: &[Sym], string_len: usize) -> (u64, Option<ScanHit>) {
        let mut checked = 0u64;
        if string_len == 0 {
            self.rewind_to(0);
            let (f, r, d) = self.verdicts();
            checked = 1;
            if f != r || f != d {
                return (
                    checked,
                    Some(ScanHit::Mismatch(ScanMismatch {
                        input: InputString::default(),
                        frontier: f,
                        relation: r,
                        det: d,
                    })),
                );
            }
            return (checked, None);
        }
        self.rewind_to(0);
        let mut prev: &[Sym] = &[];
        for tokens in chunk.chunks_exact(string_len) {
            let common = prev
                .iter()
                .zip(tokens)
                .take_while(|(a, b)| a == b)
                .count();
            self.rewind_to(common);
            for &sym in &tokens[common..] {
                if let Err(e) = self.push(sym) {
                    return (checked, Some(ScanHit::Budget(e)));
                }
            }
            checked += 1;
            let (f, r, d) = self.verdicts();
            if f != r || f != d {
                return (
                    checked,
                    Some(ScanHit::Mismatch(ScanMismatch {
                        input: InputString::from_syms(tokens.to_vec()),
                        frontier: f,
                        relation: r,
                        det: d,
                    })),
                );
            }
            prev = tokens;
        }
        (checked, None)
    }
}

/// Result of a bounded-equivalence scan.
pub struct ScanOutcome {
    pub strings: u64,
    pub mismatch: Option<ScanMismatch>,
    pub budget: Option<SimError>,
}

/// Compares frontier, relation and deterministic acceptance on every
/// well-nested string up to `max_len`, in enumeration order.
pub fn scan_agreement(
    a: &Nidpda,
    d: &Didpda,
    max_len: usize,
    opts: &CheckOptions,
) -> Result<ScanOutcome, VerifyError> {
    if a.alphabet() != d.alphabet() {
        return Err(VerifyError::AlphabetMismatch);
    }
    // Fail early on automata the relation calculus cannot handle.
    TriSim::new(a, d, opts.frontier_cap).map_err(VerifyError::Sim)?;
    let mut strings = 0u64;
    for len in 0..=max_len {
        strings += count_well_nested(a.alphabet(), len);
        let set = WellNestedSet::generate(a.alphabet(), len);
        let chunks = set.chunks(2048);
        let hit = batch::first_hit(
            opts.execution,
            &chunks,
            || TriSim::new(a, d, opts.frontier_cap).expect("prevalidated"),
            |tri, chunk| tri.scan_chunk(chunk, len).1,
        );
        match hit {
            None => {}
            Some(ScanHit::Mismatch(m)) => {
                return Ok(ScanOutcome { strings, mismatch: Some(m), budget: None })
            }
            Some(ScanHit::Budget(e)) => {
                return Ok(ScanOutcome { strings, mismatch: None, budget: Some(e) })
            }
        }
    }
    Ok(ScanOutcome { strings, mismatch: None, budget: None })
}

/// Bounded-equivalence check between a nondeterministic automaton and a
/// deterministic one, reporting the first mismatch if any.
pub fn bounded_equivalence(
    a: &Nidpda,
    d: &Didpda,
    max_len: usize,
) -> Result<CheckResult, VerifyError> {
    let (results, _) = bounded_agreement("pair", a, d, max_len, &CheckOptions::default())?;
    Ok(results.into_iter().next().unwrap())
}

/// Tri-path scan rendered as two check results: language equivalence
/// (`equiv.<name>`) and frontier-vs-relation agreement (`oracle.scan.<name>`).
/// Any three-way disagreement fails both, carrying the offending input.
pub fn bounded_agreement(
    name: &str,
    a: &Nidpda,
    d: &Didpda,
    max_len: usize,
    opts: &CheckOptions,
) -> Result<(Vec<CheckResult>, OracleTally), VerifyError> {
    let t0 = Instant::now();
    let outcome = scan_agreement(a, d, max_len, opts)?;
    let mut tally = OracleTally::default();
    tally.comparisons = outcome.strings;
    let equiv_id = format!("equiv.{name}");
    let oracle_id = format!("oracle.scan.{name}");
    let expected = format!("mismatches=0/{}", outcome.strings);
    let results = match (&outcome.mismatch, &outcome.budget) {
        (None, None) => vec![
            CheckResult::decide(&equiv_id, expected.clone(), expected.clone(), t0),
            CheckResult::decide(&oracle_id, expected.clone(), expected, t0),
        ],
        (Some(m), _) => {
            let rendered = crate::format::render_string(a.alphabet(), &m.input);
            let observed = format!(
                "input={rendered};frontier={};relation={};det={}",
                m.frontier, m.relation, m.det
            );
            if m.frontier != m.relation {
                tally.mismatches += 1;
                tally.example = Some(observed.clone());
            }
            vec![
                CheckResult::decide(&equiv_id, expected.clone(), observed.clone(), t0),
                CheckResult::decide(&oracle_id, expected, observed, t0),
            ]
        }
        (None, Some(e)) => vec![
            CheckResult::budget(&equiv_id, expected.clone(), e.to_string(), t0),
            CheckResult::budget(&oracle_id, expected, e.to_string(), t0),
        ],
    };
    Ok((results, tally))
}

/// The product of two deterministic automata over a shared alphabet,
/// explored from the initial pair.
struct Product {
    states: Vec<(State, State)>,
    index: HashMap<(State, State), usize>,
    syms: Vec<(StackSym, StackSym)>,
    sym_index: HashMap<(StackSym, StackSym), usize>,
    neutral_edges: Vec<Vec<(Sym, usize)>>,
    open_edges: Vec<Vec<(Sym, usize, usize)>>,
    close_edges: HashMap<(usize, usize), Vec<(Sym, usize)>>,
}

impl Product {
    fn build(d1: &Didpda, d2: &Didpda) -> Product {
        let alphabet = d1.alphabet();
        let neutral_syms = alphabet.neutral_syms();
        let open_syms = alphabet.open_syms();
        let close_syms = alphabet.close_syms();
        let mut p = Product {
            states: Vec::new(),
            index: HashMap::new(),
            syms: Vec::new(),
            sym_index: HashMap::new(),
            neutral_edges: Vec::new(),
            open_edges: Vec::new(),
            close_edges: HashMap::new(),
        };
        let mut pending_states = VecDeque::new();
        let mut pending_pairs: VecDeque<(usize, usize)> = VecDeque::new();
        let intern = |pair: (State, State),
                          pending: &mut VecDeque<usize>,
                          states: &mut Vec<(State, State)>,
                          index: &mut HashMap<(State, State), usize>|
         -> usize {
            *index.entry(pair).or_insert_with(|| {
                states.push(pair);
                pending.push_back(states.len() - 1);
                states.len() - 1
            })
        };
        intern(
            (d1.initial(), d2.initial()),
            &mut pending_states,
            &mut p.states,
            &mut p.index,
        );
        while let Some(s) = pending_states.pop_front() {
            let (q1, q2) = p.states[s];
            while p.neutral_edges.len() < p.states.len() {
                p.neutral_edges.push(Vec::new());
                p.open_edges.push(Vec::new());
            }
            for &sym in &neutral_syms {
                let t = intern(
                    (d1.neutral_step(sym, q1), d2.neutral_step(sym, q2)),
                    &mut pending_states,
                    &mut p.states,
                    &mut p.index,
                );
                p.neutral_edges[s].push((sym, t));
            }
            for &sym in &open_syms {
                let (r1, g1) = d1.open_step(sym, q1);
                let (r2, g2) = d2.open_step(sym, q2);
                let g = *p.sym_index.entry((g1, g2)).or_insert_with(|| {
                    p.syms.push((g1, g2));
                    for st in 0..p.states.len() {
                        pending_pairs.push_back((st, p.syms.len() - 1));
                    }
                    p.syms.len() - 1
                });
                let t = intern((r1, r2), &mut pending_states, &mut p.states, &mut p.index);
                p.open_edges[s].push((sym, t, g));
            }
            for g in 0..p.syms.len() {
                pending_pairs.push_back((s, g));
            }
            while let Some((st, g)) = pending_pairs.pop_front() {
                let entry = p.close_edges.entry((st, g)).or_default();
                if !entry.is_empty() {
                    continue;
                }
                let (q1, q2) = p.states[st];
                let (g1, g2) = p.syms[g];
                let mut edges = Vec::new();
                for &sym in &close_syms {
                    let t = intern(
                        (d1.close_step(sym, q1, g1), d2.close_step(sym, q2, g2)),
                        &mut pending_states,
                        &mut p.states,
                        &mut p.index,
                    );
                    edges.push((sym, t));
                }
                p.close_edges.insert((st, g), edges);
            }
        }
        while p.neutral_edges.len() < p.states.len() {
            p.neutral_edges.push(Vec::new());
            p.open_edges.push(Vec::new());
        }
        p
    }
}

#[derive(Clone)]
enum SummaryParent {
    Eps,
    Neutral { prev: (usize, usize), sym: Sym },
    Call { prev: (usize, usize), open: Sym, inner: (usize, usize), close: Sym },
}

/// Shortest well-nested witness lengths between product states, with parent
/// links for reconstruction.
struct ShortestSummaries {
    dist: HashMap<(usize, usize), u64>,
    parent: HashMap<(usize, usize), SummaryParent>,
}

fn shortest_summaries(p: &Product) -> ShortestSummaries {
    #[derive(Clone)]
    struct Ctx {
        caller: (usize, usize),
        caller_len: u64,
        open: Sym,
        gamma: usize,
    }
    let mut dist: HashMap<(usize, usize), u64> = HashMap::new();
    let mut parent: HashMap<(usize, usize), SummaryParent> = HashMap::new();
    let mut settled: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut settled_by_start: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    let mut contexts: HashMap<usize, Vec<Ctx>> = HashMap::new();
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, usize, usize)>> = BinaryHeap::new();

    let relax = |pair: (usize, usize),
                     len: u64,
                     par: SummaryParent,
                     dist: &mut HashMap<(usize, usize), u64>,
                     parent: &mut HashMap<(usize, usize), SummaryParent>,
                     heap: &mut BinaryHeap<std::cmp::Reverse<(u64, usize, usize)>>| {
        if dist.get(&pair).is_none_or(|&d| len < d) {
            dist.insert(pair, len);
            parent.insert(pair, par);
            heap.push(std::cmp::Reverse((len, pair.0, pair.1)));
        }
    };

    for s in 0..p.states.len() {
        relax((s, s), 0, SummaryParent::Eps, &mut dist, &mut parent, &mut heap);
    }

    while let Some(std::cmp::Reverse((len, start, end))) = heap.pop() {
        let pair = (start, end);
        if !settled.insert(pair) {
            continue;
        }
        settled_by_start.entry(start).or_default().push((end, len));

        for &(sym, t) in &p.neutral_edges[end] {
            relax(
                (start, t),
                len + 1,
                SummaryParent::Neutral { prev: pair, sym },
                &mut dist,
                &mut parent,
                &mut heap,
            );
        }
        for &(open_sym, callee, gamma) in &p.open_edges[end] {
            contexts.entry(callee).or_default().push(Ctx {
                caller: pair,
                caller_len: len,
                open: open_sym,
                gamma,
            });
            if let Some(inners) = settled_by_start.get(&callee) {
                for &(inner_end, inner_len) in inners.clone().iter() {
                    if let Some(edges) = p.close_edges.get(&(inner_end, gamma)) {
                        for &(close_sym, t) in edges {
                            relax(
                                (start, t),
                                len + 1 + inner_len + 1,
                                SummaryParent::Call {
                                    prev: pair,
                                    open: open_sym,
                                    inner: (callee, inner_end),
                                    close: close_sym,
                                },
                                &mut dist,
                                &mut parent,
                                &mut heap,
                            );
                        }
                    }
                }
            }
        }
        // This pair can itself serve as the inner excursion of any
        // registered call site targeting `start`.
        if let Some(ctxs) = contexts.get(&start) {
            for ctx in ctxs.clone() {
                if let Some(edges) = p.close_edges.get(&(end, ctx.gamma)) {
                    for &(close_sym, t) in edges {
                        relax(
                            (ctx.caller.0, t),
                            ctx.caller_len + 1 + len + 1,
                            SummaryParent::Call {
                                prev: ctx.caller,
                                open: ctx.open,
                                inner: pair,
                                close: close_sym,
                            },
                            &mut dist,
                            &mut parent,
                            &mut heap,
                        );
                    }
                }
            }
        }
    }
    ShortestSummaries { dist, parent }
}

fn reconstruct(sums: &ShortestSummaries, pair: (usize, usize), out: &mut Vec<Sym>) {
    match sums.parent.get(&pair).expect("settled pair has a parent") {
        SummaryParent::Eps => {}
        SummaryParent::Neutral { prev, sym } => {
            reconstruct(sums, *prev, out);
            out.push(*sym);
        }
        SummaryParent::Call { prev, open, inner, close } => {
            reconstruct(sums, *prev, out);
            out.push(*open);
            reconstruct(sums, *inner, out);
            out.push(*close);
        }
    }
}

/// Exact equivalence of two deterministic automata over the same alphabet:
/// returns a shortest-found well-nested counterexample, or `None` when the
/// automata agree on every well-nested string.
pub fn product_inequivalence(
    d1: &Didpda,
    d2: &Didpda,
) -> Result<Option<InputString>, VerifyError> {
    if d1.alphabet() != d2.alphabet() {
        return Err(VerifyError::AlphabetMismatch);
    }
    let p = Product::build(d1, d2);
    let sums = shortest_summaries(&p);
    let init = p.index[&(d1.initial(), d2.initial())];
    let mut best: Option<(u64, usize)> = None;
    for (s, &(q1, q2)) in p.states.iter().enumerate() {
        if d1.is_accepting(q1) == d2.is_accepting(q2) {
            continue;
        }
        if let Some(&len) = sums.dist.get(&(init, s)) {
            if best.is_none_or(|(b, _)| len < b) {
                best = Some((len, s));
            }
        }
    }
    let Some((_, bad)) = best else {
        return Ok(None);
    };
    let mut tokens = Vec::new();
    reconstruct(&sums, (init, bad), &mut tokens);
    let w = InputString::from_syms(tokens);
    debug_assert_ne!(
        sim::didpda_accepts(d1, &w).expect("counterexample must be well-nested"),
        sim::didpda_accepts(d2, &w).expect("counterexample must be well-nested"),
    );
    Ok(Some(w))
}

/// Budgets for one suite run.
#[derive(Clone, Debug)]
pub struct SuiteProfile {
    pub name: String,
    /// State counts for the theorem-2 checks.
    pub thm2_ns: Vec<usize>,
    /// Sampled `m` values for the theorem-3 claim checks.
    pub thm3_sample_ms: Vec<usize>,
    pub thm3_samples_per_m: usize,
    /// Bracket counts for the theorem-4 checks.
    pub thm4_s_values: Vec<usize>,
    /// Bracket counts for which the bit-probe (`f h`) claim runs.
    pub thm4_bit_s_values: Vec<usize>,
    pub thm4_m2_samples: usize,
    /// Equivalence scan length for `A_2`, `B_2` and `B_{1,2}`.
    pub equiv_len: usize,
    /// Equivalence scan length for `B_{2,2}` (larger alphabet).
    pub equiv_len_bns: usize,
    /// Exhaustive bracket-matching length for `B_{1,2}`.
    pub b12_match_len: usize,
    pub seed: u64,
    pub frontier_cap: usize,
    pub execution: Execution,
}

impl SuiteProfile {
    /// The full desk-scale profile.
    pub fn desk() -> SuiteProfile {
        SuiteProfile {
            name: "desk".into(),
            thm2_ns: vec![1, 2, 3],
            thm3_sample_ms: vec![2, 3],
            thm3_samples_per_m: 100,
            thm4_s_values: vec![2, 3, 4],
            thm4_bit_s_values: vec![2, 4],
            thm4_m2_samples: 50,
            equiv_len: 12,
            equiv_len_bns: 10,
            b12_match_len: 10,
            seed: 0,
            frontier_cap: DEFAULT_CONFIG_CAP,
            execution: Execution::default(),
        }
    }

    /// A fast smoke profile.
    pub fn quick() -> SuiteProfile {
        SuiteProfile {
            name: "quick".into(),
            thm2_ns: vec![1, 2],
            thm3_sample_ms: vec![2],
            thm3_samples_per_m: 25,
            thm4_s_values: vec![2],
            thm4_bit_s_values: vec![2],
            thm4_m2_samples: 10,
            equiv_len: 8,
            equiv_len_bns: 6,
            b12_match_len: 8,
            seed: 0,
            frontier_cap: DEFAULT_CONFIG_CAP,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        for &n in &self.thm2_ns {
            if !(1..=3).contains(&n) {
                return Err(VerifyError::Config(format!("thm2 n={n} outside 1..=3")));
            }
        }
        for &s in self.thm4_s_values.iter().chain(&self.thm4_bit_s_values) {
            // Theorem-4 checks run at n = 2, so s may not exceed 2^(2*2).
            if !(2..=16).contains(&s) {
                return Err(VerifyError::Config(format!("thm4 s={s} outside 2..=16")));
            }
        }
        if !self.thm4_bit_s_values.iter().all(|s| self.thm4_s_values.contains(s)) {
            return Err(VerifyError::Config("bit-probe s values must be among thm4 s values".into()));
        }
        if self.equiv_len > 14 || self.equiv_len_bns > 12 || self.b12_match_len > 14 {
            return Err(VerifyError::Config("equivalence scan lengths beyond desk scale".into()));
        }
        Ok(())
    }

    fn options(&self) -> CheckOptions {
        CheckOptions { seed: self.seed, frontier_cap: self.frontier_cap, execution: self.execution }
    }
}

/// All check results of a suite run, in a deterministic order.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub profile: String,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(CheckResult::passed)
    }

    pub fn render(&self) -> String {
        crate::format::render_report(&self.results)
    }

    /// Looks one check up by id.
    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

/// Runs every check enabled by the profile.
pub fn run_suite(profile: &SuiteProfile) -> Result<SuiteReport, VerifyError> {
    profile.validate()?;
    let opts = profile.options();
    let mut results = Vec::new();
    let mut tally = OracleTally::default();

    for &n in &profile.thm2_ns {
        let (r, t) = check_theorem2(n, &opts)?;
        results.extend(r);
        tally.merge(&t);
    }
    let (r, t) = check_theorem3(&opts, &profile.thm3_sample_ms, profile.thm3_samples_per_m)?;
    results.extend(r);
    tally.merge(&t);
    for &s in &profile.thm4_s_values {
        let check_bits = profile.thm4_bit_s_values.contains(&s);
        let (r, t) = check_theorem4(s, check_bits, &opts, profile.thm4_m2_samples)?;
        results.extend(r);
        tally.merge(&t);
    }
    let (r, t) = check_b12(profile.b12_match_len, &opts)?;
    results.extend(r);
    tally.merge(&t);

    // Determinizations used by both the improvement check and the scans.
    let a2 = witness::build_a(2);
    let b2 = witness::build_b(2);
    let b22 = witness::build_bns(2, 2)?;
    let b12 = witness::build_b12();
    let det_a2 = determinize(&a2)?;
    let det_b2 = determinize(&b2)?;
    let det_b22 = determinize(&b22)?;
    let det_b12 = determinize(&b12)?;
    let det_a1 = determinize(&witness::build_a(1))?;
    let det_a3 = determinize(&witness::build_a(3))?;
    let mut improvement_targets: Vec<(&str, &DeterminizationResult)> = vec![
        ("A1", &det_a1),
        ("A2", &det_a2),
        ("A3", &det_a3),
        ("B2", &det_b2),
        ("B22", &det_b22),
        ("B12", &det_b12),
    ];
    let det_b23;
    let det_b24;
    if profile.thm4_s_values.contains(&3) {
        det_b23 = determinize(&witness::build_bns(2, 3)?)?;
        improvement_targets.push(("B23", &det_b23));
    }
    if profile.thm4_s_values.contains(&4) {
        det_b24 = determinize(&witness::build_bns(2, 4)?)?;
        improvement_targets.push(("B24", &det_b24));
    }
    results.extend(check_improvement(&improvement_targets));

    for (name, a, det, len) in [
        ("A2", &a2, &det_a2, profile.equiv_len),
        ("B2", &b2, &det_b2, profile.equiv_len),
        ("B22", &b22, &det_b22, profile.equiv_len_bns),
        ("B12", &b12, &det_b12, profile.equiv_len),
    ] {
        let (r, t) = bounded_agreement(name, a, &det.automaton, len, &opts)?;
        results.extend(r);
        tally.merge(&t);
    }

    let t0 = Instant::now();
    results.push(CheckResult::decide(
        "oracle.claims",
        format!("mismatches=0/{}", tally.comparisons),
        match &tally.example {
            None if tally.mismatches == 0 => format!("mismatches=0/{}", tally.comparisons),
            Some(example) => format!("first-mismatch:{example}"),
            None => format!("mismatches={}/{}", tally.mismatches, tally.comparisons),
        },
        t0,
    ));

    Ok(SuiteReport { profile: profile.name.clone(), results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{build_a, build_b12};

    #[test]
    fn theorem2_n2_passes() {
        let (results, tally) = check_theorem2(2, &CheckOptions::default()).unwrap();
        for r in &results {
            assert!(r.passed(), "failed: {} expected={} got={}", r.id, r.expected, r.observed);
        }
        assert_eq!(tally.mismatches, 0);
        assert_eq!(tally.comparisons, 64);
    }

    #[test]
    fn bounded_equivalence_passes_on_a2() {
        let a2 = build_a(2);
        let det = determinize(&a2).unwrap();
        let r = bounded_equivalence(&a2, &det.automaton, 8).unwrap();
        assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn bounded_equivalence_catches_flipped_acceptance() {
        let a2 = build_a(2);
        let det = determinize(&a2).unwrap();
        // Flip one accepting flag.
        let mut acc = det.automaton.accepting().clone();
        let flip = det.automaton.initial();
        assert!(acc.contains(&flip));
        acc.remove(&flip);
        let broken = det.automaton.with_accepting(acc).unwrap();
        let r = bounded_equivalence(&a2, &broken, 6).unwrap();
        assert_eq!(r.status, CheckStatus::Fail);
        assert!(r.observed.contains("input="), "{:?}", r);
    }

    #[test]
    fn scan_reports_budget_exhaustion() {
        let b2 = crate::witness::build_b(2);
        let det = determinize(&b2).unwrap();
        let opts = CheckOptions { frontier_cap: 4, ..CheckOptions::default() };
        let (results, _) = bounded_agreement("b2", &b2, &det.automaton, 6, &opts).unwrap();
        assert!(results.iter().all(|r| r.status == CheckStatus::Budget), "{results:?}");
    }

    #[test]
    fn product_inequivalence_identical_automata() {
        let det = determinize(&build_a(2)).unwrap();
        assert!(product_inequivalence(&det.automaton, &det.automaton).unwrap().is_none());
    }

    #[test]
    fn product_inequivalence_finds_replayable_counterexample() {
        let det = determinize(&build_a(2)).unwrap();
        let mut acc = det.automaton.accepting().clone();
        let q = *acc.iter().next().unwrap();
        acc.remove(&q);
        let broken = det.automaton.with_accepting(acc).unwrap();
        let w = product_inequivalence(&det.automaton, &broken).unwrap().expect("inequivalent");
        let x = sim::didpda_accepts(&det.automaton, &w).unwrap();
        let y = sim::didpda_accepts(&broken, &w).unwrap();
        assert_ne!(x, y);
    }

    #[test]
    fn product_inequivalence_counterexample_is_shortest_for_flipped_initial() {
        // Flipping acceptance of the initial state is already visible on the
        // empty string.
        let det = determinize(&build_a(2)).unwrap();
        let mut acc = det.automaton.accepting().clone();
        acc.remove(&det.automaton.initial());
        let broken = det.automaton.with_accepting(acc).unwrap();
        let w = product_inequivalence(&det.automaton, &broken).unwrap().unwrap();
        assert_eq!(w.len(), 0);
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let det_a = determinize(&build_a(2)).unwrap();
        let det_b12 = determinize(&build_b12()).unwrap();
        assert!(matches!(
            product_inequivalence(&det_a.automaton, &det_b12.automaton),
            Err(VerifyError::AlphabetMismatch)
        ));
        assert!(matches!(
            scan_agreement(&build_a(2), &det_b12.automaton, 4, &CheckOptions::default()),
            Err(VerifyError::AlphabetMismatch)
        ));
    }

    #[test]
    fn quick_suite_passes_and_renders() {
        let report = run_suite(&SuiteProfile::quick()).unwrap();
        for r in &report.results {
            assert!(r.passed(), "failed: {} expected={} got={}", r.id, r.expected, r.observed);
        }
        let rendered = report.render();
        assert!(rendered.ends_with("ALL PASS\n"));
    }

    #[test]
    fn malformed_profile_is_a_configuration_error() {
        let mut p = SuiteProfile::quick();
        p.thm4_s_values = vec![17];
        assert!(matches!(run_suite(&p), Err(VerifyError::Config(_))));
    }
}
