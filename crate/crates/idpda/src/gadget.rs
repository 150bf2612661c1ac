//! Builders for the special string families used to certify witness
//! automata: per-pair erasers `u_i`/`v_j`, relation realizers `w_R`, state
//! filters `y_i`, the anchor pair `x`/`x'`, and the stack-counting families
//! `f`, `g` and `h`.

use std::fmt;

use thiserror::Error;

use crate::alphabet::{Alphabet, InputString, Sym};
use crate::relation::Relation;
use crate::witness;

/// Errors raised by the gadget builders.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("state index {i} out of range for n={n}")]
    StateOutOfRange { i: usize, n: usize },
    #[error("relation ranges over {got} states, expected {want}")]
    RelationSize { got: usize, want: usize },
    #[error("the f family requires non-empty relations")]
    EmptyRelation,
    #[error("expected {want} bracket indices, got {got}")]
    IndexCount { want: usize, got: usize },
    #[error("bracket index {l} out of range for s={s}")]
    BracketOutOfRange { l: usize, s: usize },
    #[error("position {k} out of range 1..={max}")]
    PositionOutOfRange { k: usize, max: usize },
    #[error("bit index {x} out of range 0..={max}")]
    BitOutOfRange { x: usize, max: usize },
    #[error("invalid witness parameters: {0}")]
    Params(#[from] witness::WitnessError),
}

/// A token sequence produced by a named construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetString {
    alphabet: Alphabet,
    tokens: InputString,
    provenance: String,
}

impl GadgetString {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn tokens(&self) -> &InputString {
        &self.tokens
    }

    /// Construction name and parameters.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Concatenated token names.
    pub fn render(&self) -> String {
        crate::format::render_string(&self.alphabet, &self.tokens)
    }
}

impl fmt::Display for GadgetString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Token handles for the alphabet a gadget is built over.
struct Vocab {
    alphabet: Alphabet,
    dash: Sym,
    hash: Sym,
    opens: Vec<Sym>,
    close: Sym,
    dbl_close: Option<Sym>,
    trp_close: Option<Sym>,
}

impl Vocab {
    fn for_alphabet(alphabet: Alphabet) -> Self {
        let dash = alphabet.sym("-").expect("gadget alphabet has '-'");
        let hash = alphabet.sym("#").expect("gadget alphabet has '#'");
        let opens = if let Some(single) = alphabet.sym("<") {
            vec![single]
        } else {
            (0..)
                .map(|l| alphabet.sym(&format!("<{l}")))
                .take_while(Option::is_some)
                .flatten()
                .collect()
        };
        assert!(!opens.is_empty(), "gadget alphabet has a left bracket");
        let close = alphabet.sym(">").expect("gadget alphabet has '>'");
        let dbl_close = alphabet.sym(">>");
        let trp_close = alphabet.sym(">>>");
        Vocab { alphabet, dash, hash, opens, close, dbl_close, trp_close }
    }

    fn for_a(n: usize) -> Self {
        Self::for_alphabet(witness::build_a(n).alphabet().clone())
    }

    fn for_b(n: usize) -> Self {
        Self::for_alphabet(witness::build_b(n).alphabet().clone())
    }

    fn for_bns(n: usize, s: usize) -> Result<Self, GadgetError> {
        Ok(Self::for_alphabet(witness::build_bns(n, s)?.alphabet().clone()))
    }

    fn check_state(&self, i: usize, n: usize) -> Result<(), GadgetError> {
        if i >= n {
            return Err(GadgetError::StateOutOfRange { i, n });
        }
        Ok(())
    }

    /// `u_i = (-)^i < (-)^(n-i)`: keeps the state, pushes 0 exactly when
    /// entered in state `i`.
    fn emit_u(&self, out: &mut Vec<Sym>, i: usize, n: usize) {
        out.extend(std::iter::repeat(self.dash).take(i));
        out.push(self.opens[0]);
        out.extend(std::iter::repeat(self.dash).take(n - i));
    }

    /// `v_j = (-)^j > (-)^(n-j)`: keeps the state, rejects exactly when
    /// entered in state `j` with 0 on top of the stack.
    fn emit_v(&self, out: &mut Vec<Sym>, j: usize, n: usize) {
        out.extend(std::iter::repeat(self.dash).take(j));
        out.push(self.close);
        out.extend(std::iter::repeat(self.dash).take(n - j));
    }

    /// `w_R`: `#` realizes the full relation, and each excluded pair is
    /// erased by one `u_i .. v_j` wrapping, innermost first.
    fn emit_w(&self, out: &mut Vec<Sym>, r: &Relation, n: usize) {
        let excluded: Vec<(usize, usize)> = r.excluded_pairs().collect();
        for &(i, _) in excluded.iter().rev() {
            self.emit_u(out, i, n);
        }
        out.push(self.hash);
        for &(_, j) in excluded.iter() {
            self.emit_v(out, j, n);
        }
    }

    fn emit_y(&self, out: &mut Vec<Sym>, i: usize, n: usize) {
        self.emit_w(out, &Relation::empty(n).insert(i, i), n);
    }

    fn finish(self, tokens: Vec<Sym>, provenance: String) -> GadgetString {
        GadgetString {
            alphabet: self.alphabet,
            tokens: InputString::from_syms(tokens),
            provenance,
        }
    }
}

fn check_relation(r: &Relation, n: usize) -> Result<(), GadgetError> {
    if r.n() != n {
        return Err(GadgetError::RelationSize { got: r.n(), want: n });
    }
    Ok(())
}

/// The string `u_i` over the alphabet of `A_n`.
pub fn gadget_u(i: usize, n: usize) -> Result<GadgetString, GadgetError> {
    let v = Vocab::for_a(n);
    v.check_state(i, n)?;
    let mut out = Vec::new();
    v.emit_u(&mut out, i, n);
    Ok(v.finish(out, format!("u(i={i},n={n})")))
}

/// The string `v_j` over the alphabet of `A_n`.
pub fn gadget_v(j: usize, n: usize) -> Result<GadgetString, GadgetError> {
    let v = Vocab::for_a(n);
    v.check_state(j, n)?;
    let mut out = Vec::new();
    v.emit_v(&mut out, j, n);
    Ok(v.finish(out, format!("v(j={j},n={n})")))
}

/// A well-nested string whose behavior relation on `A_n` is exactly `R`.
pub fn gadget_w(r: &Relation, n: usize) -> Result<GadgetString, GadgetError> {
    check_relation(r, n)?;
    let v = Vocab::for_a(n);
    let mut out = Vec::new();
    v.emit_w(&mut out, r, n);
    Ok(v.finish(out, format!("w(R={r},n={n})")))
}

/// The state filter `y_i = w_R for R = {(i,i)}`: survives only runs that
/// enter and leave in state `i`.
pub fn gadget_y(i: usize, n: usize) -> Result<GadgetString, GadgetError> {
    let v = Vocab::for_a(n);
    v.check_state(i, n)?;
    let mut out = Vec::new();
    v.emit_y(&mut out, i, n);
    Ok(v.finish(out, format!("y(i={i},n={n})")))
}

/// The explicit bracket form `(<>-)^i - (<>-)^(n-i)`: also survives only
/// entry state `i`, but ends one decrement further along.
pub fn gadget_y_explicit(i: usize, n: usize) -> Result<GadgetString, GadgetError> {
    let v = Vocab::for_a(n);
    v.check_state(i, n)?;
    let mut out = Vec::new();
    let block = |out: &mut Vec<Sym>| {
        out.push(v.opens[0]);
        out.push(v.close);
        out.push(v.dash);
    };
    for _ in 0..i {
        block(&mut out);
    }
    out.push(v.dash);
    for _ in 0..(n - i) {
        block(&mut out);
    }
    Ok(v.finish(out, format!("y-explicit(i={i},n={n})")))
}

/// The anchor pair: the push block `x` over `{-,<}` and the pop block `x'`
/// over `{-,>}` obtained by splitting the diagonal realizer at its `#`.
/// Reading `x # x'` realizes the diagonal relation on `A_n`.
pub fn gadget_anchors(n: usize) -> Result<(GadgetString, GadgetString), GadgetError> {
    let diag = Relation::diagonal(n);
    let excluded: Vec<(usize, usize)> = diag.excluded_pairs().collect();
    let vp = Vocab::for_a(n);
    let mut push = Vec::new();
    for &(i, _) in excluded.iter().rev() {
        vp.emit_u(&mut push, i, n);
    }
    let x_push = vp.finish(push, format!("anchor-push(n={n})"));
    let vq = Vocab::for_a(n);
    let mut pop = Vec::new();
    for &(_, j) in excluded.iter() {
        vq.emit_v(&mut pop, j, n);
    }
    let x_pop = vq.finish(pop, format!("anchor-pop(n={n})"));
    Ok((x_push, x_pop))
}

/// `f = <_{l_1} w_{R_1} <_{l_2} .. w_{R_m} <_{l_{m+1}}`: alternating
/// unmatched left brackets and relation realizers. All relations must be
/// non-empty and there must be one more bracket index than relations.
/// For `s = 1` the plain bracket `<` is used and all indices must be 0.
pub fn gadget_f(
    relations: &[Relation],
    indices: &[usize],
    n: usize,
    s: usize,
) -> Result<GadgetString, GadgetError> {
    if indices.len() != relations.len() + 1 {
        return Err(GadgetError::IndexCount { want: relations.len() + 1, got: indices.len() });
    }
    for r in relations {
        check_relation(r, n)?;
        if r.is_empty() {
            return Err(GadgetError::EmptyRelation);
        }
    }
    for &l in indices {
        if l >= s {
            return Err(GadgetError::BracketOutOfRange { l, s });
        }
    }
    let v = if s == 1 { Vocab::for_b(n) } else { Vocab::for_bns(n, s)? };
    let mut out = Vec::new();
    for (t, r) in relations.iter().enumerate() {
        out.push(v.opens[indices[t]]);
        v.emit_w(&mut out, r, n);
    }
    out.push(v.opens[indices[relations.len()]]);
    let rels: Vec<String> = relations.iter().map(Relation::to_string).collect();
    Ok(v.finish(out, format!("f(R=[{}],l={indices:?},n={n},s={s})", rels.join(";"))))
}

/// `g = (#>>)^(m-k) # y_0 >> y_j # y_1 >> y_i (#>>)^(k-1)`: closes the
/// `m+1` unmatched brackets of an `f` string and tests whether the `k`-th
/// relation contains `(i, j)`.
pub fn gadget_g(
    i: usize,
    j: usize,
    k: usize,
    m: usize,
    n: usize,
) -> Result<GadgetString, GadgetError> {
    let v = Vocab::for_b(n);
    v.check_state(i, n)?;
    v.check_state(j, n)?;
    v.check_state(1, n)?;
    if k < 1 || k > m {
        return Err(GadgetError::PositionOutOfRange { k, max: m });
    }
    let dbl = v.dbl_close.expect("B_n alphabet has '>>'");
    let mut out = Vec::new();
    for _ in 0..(m - k) {
        out.push(v.hash);
        out.push(dbl);
    }
    out.push(v.hash);
    v.emit_y(&mut out, 0, n);
    out.push(dbl);
    v.emit_y(&mut out, j, n);
    out.push(v.hash);
    v.emit_y(&mut out, 1, n);
    out.push(dbl);
    v.emit_y(&mut out, i, n);
    for _ in 0..(k - 1) {
        out.push(v.hash);
        out.push(dbl);
    }
    Ok(v.finish(out, format!("g(i={i},j={j},k={k},m={m},n={n})")))
}

/// `h = (#>>)^(m-k+1) # y_(x mod n) >>> y_(x div n) (#>>)^(k-1)`: closes the
/// `m+1` unmatched brackets of an `f` string and tests whether bit `x` of
/// the `k`-th bracket index is set.
pub fn gadget_h(
    k: usize,
    x: usize,
    m: usize,
    n: usize,
    s: usize,
) -> Result<GadgetString, GadgetError> {
    if k < 1 || k > m + 1 {
        return Err(GadgetError::PositionOutOfRange { k, max: m + 1 });
    }
    if s < 2 {
        return Err(GadgetError::BitOutOfRange { x, max: 0 });
    }
    let max_bit = witness::bracket_bit_count(s) - 1;
    if x > max_bit || x / n >= n {
        return Err(GadgetError::BitOutOfRange { x, max: max_bit });
    }
    let v = Vocab::for_bns(n, s)?;
    let dbl = v.dbl_close.expect("B_{n,s} alphabet has '>>'");
    let trp = v.trp_close.expect("B_{n,s} alphabet has '>>>'");
    let mut out = Vec::new();
    for _ in 0..(m + 1 - k) {
        out.push(v.hash);
        out.push(dbl);
    }
    out.push(v.hash);
    v.emit_y(&mut out, x % n, n);
    out.push(trp);
    v.emit_y(&mut out, x / n, n);
    for _ in 0..(k - 1) {
        out.push(v.hash);
        out.push(dbl);
    }
    Ok(v.finish(out, format!("h(k={k},x={x},m={m},n={n},s={s})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{self, SymbolClass};
    use crate::sim;
    use crate::witness::{build_a, build_b};
    use rand::{Rng, SeedableRng};

    #[test]
    fn u_and_v_token_patterns() {
        assert_eq!(gadget_u(0, 2).unwrap().render(), "<--");
        assert_eq!(gadget_u(1, 2).unwrap().render(), "-<-");
        assert_eq!(gadget_v(1, 2).unwrap().render(), "->-");
        assert_eq!(gadget_u(3, 2).unwrap_err(), GadgetError::StateOutOfRange { i: 3, n: 2 });
    }

    #[test]
    fn w_of_full_relation_is_hash() {
        assert_eq!(gadget_w(&Relation::full(2), 2).unwrap().render(), "#");
    }

    #[test]
    fn w_wraps_excluded_pairs_in_lex_order() {
        // Excluded pairs of {(1,1)} are (0,0), (0,1), (1,0): the u block is
        // emitted in reverse, the v block forward.
        let w = gadget_w(&Relation::from_pairs(2, [(1, 1)]), 2).unwrap();
        let mut want = Vec::new();
        for part in [
            gadget_u(1, 2).unwrap(),
            gadget_u(0, 2).unwrap(),
            gadget_u(0, 2).unwrap(),
        ] {
            want.extend_from_slice(part.tokens().tokens());
        }
        want.extend_from_slice(gadget_w(&Relation::full(2), 2).unwrap().tokens().tokens());
        for part in [
            gadget_v(0, 2).unwrap(),
            gadget_v(1, 2).unwrap(),
            gadget_v(0, 2).unwrap(),
        ] {
            want.extend_from_slice(part.tokens().tokens());
        }
        assert_eq!(w.tokens().tokens(), want);
    }

    #[test]
    fn w_realizes_every_relation_n2_exhaustively() {
        let a2 = build_a(2);
        for r in Relation::all(2) {
            let w = gadget_w(&r, 2).unwrap();
            assert!(alphabet::is_well_nested(w.alphabet(), w.tokens()).unwrap());
            assert_eq!(sim::behavior_relation(&a2, w.tokens()).unwrap(), r, "w_R failed for {r}");
        }
    }

    #[test]
    fn w_realizes_sampled_relations_n3() {
        let a3 = build_a(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let r = Relation::from_bits(3, rng.gen::<u64>() & ((1 << 9) - 1));
            let w = gadget_w(&r, 3).unwrap();
            assert_eq!(sim::behavior_relation(&a3, w.tokens()).unwrap(), r);
        }
    }

    #[test]
    fn wrapping_removes_exactly_one_pair() {
        let a2 = build_a(2);
        for r in Relation::all(2) {
            let w = gadget_w(&r, 2).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let mut tokens = gadget_u(i, 2).unwrap().tokens().tokens().to_vec();
                    tokens.extend_from_slice(w.tokens().tokens());
                    tokens.extend_from_slice(gadget_v(j, 2).unwrap().tokens().tokens());
                    let wrapped = InputString::from_syms(tokens);
                    assert_eq!(
                        sim::behavior_relation(&a2, &wrapped).unwrap(),
                        sim::behavior_relation(&a2, w.tokens()).unwrap().remove(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn y_filters_to_one_state() {
        for n in [2usize, 3] {
            let a = build_a(n);
            for i in 0..n {
                let y = gadget_y(i, n).unwrap();
                assert_eq!(
                    sim::behavior_relation(&a, y.tokens()).unwrap(),
                    Relation::empty(n).insert(i, i)
                );
            }
        }
        let y = gadget_y(1, 2).unwrap();
        let w = gadget_w(&Relation::from_pairs(2, [(1, 1)]), 2).unwrap();
        assert_eq!(y.tokens(), w.tokens());
    }

    #[test]
    fn y_explicit_pattern_and_behavior() {
        let y = gadget_y_explicit(1, 2).unwrap();
        assert_eq!(y.render(), "<>--<>-");
        // The explicit form admits at most the entry state i; the exit state
        // is recorded, not pinned. For i = 0 even that entry dies, because
        // the last bracket pair is reached in state 0: the normative w_R
        // form is the one used wherever a state filter is required.
        let a2 = build_a(2);
        for (i, n) in [(0usize, 2usize), (1, 2), (0, 3), (1, 3), (2, 3)] {
            let a = build_a(n);
            let y = gadget_y_explicit(i, n).unwrap();
            let r = sim::behavior_relation(&a, y.tokens()).unwrap();
            if i == 0 {
                assert!(r.is_empty(), "n={n} i=0 gave {r}");
            } else {
                assert_eq!(r.len(), 1, "n={n} i={i} gave {r}");
                let (entry, exit) = r.pairs().next().unwrap();
                assert_eq!(entry, i);
                assert_eq!(exit, (i + n - 1) % n);
            }
        }
        let _ = &a2;
    }

    #[test]
    fn anchors_realize_the_diagonal() {
        for n in [2usize, 3] {
            let (x_push, x_pop) = gadget_anchors(n).unwrap();
            let a = build_a(n);
            let al = a.alphabet();
            let hash = InputString::from_names(al, &["#"]).unwrap();
            let whole = InputString::concat([x_push.tokens(), &hash, x_pop.tokens()]);
            assert_eq!(sim::behavior_relation(&a, &whole).unwrap(), Relation::diagonal(n));
            // x is over {-,<} only, x' over {-,>} only.
            let close = al.sym(">").unwrap();
            let open = al.sym("<").unwrap();
            let hash_sym = al.sym("#").unwrap();
            assert!(x_push.tokens().tokens().iter().all(|&s| s != close && s != hash_sym));
            assert!(x_pop.tokens().tokens().iter().all(|&s| s != open && s != hash_sym));
            let opens =
                x_push.tokens().tokens().iter().filter(|&&s| s == open).count();
            let closes =
                x_pop.tokens().tokens().iter().filter(|&&s| s == close).count();
            assert_eq!(opens, n * n - n);
            assert_eq!(opens, closes);
        }
    }

    #[test]
    fn f_examples_and_errors() {
        let f = gadget_f(&[Relation::full(2)], &[0, 0], 2, 1).unwrap();
        assert_eq!(f.render(), "<#<");

        let f = gadget_f(&[Relation::full(2)], &[1, 0], 2, 2).unwrap();
        assert_eq!(f.render(), "<1#<0");

        assert_eq!(
            gadget_f(&[Relation::empty(2)], &[0, 0], 2, 1).unwrap_err(),
            GadgetError::EmptyRelation
        );
        assert_eq!(
            gadget_f(&[Relation::full(2)], &[0], 2, 1).unwrap_err(),
            GadgetError::IndexCount { want: 2, got: 1 }
        );
        assert_eq!(
            gadget_f(&[Relation::full(2)], &[0, 1], 2, 1).unwrap_err(),
            GadgetError::BracketOutOfRange { l: 1, s: 1 }
        );
    }

    #[test]
    fn f_has_m_plus_one_unmatched_opens() {
        let rels = vec![Relation::full(2), Relation::diagonal(2), Relation::full(2).remove(1, 0)];
        let f = gadget_f(&rels, &[0, 0, 0, 0], 2, 1).unwrap();
        let al = f.alphabet();
        let mut depth = 0i64;
        for &sym in f.tokens().tokens() {
            match al.class(sym).unwrap() {
                SymbolClass::Open => depth += 1,
                SymbolClass::Close => depth -= 1,
                SymbolClass::Neutral => {}
            }
        }
        assert_eq!(depth, 4);
    }

    #[test]
    fn g_example_and_surplus() {
        let g = gadget_g(0, 0, 1, 1, 2).unwrap();
        let v = Vocab::for_b(2);
        let mut want = vec![v.hash];
        v.emit_y(&mut want, 0, 2);
        want.push(v.dbl_close.unwrap());
        v.emit_y(&mut want, 0, 2);
        want.push(v.hash);
        v.emit_y(&mut want, 1, 2);
        want.push(v.dbl_close.unwrap());
        v.emit_y(&mut want, 0, 2);
        assert_eq!(g.tokens().tokens(), want);

        // The close surplus matches the open surplus of the f strings.
        for (k, m) in [(1usize, 1usize), (1, 3), (2, 3), (3, 3)] {
            let g = gadget_g(1, 0, k, m, 2).unwrap();
            let al = g.alphabet();
            let mut depth = 0i64;
            for &sym in g.tokens().tokens() {
                match al.class(sym).unwrap() {
                    SymbolClass::Open => depth += 1,
                    SymbolClass::Close => depth -= 1,
                    SymbolClass::Neutral => {}
                }
            }
            assert_eq!(depth, -((m + 1) as i64));
        }
        assert!(gadget_g(0, 0, 2, 1, 2).is_err());
    }

    #[test]
    fn f_g_concatenation_is_well_nested() {
        let b2 = build_b(2);
        let f = gadget_f(&[Relation::full(2)], &[0, 0], 2, 1).unwrap();
        let g = gadget_g(0, 1, 1, 1, 2).unwrap();
        let whole = InputString::concat([f.tokens(), g.tokens()]);
        assert!(alphabet::is_well_nested(b2.alphabet(), &whole).unwrap());
    }

    #[test]
    fn h_example_and_bounds() {
        let h = gadget_h(1, 0, 1, 2, 2).unwrap();
        let v = Vocab::for_bns(2, 2).unwrap();
        let mut want = vec![v.hash, v.dbl_close.unwrap(), v.hash];
        v.emit_y(&mut want, 0, 2);
        want.push(v.trp_close.unwrap());
        v.emit_y(&mut want, 0, 2);
        assert_eq!(h.tokens().tokens(), want);

        // Bit index past the encoding width is rejected; so is x = n^2 if it
        // were ever representable.
        assert!(gadget_h(1, 1, 1, 2, 2).is_err());
        assert!(gadget_h(1, 4, 1, 2, 16).is_err());
        assert!(gadget_h(3, 0, 1, 2, 2).is_err());

        for (k, m, x) in [(1usize, 1usize, 0usize), (2, 1, 1), (1, 2, 1)] {
            let h = gadget_h(k, x, m, 2, 4).unwrap();
            let al = h.alphabet();
            let mut depth = 0i64;
            for &sym in h.tokens().tokens() {
                match al.class(sym).unwrap() {
                    SymbolClass::Open => depth += 1,
                    SymbolClass::Close => depth -= 1,
                    SymbolClass::Neutral => {}
                }
            }
            assert_eq!(depth, -((m + 1) as i64));
        }
    }
}
