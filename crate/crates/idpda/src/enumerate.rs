//! Exhaustive and random generation of well-nested strings.
//!
//! Strings of one exact length are generated in depth-first order through
//! the unique decomposition `W = eps | c W | a W b W`, where `a W b` is the
//! first return to the surface. Consecutive strings therefore share long
//! prefixes, which the scan drivers exploit.

use rand::Rng;

use crate::alphabet::{Alphabet, InputString, Sym};

/// All well-nested strings of one exact length over a choice of symbols,
/// stored back to back in one flat buffer.
pub struct WellNestedSet {
    len: usize,
    count: usize,
    flat: Vec<Sym>,
}

enum Cont<'a> {
    Done,
    /// Emit the symbol, then generate a segment of the given length, then
    /// continue with the parent continuation.
    Emit(Sym, usize, &'a Cont<'a>),
}

struct Gen<'a> {
    neutrals: &'a [Sym],
    opens: &'a [Sym],
    closes: &'a [Sym],
    buf: Vec<Sym>,
    flat: Vec<Sym>,
    count: usize,
}

impl Gen<'_> {
    fn segment(&mut self, len: usize, cont: &Cont<'_>) {
        if len == 0 {
            self.resume(cont);
            return;
        }
        for i in 0..self.neutrals.len() {
            self.buf.push(self.neutrals[i]);
            self.segment(len - 1, cont);
            self.buf.pop();
        }
        if len >= 2 {
            for inner in 0..=len - 2 {
                for oi in 0..self.opens.len() {
                    for ci in 0..self.closes.len() {
                        self.buf.push(self.opens[oi]);
                        let next = Cont::Emit(self.closes[ci], len - 2 - inner, cont);
                        self.segment(inner, &next);
                        self.buf.pop();
                    }
                }
            }
        }
    }

    fn resume(&mut self, cont: &Cont<'_>) {
        match *cont {
            Cont::Done => {
                self.flat.extend_from_slice(&self.buf);
                self.count += 1;
            }
            Cont::Emit(sym, len, parent) => {
                self.buf.push(sym);
                self.segment(len, parent);
                self.buf.pop();
            }
        }
    }
}

impl WellNestedSet {
    /// Generates over all symbols of the alphabet.
    pub fn generate(a: &Alphabet, len: usize) -> Self {
        Self::generate_over(a, &a.neutral_syms(), &a.open_syms(), &a.close_syms(), len)
    }

    /// Generates over an explicit choice of symbols per class.
    pub fn generate_over(
        _a: &Alphabet,
        neutrals: &[Sym],
        opens: &[Sym],
        closes: &[Sym],
        len: usize,
    ) -> Self {
        let mut gen = Gen {
            neutrals,
            opens,
            closes,
            buf: Vec::with_capacity(len),
            flat: Vec::new(),
            count: 0,
        };
        gen.segment(len, &Cont::Done);
        WellNestedSet { len, count: gen.count, flat: gen.flat }
    }

    pub fn string_len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The strings in generation (depth-first) order.
    pub fn iter(&self) -> impl Iterator<Item = &[Sym]> + '_ {
        StringsIter { set: self, next: 0 }
    }

    /// Slices of whole strings, at most `strings_per_chunk` per slice.
    pub fn chunks(&self, strings_per_chunk: usize) -> Vec<&[Sym]> {
        assert!(strings_per_chunk > 0);
        if self.len == 0 {
            // Only the empty string lives here; represent it as one empty chunk.
            return if self.count > 0 { vec![&[]] } else { vec![] };
        }
        self.flat.chunks(strings_per_chunk * self.len).collect()
    }
}

struct StringsIter<'a> {
    set: &'a WellNestedSet,
    next: usize,
}

impl<'a> Iterator for StringsIter<'a> {
    type Item = &'a [Sym];

    fn next(&mut self) -> Option<&'a [Sym]> {
        if self.next >= self.set.count {
            return None;
        }
        self.next += 1;
        let l = self.set.len;
        Some(&self.set.flat[(self.next - 1) * l..self.next * l])
    }
}

/// Number of well-nested strings of one exact length, saturating at
/// `u64::MAX`.
pub fn count_well_nested(a: &Alphabet, len: usize) -> u64 {
    let nn = a.neutral_syms().len() as u64;
    let brackets = (a.open_syms().len() * a.close_syms().len()) as u64;
    let mut table = vec![0u64; len + 1];
    table[0] = 1;
    for l in 1..=len {
        let mut total = nn.saturating_mul(table[l - 1]);
        if l >= 2 {
            for inner in 0..=l - 2 {
                let pair = table[inner].saturating_mul(table[l - 2 - inner]);
                total = total.saturating_add(brackets.saturating_mul(pair));
            }
        }
        table[l] = total;
    }
    table[len]
}

/// A uniformly-structured random well-nested string of the exact length, or
/// `None` when no such string exists (odd lengths without neutral symbols).
pub fn random_well_nested<R: Rng>(a: &Alphabet, len: usize, rng: &mut R) -> Option<InputString> {
    let neutrals = a.neutral_syms();
    let opens = a.open_syms();
    let closes = a.close_syms();
    if opens.is_empty() != closes.is_empty() {
        return None;
    }
    fn feasible(len: usize, have_neutral: bool, have_brackets: bool) -> bool {
        match (have_neutral, have_brackets) {
            (true, _) => true,
            (false, true) => len % 2 == 0,
            (false, false) => len == 0,
        }
    }
    if !feasible(len, !neutrals.is_empty(), !opens.is_empty()) {
        return None;
    }
    let mut out = Vec::with_capacity(len);
    fn gen<R: Rng>(
        out: &mut Vec<Sym>,
        len: usize,
        neutrals: &[Sym],
        opens: &[Sym],
        closes: &[Sym],
        rng: &mut R,
    ) {
        if len == 0 {
            return;
        }
        let have_n = !neutrals.is_empty();
        let can_bracket = !opens.is_empty() && len >= 2;
        let pick_neutral = if have_n && can_bracket {
            rng.gen_bool(0.5)
        } else {
            have_n && feasible(len - 1, have_n, !opens.is_empty())
        };
        if pick_neutral {
            out.push(neutrals[rng.gen_range(0..neutrals.len())]);
            gen(out, len - 1, neutrals, opens, closes, rng);
        } else {
            let mut inner;
            loop {
                inner = rng.gen_range(0..=len - 2);
                if feasible(inner, have_n, true) && feasible(len - 2 - inner, have_n, true) {
                    break;
                }
            }
            out.push(opens[rng.gen_range(0..opens.len())]);
            gen(out, inner, neutrals, opens, closes, rng);
            out.push(closes[rng.gen_range(0..closes.len())]);
            gen(out, len - 2 - inner, neutrals, opens, closes, rng);
        }
    }
    gen(&mut out, len, &neutrals, &opens, &closes, rng);
    Some(InputString::from_syms(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{is_well_nested, Alphabet, InputString};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn a_like() -> Alphabet {
        Alphabet::new(&["-", "#"], &["<"], &[">"]).unwrap()
    }

    #[test]
    fn counts_match_generation() {
        let a = a_like();
        // Two neutrals and one bracket pair give the Catalan-shifted counts.
        let expected = [1u64, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (len, &want) in expected.iter().enumerate() {
            assert_eq!(count_well_nested(&a, len), want, "count at len {len}");
            let set = WellNestedSet::generate(&a, len);
            assert_eq!(set.count() as u64, want, "generated at len {len}");
        }
    }

    #[test]
    fn generated_strings_are_well_nested_and_distinct() {
        let a = Alphabet::new(&["-"], &["<"], &[">", ">>"]).unwrap();
        for len in 0..=7 {
            let set = WellNestedSet::generate(&a, len);
            let mut seen = std::collections::BTreeSet::new();
            for tokens in set.iter() {
                assert_eq!(tokens.len(), len);
                let w = InputString::from_syms(tokens.to_vec());
                assert!(is_well_nested(&a, &w).unwrap());
                assert!(seen.insert(tokens.to_vec()), "duplicate {tokens:?}");
            }
            assert_eq!(seen.len(), set.count());
        }
    }

    #[test]
    fn bracket_only_alphabets_have_even_lengths_only() {
        let a = Alphabet::new::<&str>(&[], &["<", "<<"], &[">", ">>"]).unwrap();
        assert_eq!(count_well_nested(&a, 3), 0);
        assert_eq!(WellNestedSet::generate(&a, 3).count(), 0);
        assert_eq!(count_well_nested(&a, 2), 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(random_well_nested(&a, 3, &mut rng).is_none());
        assert!(random_well_nested(&a, 4, &mut rng).is_some());
    }

    #[test]
    fn chunks_cover_everything_in_order() {
        let a = a_like();
        let set = WellNestedSet::generate(&a, 6);
        let mut joined = Vec::new();
        for chunk in set.chunks(7) {
            joined.extend_from_slice(chunk);
        }
        assert_eq!(joined.len(), set.count() * 6);
    }

    proptest! {
        #[test]
        fn random_strings_are_well_nested(len in 0usize..=14, seed in any::<u64>()) {
            let a = a_like();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let w = random_well_nested(&a, len, &mut rng).unwrap();
            prop_assert_eq!(w.len(), len);
            prop_assert!(is_well_nested(&a, &w).unwrap());
        }
    }
}
