//! Behavior relations over automaton states.
//!
//! A relation on `n` states is a set of pairs `(i, j)` stored as an
//! `n*n`-bit vector in row-major order, so a relation doubles as a compact
//! identity for determinized states.

use std::fmt;

use thiserror::Error;

/// Errors from relation algebra.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("relations have different state counts: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
}

/// A subset of `Q x Q` for `Q = {0, .., n-1}`, packed into a `u64`.
///
/// Bit `i*n + j` is set iff the pair `(i, j)` is in the relation, which
/// limits `n` to [`Relation::MAX_STATES`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: u8,
    bits: u64,
}

impl Relation {
    /// Largest supported state count (`n*n` bits must fit in a `u64`).
    pub const MAX_STATES: usize = 8;

    fn assert_n(n: usize) {
        assert!(
            n >= 1 && n <= Self::MAX_STATES,
            "relation state count {n} outside 1..={}",
            Self::MAX_STATES
        );
    }

    fn mask(n: usize) -> u64 {
        if n * n == 64 {
            u64::MAX
        } else {
            (1u64 << (n * n)) - 1
        }
    }

    /// The empty relation on `n` states.
    pub fn empty(n: usize) -> Self {
        Self::assert_n(n);
        Relation { n: n as u8, bits: 0 }
    }

    /// The full relation `Q x Q`.
    pub fn full(n: usize) -> Self {
        Self::assert_n(n);
        Relation { n: n as u8, bits: Self::mask(n) }
    }

    /// The diagonal relation `{(i, i) : i in Q}`.
    pub fn diagonal(n: usize) -> Self {
        Self::assert_n(n);
        let mut bits = 0u64;
        for i in 0..n {
            bits |= 1u64 << (i * n + i);
        }
        Relation { n: n as u8, bits }
    }

    /// Builds a relation from explicit pairs.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Self {
        let mut r = Self::empty(n);
        for (i, j) in pairs {
            r = r.insert(i, j);
        }
        r
    }

    /// Reconstructs a relation from its packed bits; bits outside `n*n` must be zero.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self::assert_n(n);
        assert_eq!(bits & !Self::mask(n), 0, "relation bits beyond n*n");
        Relation { n: n as u8, bits }
    }

    /// Number of states the relation ranges over.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Packed row-major bit vector.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    fn check_pair(&self, i: usize, j: usize) {
        let n = self.n();
        assert!(i < n && j < n, "pair ({i},{j}) out of range for n={n}");
    }

    /// Membership test for the pair `(i, j)`.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.check_pair(i, j);
        self.bits >> (i * self.n() + j) & 1 == 1
    }

    /// Returns the relation with `(i, j)` added.
    pub fn insert(&self, i: usize, j: usize) -> Self {
        self.check_pair(i, j);
        Relation { n: self.n, bits: self.bits | 1u64 << (i * self.n() + j) }
    }

    /// Returns the relation with `(i, j)` deleted.
    pub fn remove(&self, i: usize, j: usize) -> Self {
        self.check_pair(i, j);
        Relation { n: self.n, bits: self.bits & !(1u64 << (i * self.n() + j)) }
    }

    /// Row `i` as an `n`-bit mask of successors.
    pub(crate) fn row(&self, i: usize) -> u64 {
        let n = self.n();
        self.bits >> (i * n) & (if n == 8 { 0xff } else { (1 << n) - 1 })
    }

    /// Relational composition: `{(i, k) : exists j, (i,j) in self and (j,k) in other}`.
    pub fn compose(&self, other: &Relation) -> Result<Relation, RelationError> {
        if self.n != other.n {
            return Err(RelationError::SizeMismatch { left: self.n(), right: other.n() });
        }
        let n = self.n();
        let mut bits = 0u64;
        for i in 0..n {
            let mut js = self.row(i);
            let mut acc = 0u64;
            while js != 0 {
                let j = js.trailing_zeros() as usize;
                js &= js - 1;
                acc |= other.row(j);
            }
            bits |= acc << (i * n);
        }
        Ok(Relation { n: self.n, bits })
    }

    /// True iff the relation has no pairs.
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Number of pairs in the relation.
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Pairs in lexicographic `(i, j)` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.contains(i, j))
    }

    /// Pairs missing from the relation, in lexicographic `(i, j)` order.
    pub fn excluded_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !self.contains(i, j))
    }

    /// All relations on `n` states, ordered by packed bits.
    pub fn all(n: usize) -> impl Iterator<Item = Relation> {
        Self::assert_n(n);
        (0..=Self::mask(n)).map(move |bits| Relation { n: n as u8, bits })
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, j)) in self.pairs().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({i},{j})")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        assert_eq!(Relation::full(2).len(), 4);
        assert_eq!(Relation::diagonal(2), Relation::from_pairs(2, [(0, 0), (1, 1)]));
        assert!(Relation::empty(3).is_empty());
        assert_eq!(Relation::full(8).len(), 64);
    }

    #[test]
    fn remove_is_set_difference() {
        let r = Relation::full(2).remove(0, 0);
        assert_eq!(r, Relation::from_pairs(2, [(0, 1), (1, 0), (1, 1)]));
    }

    #[test]
    fn compose_identity_both_sides_exhaustive_n2() {
        let d = Relation::diagonal(2);
        for r in Relation::all(2) {
            assert_eq!(d.compose(&r).unwrap(), r);
            assert_eq!(r.compose(&d).unwrap(), r);
        }
    }

    #[test]
    fn compose_full_with_full_is_full() {
        let f = Relation::full(2);
        assert_eq!(f.compose(&f).unwrap(), f);
    }

    #[test]
    fn compose_associative_exhaustive_n2() {
        let all: Vec<_> = Relation::all(2).collect();
        for a in &all {
            for b in &all {
                let ab = a.compose(b).unwrap();
                for c in &all {
                    let bc = b.compose(c).unwrap();
                    assert_eq!(ab.compose(c).unwrap(), a.compose(&bc).unwrap());
                }
            }
        }
    }

    #[test]
    fn remove_shrinks_by_at_most_one() {
        for r in Relation::all(2) {
            for i in 0..2 {
                for j in 0..2 {
                    let s = r.remove(i, j);
                    assert_eq!(s.bits() & !r.bits(), 0, "remove must not add pairs");
                    let want = if r.contains(i, j) { r.len() - 1 } else { r.len() };
                    assert_eq!(s.len(), want);
                }
            }
        }
    }

    #[test]
    fn compose_rejects_mismatched_sizes() {
        let err = Relation::full(2).compose(&Relation::full(3)).unwrap_err();
        assert_eq!(err, RelationError::SizeMismatch { left: 2, right: 3 });
    }

    #[test]
    fn display_lists_pairs_in_lex_order() {
        let r = Relation::from_pairs(2, [(1, 0), (0, 1)]);
        assert_eq!(r.to_string(), "{(0,1),(1,0)}");
        assert_eq!(Relation::empty(2).to_string(), "{}");
    }
}
