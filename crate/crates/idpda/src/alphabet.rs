//! Input alphabets partitioned into neutral symbols, left brackets and
//! right brackets, and token sequences over them.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Which stack action a symbol triggers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    /// Leaves the stack untouched.
    Neutral,
    /// Pushes one stack symbol.
    Open,
    /// Pops one stack symbol.
    Close,
}

/// Index of a token in its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u16);

/// Errors raised while building alphabets or classifying strings.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("token name may not be empty")]
    EmptyName,
    #[error("token name {0:?} contains whitespace")]
    WhitespaceInName(String),
    #[error("duplicate token name {0:?}")]
    DuplicateName(String),
    #[error("token index {0} is not declared in the alphabet")]
    UnknownToken(u16),
}

/// A finite input alphabet; every token belongs to exactly one class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet {
    names: Vec<String>,
    classes: Vec<SymbolClass>,
    lookup: HashMap<String, Sym>,
}

impl Alphabet {
    /// Builds an alphabet from the three class lists. Tokens are indexed in
    /// the given order, neutrals first, then opens, then closes.
    pub fn new<S: AsRef<str>>(
        neutral: &[S],
        open: &[S],
        close: &[S],
    ) -> Result<Alphabet, AlphabetError> {
        let mut names = Vec::new();
        let mut classes = Vec::new();
        let mut lookup = HashMap::new();
        let groups = [
            (neutral, SymbolClass::Neutral),
            (open, SymbolClass::Open),
            (close, SymbolClass::Close),
        ];
        for (group, class) in groups {
            for name in group {
                let name = name.as_ref();
                if name.is_empty() {
                    return Err(AlphabetError::EmptyName);
                }
                if name.chars().any(char::is_whitespace) {
                    return Err(AlphabetError::WhitespaceInName(name.to_string()));
                }
                let sym = Sym(names.len() as u16);
                if lookup.insert(name.to_string(), sym).is_some() {
                    return Err(AlphabetError::DuplicateName(name.to_string()));
                }
                names.push(name.to_string());
                classes.push(class);
            }
        }
        Ok(Alphabet { names, classes, lookup })
    }

    /// Number of tokens.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True iff the alphabet declares no tokens.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Class of a declared token.
    pub fn class(&self, sym: Sym) -> Result<SymbolClass, AlphabetError> {
        self.classes
            .get(sym.0 as usize)
            .copied()
            .ok_or(AlphabetError::UnknownToken(sym.0))
    }

    /// Name of a declared token.
    pub fn name(&self, sym: Sym) -> &str {
        &self.names[sym.0 as usize]
    }

    /// Looks a token up by name.
    pub fn sym(&self, name: &str) -> Option<Sym> {
        self.lookup.get(name).copied()
    }

    /// All tokens with their names and classes.
    pub fn iter(&self) -> impl Iterator<Item = (Sym, &str, SymbolClass)> + '_ {
        self.names
            .iter()
            .zip(&self.classes)
            .enumerate()
            .map(|(i, (name, class))| (Sym(i as u16), name.as_str(), *class))
    }

    fn syms_of(&self, class: SymbolClass) -> Vec<Sym> {
        self.iter().filter(|&(_, _, c)| c == class).map(|(s, _, _)| s).collect()
    }

    /// Neutral tokens in index order.
    pub fn neutral_syms(&self) -> Vec<Sym> {
        self.syms_of(SymbolClass::Neutral)
    }

    /// Left-bracket tokens in index order.
    pub fn open_syms(&self) -> Vec<Sym> {
        self.syms_of(SymbolClass::Open)
    }

    /// Right-bracket tokens in index order.
    pub fn close_syms(&self) -> Vec<Sym> {
        self.syms_of(SymbolClass::Close)
    }
}

/// A sequence of tokens over some alphabet.
#[derive(Clone, PartialEq, Eq, Debug, Hash, Default)]
pub struct InputString {
    tokens: Vec<Sym>,
}

impl InputString {
    /// Wraps a token sequence.
    pub fn from_syms(tokens: Vec<Sym>) -> Self {
        InputString { tokens }
    }

    /// Resolves a sequence of token names against an alphabet.
    pub fn from_names<S: AsRef<str>>(a: &Alphabet, names: &[S]) -> Option<Self> {
        names
            .iter()
            .map(|n| a.sym(n.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(InputString::from_syms)
    }

    /// The underlying tokens.
    pub fn tokens(&self) -> &[Sym] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Concatenates several strings.
    pub fn concat<'a, I: IntoIterator<Item = &'a InputString>>(parts: I) -> Self {
        let mut tokens = Vec::new();
        for p in parts {
            tokens.extend_from_slice(&p.tokens);
        }
        InputString { tokens }
    }
}

/// Running open-minus-close count of a token slice; `None` when a prefix
/// dips below zero or a token is undeclared.
pub(crate) fn bracket_surplus(a: &Alphabet, tokens: &[Sym]) -> Result<Option<i64>, AlphabetError> {
    let mut depth: i64 = 0;
    for &sym in tokens {
        match a.class(sym)? {
            SymbolClass::Neutral => {}
            SymbolClass::Open => depth += 1,
            SymbolClass::Close => {
                depth -= 1;
                if depth < 0 {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(depth))
}

/// True iff the string has as many left as right brackets and no prefix
/// has more right than left brackets. Only classes matter, not names.
pub fn is_well_nested(a: &Alphabet, w: &InputString) -> Result<bool, AlphabetError> {
    Ok(bracket_surplus(a, w.tokens())? == Some(0))
}

/// True iff every prefix has at least as many left as right brackets, so
/// the string can be extended to a well-nested one.
pub fn is_well_nested_prefix(a: &Alphabet, w: &InputString) -> Result<bool, AlphabetError> {
    Ok(bracket_surplus(a, w.tokens())?.is_some())
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_like() -> Alphabet {
        Alphabet::new(&["-", "#"], &["<"], &[">"]).unwrap()
    }

    fn b_like() -> Alphabet {
        Alphabet::new(&["-", "#"], &["<"], &[">", ">>"]).unwrap()
    }

    #[test]
    fn classes_and_lookup() {
        let a = a_like();
        assert_eq!(a.len(), 4);
        assert_eq!(a.class(a.sym("<").unwrap()).unwrap(), SymbolClass::Open);
        assert_eq!(a.class(a.sym("#").unwrap()).unwrap(), SymbolClass::Neutral);
        assert_eq!(a.sym("?"), None);
        assert_eq!(a.open_syms().len(), 1);
    }

    #[test]
    fn rejects_bad_names() {
        assert_eq!(
            Alphabet::new(&["-", "-"], &["<"], &[">"]).unwrap_err(),
            AlphabetError::DuplicateName("-".into())
        );
        assert_eq!(Alphabet::new(&[""], &["<"], &[">"]).unwrap_err(), AlphabetError::EmptyName);
        assert!(matches!(
            Alphabet::new(&["a b"], &["<"], &[">"]).unwrap_err(),
            AlphabetError::WhitespaceInName(_)
        ));
        // A name may not straddle classes either.
        assert_eq!(
            Alphabet::new(&["x"], &["x"], &[">"]).unwrap_err(),
            AlphabetError::DuplicateName("x".into())
        );
    }

    #[test]
    fn well_nested_counts_classes_not_names() {
        let a = a_like();
        let open_close = InputString::from_names(&a, &["<", ">"]).unwrap();
        assert!(is_well_nested(&a, &open_close).unwrap());

        let close_open = InputString::from_names(&a, &[">", "<"]).unwrap();
        assert!(!is_well_nested(&a, &close_open).unwrap());

        // Mixed bracket names still pair up by class.
        let b = b_like();
        let mixed = InputString::from_names(&b, &["<", ">>"]).unwrap();
        assert!(is_well_nested(&b, &mixed).unwrap());
    }

    #[test]
    fn prefix_classification() {
        let a = a_like();
        let open_only = InputString::from_names(&a, &["<", "#", "<"]).unwrap();
        assert!(!is_well_nested(&a, &open_only).unwrap());
        assert!(is_well_nested_prefix(&a, &open_only).unwrap());

        let bad = InputString::from_names(&a, &[">", "<"]).unwrap();
        assert!(!is_well_nested_prefix(&a, &bad).unwrap());
    }

    #[test]
    fn unknown_token_is_reported() {
        let a = a_like();
        let w = InputString::from_syms(vec![Sym(99)]);
        assert_eq!(is_well_nested(&a, &w).unwrap_err(), AlphabetError::UnknownToken(99));
    }

    #[test]
    fn concat_joins_token_streams() {
        let a = a_like();
        let u = InputString::from_names(&a, &["<"]).unwrap();
        let v = InputString::from_names(&a, &[">"]).unwrap();
        let w = InputString::concat([&u, &v]);
        assert_eq!(w.len(), 2);
        assert!(is_well_nested(&a, &w).unwrap());
    }
}
