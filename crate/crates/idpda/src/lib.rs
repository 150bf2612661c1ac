//! A library and command-line toolkit for input-driven pushdown automata
//! (also known as visibly pushdown automata), where the input symbol alone
//! decides whether the automaton pushes, pops, or leaves the stack untouched.
//!
//! The crate provides:
//!
//! * core types for alphabets, automata, and behavior relations
//!   ([`alphabet`], [`automaton`], [`relation`]);
//! * nondeterministic and deterministic simulation, including a
//!   relation-based evaluator that cross-checks the frontier simulation
//!   ([`sim`]);
//! * determinization with relation-labeled states and a stack alphabet
//!   that never carries the empty relation ([`determinize`]);
//! * generators for the witness automaton families `A_n`, `B_n`, `B_{n,s}`
//!   and `B_{1,2}`, together with the special string families used to
//!   certify their state and stack-symbol requirements
//!   ([`witness`], [`gadget`]);
//! * verification suites that replay those certificates and check exact
//!   state and stack-symbol counts at desk scale ([`verify`]);
//! * a line-based text format for automaton documents and check reports
//!   ([`format`]).
//!
//! Batch checks run in parallel by default (the `parallel` feature pulls in
//! rayon); disabling default features selects a sequential fallback with
//! identical, deterministically ordered results.

pub mod alphabet;
pub mod automaton;
pub mod batch;
pub mod determinize;
pub mod enumerate;
pub mod format;
pub mod gadget;
pub mod relation;
pub mod sim;
pub mod verify;
pub mod witness;

pub use alphabet::{Alphabet, InputString, Sym, SymbolClass};
pub use automaton::{Didpda, Nidpda, StackSym, State, ValidationError};
pub use batch::Execution;
pub use relation::Relation;
