//! Equivalence checking for deterministic linear tree transducers whose
//! outputs live in a finitely generated free group, relative to a top-down
//! deterministic domain automaton.
//!
//! The decision pipeline: normalize both transducers (compatible-map product,
//! trivial-state removal, reordering of periodic rule segments), verify they
//! are same-ordered, then reduce the question to agreement of two morphisms
//! on a context-free pair grammar over a doubled output alphabet.

pub mod domain;
pub mod dta;
pub mod equiv;
pub mod fmt;
pub mod group;
pub mod harness;
pub mod normalize;
pub mod slp;
pub mod transducer;
pub mod tree;

pub use domain::{AbstractLang, Analysis};
pub use equiv::{decide_equiv, EquivConfig, Verdict};
pub use group::{Coset, GroupWord, OutputAlphabet, Sign, SignedLetter};
pub use transducer::{CompatibleMap, Transducer};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("letter '{0}' is not in the declared output alphabet")]
    UnknownLetter(char),
    #[error("malformed word token '{0}'")]
    BadWordToken(String),
    #[error("the empty word has no primitive root")]
    EmptyRoot,
    #[error("period must be non-empty")]
    EmptyPeriod,
    #[error("slp handles belong to different stores")]
    SlpStoreMismatch,
    #[error("slp node {node} expands past the limit of {limit} letters")]
    SlpLimit { node: usize, limit: usize },
    #[error("input tree leaves the domain at subtree {0}")]
    OffDomain(String),
    #[error("evaluation recursion limit exceeded")]
    EvalDepth,
    #[error("state map is not compatible: {0}")]
    Incompatible(String),
    #[error("domain automaton state '{0}' has an empty language")]
    EmptyDom(String),
    #[error("rule for state {state} and symbol {symbol} is bottom although the domain transition is defined")]
    BottomOnDomain { state: String, symbol: String },
    #[error("abstract fixpoint failed to stabilize within its round bound")]
    FixpointDiverged,
    #[error("test set exceeds cap of {cap} words; fall back to the brute-force oracle")]
    TestSetCap { cap: usize },
    #[error("transducers use different alphabets")]
    AlphabetMismatch,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
}
