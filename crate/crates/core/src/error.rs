use alloc::string::String;
use core::fmt;

/// Errors raised by the algebra, the prohibition engine and the run engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A term, tuple or operator was used at the wrong arity.
    ArityMismatch { expected: usize, found: usize },
    /// An atom is not declared by the interpretation in use.
    UnknownAtom { name: String, arity: usize },
    /// A typed atom's base condition does not reduce to any vocabulary entry.
    UnknownBase(String),
    /// A consequence outside the disjunctive/conjunctive fragment reached the extended rules.
    UnsupportedConsequence(String),
    /// The atom space for a consequence comparison would exceed the supported size.
    VocabularyTooLarge { entries: usize, max: usize },
    /// Malformed term text.
    Parse { input: String, position: usize, message: String },
    /// A world state violates one of its invariants.
    InvalidState(String),
    /// A position index outside 1..=7.
    InvalidPosition(u8),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ArityMismatch { expected, found } => {
                write!(f, "arity mismatch: expected {expected}, found {found}")
            }
            Error::UnknownAtom { name, arity } => write!(f, "unknown atom `{name}/{arity}`"),
            Error::UnknownBase(base) => {
                write!(f, "base condition `{base}` is not in the consequence vocabulary")
            }
            Error::UnsupportedConsequence(c) => {
                write!(f, "consequence `{c}` is not a disjunction/conjunction of typed atoms")
            }
            Error::VocabularyTooLarge { entries, max } => {
                write!(f, "consequence comparison needs {entries} base classes (max {max})")
            }
            Error::Parse { input, position, message } => {
                write!(f, "parse error at byte {position} of `{input}`: {message}")
            }
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::InvalidPosition(i) => write!(f, "position type must be in 1..=7, got {i}"),
        }
    }
}

impl core::error::Error for Error {}
