use thiserror::Error;

use crate::word::{Symbol, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("gamma too long: |gamma| = {0}, at most 1 allowed")]
    GammaTooLong(usize),
    #[error("delta too long: |delta| = {0}, at most 1 allowed")]
    DeltaTooLong(usize),
    #[error("site {site} is not a match site of {word}")]
    SiteMismatch { word: Word, site: usize },
    #[error("partner {0} does not fit the rule's gamma/delta handles")]
    PartnerMismatch(Word),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(Symbol),
    #[error("initial words must be nonempty")]
    EmptyInitialWord,
    #[error("label `{0}` is also an alphabet symbol")]
    LabelClash(Symbol),
    #[error("label `{0}` is used by more than one rule in szilard mode")]
    DuplicateLabel(Symbol),
    #[error("lambda labels are only allowed in control mode")]
    LambdaInSzilard,
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("operation needs {expected} mode")]
    ModeMismatch { expected: &'static str },
    #[error("pattern error at token {position}: {message}")]
    Pattern { position: usize, message: String },
    #[error("grammar error: {0}")]
    Grammar(String),
    #[error("grammar is not in {form} form: {violations}")]
    NormalForm { form: String, violations: String },
    #[error("symbol `{0}` collides with a symbol the construction generates")]
    SymbolClash(Symbol),
    #[error("label `{0}` has no image under the homomorphism")]
    UnmappedLabel(Symbol),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay failed at step {step}: {message}")]
    Replay { step: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
