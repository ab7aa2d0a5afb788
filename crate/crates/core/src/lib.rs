//! Labeled flat splicing systems: the splicing operation, terminal
//! derivations and their Szilard and control languages, grammar-to-system
//! constructions, and bounded checks against a grammar oracle.

pub mod compile;
pub mod decide;
pub mod derivation;
pub mod error;
pub mod format;
pub mod grammar;
pub mod regular;
pub mod rule;
pub mod system;
pub mod word;

pub use derivation::{Derivation, Explorer, Label, LabeledSystem, Mode};
pub use error::{Error, Result};
pub use rule::FlatSplicingRule;
pub use system::{Applicability, FlatSplicingSystem, InitialSet, SystemType};
pub use word::{Symbol, Word};
