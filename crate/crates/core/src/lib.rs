//! Deciding acceptance of infinite words by Muller automata.

pub mod automata;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod profinite;
pub mod semenov;
pub mod torus;
pub mod word;
pub mod zoo;

pub use error::{Error, Result};
pub use word::{Alphabet, FactorClass, Letter, OmegaWord, Tag};
