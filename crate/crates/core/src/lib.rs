//! Abelian repetition analysis for cyclic morphic words.
//!
//! The crate builds fixed points of uniform cyclic morphisms (the default
//! instance is the 13-uniform morphism over 8 letters with
//! `f(0) = 0740103050260`), scans them exhaustively for Abelian powers
//! `x1 y x2` with `x1 ~ x2`, and transfers finite search results to the
//! infinite fixed point through preimage descent with exact rational
//! bookkeeping. All exponents and bounds are exact rationals; no floats
//! appear anywhere in a verification path.

pub mod calculus;
pub mod error;
pub mod lemma;
pub mod morphism;
pub mod scanner;
pub mod word;

pub use calculus::{
    bound, decimal_string, depth, fraction_string, g_apply, length_cap, parse_exact_rational,
    simplify_bound_term, BoundInputs, DepthResult, ExactRational,
};
pub use error::Error;
pub use lemma::{descend, descent_chain, hat_select, DescentResult, HatCase, HatSelection};
pub use morphism::{validate_morphism, MorphismViolation, ParsedFactor, UniformCyclicMorphism};
pub use scanner::{
    harvest_anagram_pairs, harvest_pairs_with_m, oracle_scan, scan_max, scan_violations,
    witness_check, AbelianWitness, HarvestConfig, ScanConfig,
};
pub use word::{equivalent, is_anagram, parikh, shift, Alphabet, Letter, ParikhVector, Word};

/// Image of letter 0 for the default morphism, as ASCII digits.
pub const DEFAULT_IMAGE0: &str = "0740103050260";

/// Default alphabet size.
pub const DEFAULT_ALPHABET: usize = 8;

/// Builds the default 13-uniform cyclic morphism over 8 letters.
pub fn default_morphism() -> UniformCyclicMorphism {
    let alphabet = Alphabet::new(DEFAULT_ALPHABET).expect("default alphabet");
    let image0 = Word::from_text(DEFAULT_IMAGE0, alphabet).expect("default image");
    UniformCyclicMorphism::new(image0).expect("default morphism is valid")
}
