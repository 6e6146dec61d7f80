//! Counting quasimorphisms on free groups.
//!
//! The crate computes the Epstein–Fujiwara counting quasimorphisms `φ_w`
//! exactly, rewrites rational 1-chains over the basis of effective words,
//! certifies stable commutator length lower bounds for chains through
//! Bavard duality, expands homogeneous class functions in the counting
//! basis, and lifts elements through finite-index subgroups given by coset
//! tables.
//!
//! ```
//! use quasichain::{chains::{scl_lower_bound, Chain, SclBound}, words::Alphabet};
//!
//! let f2 = Alphabet::with_rank(2).unwrap();
//! let chain = Chain::parse(&f2, "abAB").unwrap();
//! match scl_lower_bound(&f2, &chain) {
//!     SclBound::Bound(cert) => assert_eq!(cert.bound.to_string(), "1/8"),
//!     other => panic!("{other:?}"),
//! }
//! ```

pub mod basis;
pub mod chains;
pub mod cli;
pub mod counting;
pub mod cover;
pub mod rational;
pub mod words;

pub use rational::Rational;
pub use words::{Alphabet, Word};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/words.md")]
    mod words {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/cover.md")]
    mod cover {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
