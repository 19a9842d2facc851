//! Finite-scale laboratory for permutation actions on finite and growing
//! relational structures.
//!
//! The crate revolves around a handful of interlocking pieces:
//!
//! * [`structures`] — finite relational structures, embeddings,
//!   quantifier-free types, and canonical orbit structures;
//! * [`groups`] — permutation groups held as generators plus a stabilizer
//!   chain, automorphism search, orbits and stabilizers;
//! * [`instance`] — a group action that is either a fixed finite action or
//!   an extendable approximation to the limit of an amalgamation class;
//! * [`fraisse`] — amalgamation classes: membership, ages, amalgam search,
//!   and deterministic construction of limit approximations;
//! * [`closure`] — invariant closure operators, the derived independence
//!   relation, and the disjointifying property in its four forms;
//! * [`rank`] — the two rank recursions (with and without the disjunctive
//!   clause) together with an independent brute-force oracle;
//! * [`involve`] — colored structures, colored amalgamation, and the
//!   back-and-forth construction of color-permuting partial automorphisms;
//! * [`support`] — support functions, the permutation decomposition, and
//!   token-scale sequence/injection reductions.
//!
//! Everything is exact and deterministic: set values are canonically
//! encoded, searches visit candidates in a fixed order, and all randomness
//! is seeded.

pub mod catalog;
pub mod closure;
pub mod error;
pub mod fraisse;
pub mod groups;
pub mod instance;
pub mod involve;
pub mod perm;
pub mod props;
pub mod rank;
pub mod set;
pub mod structures;
pub mod support;

pub use error::{Error, Result};
pub use perm::Perm;
pub use set::ElemSet;

/// Hard cap on structure universes.  Subsets are held in a single machine
/// word, so nothing in the crate accepts a universe past this.
pub const MAX_UNIVERSE: usize = 64;

/// Default cap on relation arities (orbit structures are exponential in
/// arity, so every arity-sensitive operation reports the cap it ran with).
pub const DEFAULT_ARITY_CAP: usize = 4;
