//! Online search: a trader watches a stream of price quotations drawn from a
//! known corridor `[m, M]`, must commit to exactly one of them irrevocably,
//! and is forced to take the final quotation if it never committed.
//!
//! The crate implements the full experimental toolkit around that game:
//!
//! - [`market`] — the problem model: bounds, validated price sequences,
//!   trade outcomes, and competitive-ratio arithmetic.
//! - [`strategies`] — online players: reservation-price policies, the
//!   `b`-bit advice player over a geometric threshold ladder, the
//!   optimal-day player, and a randomized geometric policy.
//! - [`advice`] — the oracle side: choosing the best threshold index for a
//!   given input and encoding/decoding day indices on a bit tape.
//! - [`adversary`] — lower-bound machinery: the staircase instance family
//!   with its pigeonhole argument, and the adaptive adversary that forces
//!   the matching ratio against any set of `2^b` deterministic policies.
//! - [`analysis`] — closed-form bound curves, the advice-vs-randomization
//!   crossover, and measured-vs-closed-form certification tables.
//! - [`formats`] — file formats for sequences, transcripts, staircase
//!   families, and bound-curve tables.

pub mod advice;
pub mod adversary;
pub mod analysis;
mod error;
pub mod formats;
pub mod market;
pub mod strategies;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
