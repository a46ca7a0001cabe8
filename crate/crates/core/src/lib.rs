//! Exact-numerics laboratory for recursively enumerable reals and partial
//! randomness.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation over exact rationals, dyadic enclosures and finite machine
//! tables; file formats, the command line and worker pools live in the
//! `omegalab` companion crate.
//!
//! Module map:
//!
//! - [`exactnum`]: rationals, dyadic intervals, rigorous rational powers.
//! - [`sequences`]: computable increasing sequences and `T`-sums.
//! - [`machine`]: prefix-free machines, dovetailed enumeration, brute-force
//!   program-size complexity.
//! - [`omega`]: lower bounds and enclosures of `Ω_V(T)`.
//! - [`reducibility`]: domination checks between r.e. reals.
//! - [`splitting`]: the `α = β + qγ` decomposition and its side conditions.
//! - [`randomness`]: bit extraction, complexity profiles, randomness and
//!   dimension diagnostics, Martin-Löf `T`-tests.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod error;
pub mod exactnum;
pub mod machine;
pub mod omega;
pub mod randomness;
pub mod reducibility;
pub mod sequences;
pub mod splitting;

pub use error::{Error, Result};
pub use exactnum::{Dyadic, DyadicInterval, Rational, Temperature};
pub use machine::{BitString, PrefixMachine};
pub use sequences::IncreasingSequence;
