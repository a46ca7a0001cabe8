//! IO, worker pools and the command-line front end for `omegalab-core`.
//!
//! - [`formats`]: machine specs, Martin-Löf test files, family and source syntax.
//! - [`records`]: JSON-lines and CSV output.
//! - [`parallel`]: brute-force searches and profiles on a thread pool.
//! - [`cli`]: the `omegalab` commands.

pub mod cli;
pub mod formats;
pub mod parallel;
pub mod records;

pub use omegalab_core as core;
