//! Geometric means of multiplicative functions over `1..=n`, the prime sums
//! behind their asymptotics, and the constants those expansions need.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accum;
pub mod constants;
pub mod error;
pub mod multfunc;
pub mod primesums;
pub mod series;
pub mod sieve;
pub mod verify;

pub use error::{Error, Result};
pub use multfunc::{builtin, PrimeModel};
pub use primesums::{sums_stream, CheckpointGrid, StreamOptions, SumsReport};
