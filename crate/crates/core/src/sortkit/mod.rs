//! Stable linear-time sorting of items keyed by non-negative doubles.
//!
//! For non-negative finite doubles the IEEE-754 bit pattern, read as an
//! unsigned integer, orders exactly like the float value, so keys are sorted
//! as `u64` with an LSD radix sort (eight 8-bit digits, 256 counters per
//! digit). [`parallel_sort`] radix-sorts contiguous blocks on separate
//! workers and merges them pairwise, leaving the last merge to the consumer.

mod parallel;
mod radix;

pub use parallel::{parallel_sort, SortCursor, SortOrder, SortedRuns, TopKPlan};
pub use radix::{radix_sort, radix_sort_keys};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortItem {
    pub key: f64,
    pub payload: u32,
}

impl SortItem {
    pub fn new(key: f64, payload: u32) -> Self {
        Self { key, payload }
    }
}

/// Order-preserving integer image of a non-negative finite double.
///
/// `-0.0` maps to the same key as `+0.0`.
pub fn double_to_key(x: f64) -> Result<u64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidKey(x));
    }
    Ok(if x == 0.0 { 0 } else { x.to_bits() })
}

#[inline]
pub(crate) fn key_to_double(key: u64) -> f64 {
    f64::from_bits(key)
}
