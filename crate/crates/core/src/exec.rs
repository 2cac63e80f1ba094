//! Pluggable execution of independent work items.
//!
//! Training and prediction hand index ranges to an [`Executor`] and always
//! consume the results in index order, so the outcome does not depend on
//! how (or whether) the executor parallelizes.

use alloc::vec::Vec;
use core::ops::Range;

pub trait Executor: Sync {
    /// Evaluates `f` on every index of `range` and returns the results in
    /// index order.
    fn map_range<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// How many independent blocks are worth computing ahead of consumption.
    fn width(&self) -> usize {
        1
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_range<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        range.map(f).collect()
    }
}
