//! Midrank percentile of one value within a class multiset.
//!
//! `100 * (below + equal / 2) / total`, where `equal` counts the value
//! itself. Every result lies strictly inside (0, 100) and the ranks of a
//! whole class always average exactly 50.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PercentileError {
    #[error("class has no values")]
    EmptyClass,
    #[error("value does not occur in the class")]
    ValueNotInClass,
}

/// Counts behind one midrank percentile. Kept as integers so class-level
/// identities can be checked without floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MidRank {
    pub below: usize,
    pub equal: usize,
    pub total: usize,
}

impl MidRank {
    /// `2 * below + equal`; the percentile is `100 * numerator / (2 * total)`.
    pub fn numerator(&self) -> usize {
        2 * self.below + self.equal
    }

    pub fn percentile(&self) -> f64 {
        // One correctly rounded division of exact integers.
        (100 * self.numerator()) as f64 / (2 * self.total) as f64
    }
}

/// Counting form: one pass, no sorting.
pub fn midrank<T: Ord>(value: &T, class_values: &[T]) -> Result<MidRank, PercentileError> {
    if class_values.is_empty() {
        return Err(PercentileError::EmptyClass);
    }
    let (mut below, mut equal) = (0, 0);
    for v in class_values {
        match v.cmp(value) {
            std::cmp::Ordering::Less => below += 1,
            std::cmp::Ordering::Equal => equal += 1,
            std::cmp::Ordering::Greater => {}
        }
    }
    if equal == 0 {
        return Err(PercentileError::ValueNotInClass);
    }
    Ok(MidRank {
        below,
        equal,
        total: class_values.len(),
    })
}

pub fn percentile_rank<T: Ord>(value: &T, class_values: &[T]) -> Result<f64, PercentileError> {
    midrank(value, class_values).map(|r| r.percentile())
}

/// A class multiset sorted once so many ranks can be looked up in
/// `O(log n)` each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedClass<T> {
    sorted: Vec<T>,
}

impl<T: Ord> SortedClass<T> {
    pub fn new(mut values: Vec<T>) -> Self {
        values.sort_unstable();
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn midrank(&self, value: &T) -> Result<MidRank, PercentileError> {
        if self.sorted.is_empty() {
            return Err(PercentileError::EmptyClass);
        }
        let below = self.sorted.partition_point(|v| v < value);
        let not_above = self.sorted.partition_point(|v| v <= value);
        if not_above == below {
            return Err(PercentileError::ValueNotInClass);
        }
        Ok(MidRank {
            below,
            equal: not_above - below,
            total: self.sorted.len(),
        })
    }
}
