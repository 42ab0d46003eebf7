use std::ops::Range;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Positions of the stuck cells in a memory of `n` bits.
///
/// Indices are 0-based, strictly increasing and below `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrozenSet {
    n: usize,
    indices: Vec<usize>,
}

impl FrozenSet {
    pub fn empty(n: usize) -> Self {
        FrozenSet {
            n,
            indices: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        FrozenSet {
            n,
            indices: (0..n).collect(),
        }
    }

    /// Accepts indices in any order; duplicates and out-of-range values are errors.
    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidParams(format!(
                    "duplicate frozen index {}",
                    w[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidParams(format!(
                    "frozen index {last} outside memory of {n} bits"
                )));
            }
        }
        Ok(FrozenSet { n, indices })
    }

    pub fn from_mask(mask: &BitVector) -> Self {
        FrozenSet {
            n: mask.len(),
            indices: mask.ones_positions(),
        }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn unfrozen_count(&self) -> usize {
        self.n - self.indices.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// One bit per position, set where frozen.
    pub fn mask(&self) -> BitVector {
        let mut m = BitVector::zeros(self.n);
        for &i in &self.indices {
            m.set(i, true);
        }
        m
    }

    /// Number of frozen positions in `range`.
    pub fn count_in(&self, range: Range<usize>) -> usize {
        let lo = self.indices.partition_point(|&i| i < range.start);
        let hi = self.indices.partition_point(|&i| i < range.end);
        hi - lo
    }

    /// The frozen positions inside `range`, re-based so `range.start` maps to 0.
    pub fn window(&self, range: Range<usize>) -> FrozenSet {
        let lo = self.indices.partition_point(|&i| i < range.start);
        let hi = self.indices.partition_point(|&i| i < range.end);
        FrozenSet {
            n: range.end - range.start,
            indices: self.indices[lo..hi]
                .iter()
                .map(|&i| i - range.start)
                .collect(),
        }
    }

    /// This set together with every position of `range`.
    pub fn with_range(&self, range: Range<usize>) -> FrozenSet {
        let mut mask = self.mask();
        for i in range {
            mask.set(i, true);
        }
        FrozenSet::from_mask(&mask)
    }

    /// Unfrozen positions in ascending order.
    pub fn unfrozen(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.unfrozen_count());
        let mut next = self.indices.iter().copied().peekable();
        for i in 0..self.n {
            if next.peek() == Some(&i) {
                next.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}
