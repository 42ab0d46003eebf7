use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::blockcodec::ceil_log2;
use crate::error::{Error, Result};
use crate::gf2::FrozenSet;

/// Where the metadata interval and the flip tail may sit.
///
/// There are `C` candidate intervals `[k·B′, (k+1)·B′)` with
/// `B′ = B·⌊N/(C·B)⌋`, i.e. `δN` rounded down to a multiple of the outer
/// block length so interval borders are block borders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionGeometry {
    pub n: usize,
    pub block_len: usize,
    /// `1/δ`, equal to `C`.
    pub delta_den: usize,
    /// `B′`.
    pub interval_len: usize,
    pub intervals: usize,
    /// Unfrozen cells reserved for the tail `v₄`: `⌈N/⌈log₂ N⌉⌉`.
    pub tail_unfrozen: usize,
}

impl PartitionGeometry {
    pub fn new(n: usize, c: usize, block_len: usize) -> Result<Self> {
        if c == 0 || block_len == 0 {
            return Err(Error::InvalidParams("C and B must be positive".into()));
        }
        let interval_len = block_len * (n / (c * block_len));
        if interval_len == 0 {
            return Err(Error::InvalidParams(format!(
                "δN = {n}/{c} is shorter than one block of {block_len}"
            )));
        }
        Ok(PartitionGeometry {
            n,
            block_len,
            delta_den: c,
            interval_len,
            intervals: c,
            tail_unfrozen: n.div_ceil(ceil_log2(n).max(1)),
        })
    }

    pub fn interval(&self, k: usize) -> Range<usize> {
        k * self.interval_len..(k + 1) * self.interval_len
    }

    /// Is `count` frozen cells in a window of `len` within `(ρ + 2δ)·len`?
    ///
    /// Exact in integers: `count·N·C ≤ (|F|·C + 2N)·len`.
    pub fn sparse_enough(&self, count: usize, len: usize, total_frozen: usize) -> bool {
        let lhs = count as u128 * self.n as u128 * self.delta_den as u128;
        let rhs =
            (total_frozen as u128 * self.delta_den as u128 + 2 * self.n as u128) * len as u128;
        lhs <= rhs
    }
}

/// Split of the memory into `v₁ | v₂ | v₃ | v₄`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// 0-based interval index `k`; `v₂ = [k·B′, (k+1)·B′)`.
    pub interval: usize,
    pub v2: Range<usize>,
    /// Start of `v₄ = [j, N)`.
    pub j: usize,
}

impl Partition {
    pub fn v1(&self) -> Range<usize> {
        0..self.v2.start
    }

    pub fn v3(&self) -> Range<usize> {
        self.v2.end..self.j
    }

    pub fn v4(&self, n: usize) -> Range<usize> {
        self.j..n
    }
}

/// Largest `j` whose suffix `[j, N)` holds exactly `tail_unfrozen` unfrozen cells.
pub fn tail_start(geom: &PartitionGeometry, frozen: &FrozenSet) -> Result<usize> {
    if frozen.unfrozen_count() < geom.tail_unfrozen || geom.tail_unfrozen == 0 {
        return Err(Error::NoValidInterval);
    }
    let mut seen = 0;
    let mut idx = frozen.indices().len();
    for pos in (0..geom.n).rev() {
        if idx > 0 && frozen.indices()[idx - 1] == pos {
            idx -= 1;
            continue;
        }
        seen += 1;
        if seen == geom.tail_unfrozen {
            return Ok(pos);
        }
    }
    Err(Error::NoValidInterval)
}

/// Smallest interval left of `v₄` with at most `(ρ + 2δ)·B′` frozen cells.
pub fn find_partition(geom: &PartitionGeometry, frozen: &FrozenSet) -> Result<Partition> {
    if frozen.universe() != geom.n {
        return Err(Error::DimensionMismatch {
            expected: geom.n,
            got: frozen.universe(),
        });
    }
    let j = tail_start(geom, frozen)?;
    for k in 0..geom.intervals {
        let v2 = geom.interval(k);
        if v2.end > j {
            break;
        }
        if geom.sparse_enough(frozen.count_in(v2.clone()), geom.interval_len, frozen.len()) {
            return Ok(Partition { interval: k, v2, j });
        }
    }
    Err(Error::NoValidInterval)
}
