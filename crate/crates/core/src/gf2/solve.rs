use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf2::matrix::eliminate;
use crate::gf2::{BitVector, Gf2Matrix};

/// Solves `A·w = target` with some coordinates of `w` pinned.
///
/// Pinned columns are folded into the target, the remaining columns are
/// eliminated, and every free non-pivot variable is set to 0 so the answer is
/// a deterministic function of the inputs. Fails with `RankDeficient` (block
/// 0, i.e. outside any codec block) when the system has no solution.
pub fn solve_constrained(
    a: &Gf2Matrix,
    fixed: &BTreeMap<usize, bool>,
    target: &BitVector,
) -> Result<BitVector> {
    let mut mask = BitVector::zeros(a.cols());
    let mut values = BitVector::zeros(a.cols());
    for (&c, &bit) in fixed {
        if c >= a.cols() {
            return Err(Error::InvalidParams(format!(
                "fixed column {c} outside {} columns",
                a.cols()
            )));
        }
        mask.set(c, true);
        values.set(c, bit);
    }
    solve_masked(a, &mask, &values, target, false)
}

/// Same system as [`solve_constrained`], with the pinned columns given as a
/// mask plus a vector holding their values (other entries of `values` are
/// ignored).
///
/// With `require_full_rank`, the restriction of `A` to the free columns must
/// have rank equal to its row count, otherwise `RankDeficient` is returned even
/// if this particular target happens to be reachable. The block codec uses this
/// form: a full-rank restriction is what makes every message encodable.
pub fn solve_masked(
    a: &Gf2Matrix,
    fixed_mask: &BitVector,
    values: &BitVector,
    target: &BitVector,
    require_full_rank: bool,
) -> Result<BitVector> {
    let (rows, cols) = (a.rows(), a.cols());
    if target.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: target.len(),
        });
    }
    if fixed_mask.len() != cols || values.len() != cols {
        return Err(Error::DimensionMismatch {
            expected: cols,
            got: fixed_mask.len().min(values.len()),
        });
    }
    let mut pinned = BitVector::from_words(
        values
            .words()
            .iter()
            .zip(fixed_mask.words())
            .map(|(v, m)| v & m)
            .collect(),
        cols,
    );
    let shift = a.mul_vec(&pinned)?;

    let free: Vec<usize> = (0..cols).filter(|&c| !fixed_mask.get(c)).collect();
    let stride = free.len().div_ceil(64).max(1);
    let mut data = vec![0u64; rows * stride];
    let mut rhs: Vec<bool> = (0..rows).map(|r| target.get(r) ^ shift.get(r)).collect();
    for r in 0..rows {
        let row = a.row_words(r);
        for (k, &c) in free.iter().enumerate() {
            if (row[c / 64] >> (c % 64)) & 1 == 1 {
                data[r * stride + k / 64] |= 1 << (k % 64);
            }
        }
    }
    let pivots = eliminate(&mut data, rows, stride, free.len(), Some(&mut rhs));
    if require_full_rank && pivots.len() < rows {
        return Err(Error::RankDeficient {
            block: 0,
            attempts: 0,
        });
    }
    if rhs[pivots.len()..].iter().any(|&b| b) {
        return Err(Error::RankDeficient {
            block: 0,
            attempts: 0,
        });
    }
    for (i, &k) in pivots.iter().enumerate() {
        if rhs[i] {
            pinned.set(free[k], true);
        }
    }
    Ok(pinned)
}

/// Rank of `A` restricted to the columns not set in `fixed_mask`.
pub fn restricted_rank(a: &Gf2Matrix, fixed_mask: &BitVector) -> usize {
    let free: Vec<usize> = (0..a.cols()).filter(|&c| !fixed_mask.get(c)).collect();
    a.select_columns(&free).rank()
}

/// Plain matrix-vector product over GF(2).
pub fn mat_vec_mul(a: &Gf2Matrix, v: &BitVector) -> Result<BitVector> {
    a.mul_vec(v)
}

/// Row rank over GF(2).
pub fn rank(a: &Gf2Matrix) -> usize {
    a.rank()
}
