use crate::error::{Error, Result};
use crate::gf2::{BitVector, FrozenSet};

/// Flips at most `d` unfrozen bits of `v` so that `wt(result) ≡ x (mod d)`.
///
/// Among the unfrozen positions at least half hold the same value, and with at
/// least `2d` of them that majority has `≥ d` members. Flipping `r` ones lowers
/// the weight by `r`, flipping `r` zeros raises it by `r`, so a single
/// direction always reaches the residue. Ties go to the ones. The lowest
/// indexed members of the majority are flipped first.
///
/// With fewer than `2d` unfrozen cells the minority direction is tried as a
/// fallback; `InsufficientUnfrozen` is returned only when neither direction
/// has enough cells.
pub fn flip_to_residue(v: &BitVector, frozen: &FrozenSet, d: usize, x: usize) -> Result<BitVector> {
    if frozen.universe() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: frozen.universe(),
        });
    }
    let mut out = v.clone();
    let candidates = frozen.unfrozen();
    flip_positions_to_residue(
        &mut out,
        &candidates,
        v.weight() as u128,
        d as u128,
        x as u128,
    )?;
    Ok(out)
}

/// Core of [`flip_to_residue`] over an explicit candidate list.
///
/// `weight` is the weight the residue is measured on (it may cover more cells
/// than the candidates). Returns the flipped positions.
pub fn flip_positions_to_residue(
    v: &mut BitVector,
    candidates: &[usize],
    weight: u128,
    d: u128,
    x: u128,
) -> Result<Vec<usize>> {
    if d == 0 || x >= d {
        return Err(Error::ResidueOutOfRange {
            residue: x,
            modulus: d,
        });
    }
    let ones = candidates.iter().filter(|&&i| v.get(i)).count() as u128;
    let zeros = candidates.len() as u128 - ones;
    let current = weight % d;
    let down = (current + d - x) % d;
    let up = (x + d - current) % d;
    // Majority first; with at least 2d candidates it always has enough cells.
    let order = if ones >= zeros {
        [(true, down, ones), (false, up, zeros)]
    } else {
        [(false, up, zeros), (true, down, ones)]
    };
    let Some(&(flip_value, r, _)) = order.iter().find(|(_, r, avail)| r <= avail) else {
        return Err(Error::InsufficientUnfrozen {
            unfrozen: candidates.len(),
            needed: usize::try_from(d.saturating_mul(2)).unwrap_or(usize::MAX),
        });
    };
    let flipped: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| v.get(i) == flip_value)
        .take(r as usize)
        .collect();
    debug_assert_eq!(flipped.len() as u128, r);
    for &i in &flipped {
        v.flip(i);
    }
    Ok(flipped)
}
