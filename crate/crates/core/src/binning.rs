//! Random binning at toy sizes.
//!
//! Every vector of `{0,1}^N` is assigned a label `(i, m)` with the level `i`
//! uniform in `1..=L` and `m` uniform over `(N/(L+1))·i` bits. To write a
//! message at level `j`, pick any member of bin `(j, m)` that agrees with the
//! cover on the frozen cells; to read, look up the label. The table is
//! materialized, so `N` is capped at 20.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockcodec::MemoryImage;
use crate::error::{Error, Result};
use crate::gf2::BitVector;

pub const MAX_N: usize = 20;

/// Label of one vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub level: usize,
    pub msg: u32,
}

/// Parameters that regenerate a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinParams {
    pub n: usize,
    pub levels: usize,
    pub rng_seed: u64,
}

/// Full assignment of `{0,1}^N` to bins, plus the inverse index.
///
/// Vectors are indexed by the integer whose MSB is bit 0, so numeric order is
/// lexicographic order of bit strings.
#[derive(Clone, Debug)]
pub struct BinTable {
    params: BinParams,
    labels: Vec<Label>,
    // Bin id of (level, m) is level_base[level - 1] + m; members of bin b are
    // members[offsets[b]..offsets[b + 1]], ascending.
    level_base: Vec<usize>,
    offsets: Vec<u32>,
    members: Vec<u32>,
}

impl BinTable {
    pub fn params(&self) -> BinParams {
        self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn levels(&self) -> usize {
        self.params.levels
    }

    /// `(N/(L+1))·level`.
    pub fn msg_len(&self, level: usize) -> usize {
        self.params.n / (self.params.levels + 1) * level
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> Label {
        self.labels[index]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Members of bin `(level, msg)` as vector indices, ascending.
    pub fn bin(&self, level: usize, msg: u32) -> &[u32] {
        let b = self.level_base[level - 1] + msg as usize;
        &self.members[self.offsets[b] as usize..self.offsets[b + 1] as usize]
    }

    /// `Pr[label = (i, m)] = 1/(L·2^{ℓ_i})`.
    pub fn label_probability(&self, level: usize) -> f64 {
        1.0 / (self.params.levels as f64 * (self.msg_len(level) as f64).exp2())
    }

    pub fn vector(&self, index: usize) -> BitVector {
        BitVector::from_uint(index as u128, self.params.n)
    }

    pub fn index_of(&self, v: &BitVector) -> Result<usize> {
        if v.len() != self.params.n {
            return Err(Error::DimensionMismatch {
                expected: self.params.n,
                got: v.len(),
            });
        }
        Ok(v.to_uint()? as usize)
    }
}

pub fn build_bin_table(n: usize, levels: usize, rng_seed: u64) -> Result<BinTable> {
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidParams(format!(
            "binning needs 1 ≤ N ≤ {MAX_N}, got {n}"
        )));
    }
    if levels == 0 || !n.is_multiple_of(levels + 1) {
        return Err(Error::InvalidParams(format!(
            "L + 1 = {} must divide N = {n}",
            levels + 1
        )));
    }
    let params = BinParams {
        n,
        levels,
        rng_seed,
    };
    let step = n / (levels + 1);
    let mut level_base = Vec::with_capacity(levels);
    let mut bins = 0usize;
    for i in 1..=levels {
        level_base.push(bins);
        bins += 1 << (step * i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let labels: Vec<Label> = (0..1usize << n)
        .map(|_| {
            let level = rng.gen_range(1..=levels);
            let msg = rng.gen_range(0..1u32 << (step * level));
            Label { level, msg }
        })
        .collect();

    let bin_of = |l: &Label| level_base[l.level - 1] + l.msg as usize;
    let mut offsets = vec![0u32; bins + 1];
    for l in &labels {
        offsets[bin_of(l) + 1] += 1;
    }
    for b in 0..bins {
        offsets[b + 1] += offsets[b];
    }
    let mut fill = offsets.clone();
    let mut members = vec![0u32; labels.len()];
    for (x, l) in labels.iter().enumerate() {
        let b = bin_of(l);
        members[fill[b] as usize] = x as u32;
        fill[b] += 1;
    }
    Ok(BinTable {
        params,
        labels,
        level_base,
        offsets,
        members,
    })
}

/// `ε = 2/(L+1)`, the value for which `L ≤ 2/ε ≤ L+1` is tight.
pub fn epsilon_for_levels(levels: usize) -> f64 {
    2.0 / (levels + 1) as f64
}

/// Largest `j ≤ L` with `(1−ρ)N ≥ jN/(L+1) + εN/2`, or `None` if even `j = 1`
/// fails.
pub fn select_level(n: usize, levels: usize, frozen: usize, epsilon: f64) -> Option<usize> {
    let free = n.saturating_sub(frozen) as f64;
    let slack = epsilon * n as f64 / 2.0;
    (1..=levels)
        .rev()
        .find(|&j| free >= (n / (levels + 1) * j) as f64 + slack)
}

/// Lexicographically smallest member of bin `(level, msg)` that agrees with
/// the cover on every frozen cell.
pub fn binning_encode(
    table: &BinTable,
    image: &MemoryImage,
    level: usize,
    msg: &BitVector,
) -> Result<BitVector> {
    let n = table.n();
    if image.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: image.len(),
        });
    }
    if level == 0 || level > table.levels() {
        return Err(Error::InvalidParams(format!(
            "level {level} outside 1..={}",
            table.levels()
        )));
    }
    if msg.len() != table.msg_len(level) {
        return Err(Error::DimensionMismatch {
            expected: table.msg_len(level),
            got: msg.len(),
        });
    }
    let cover = image.cover.to_uint()? as u32;
    let mask = image.frozen.mask().to_uint()? as u32;
    let m = msg.to_uint()? as u32;
    table
        .bin(level, m)
        .iter()
        .find(|&&u| (u ^ cover) & mask == 0)
        .map(|&u| table.vector(u as usize))
        .ok_or(Error::NotEncodable { level })
}

/// Level and message of the stored vector.
pub fn binning_decode(table: &BinTable, stored: &BitVector) -> Result<(usize, BitVector)> {
    let l = table.label(table.index_of(stored)?);
    Ok((
        l.level,
        BitVector::from_uint(l.msg as u128, table.msg_len(l.level)),
    ))
}
