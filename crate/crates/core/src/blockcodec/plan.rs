use serde::{Deserialize, Serialize};

use crate::blockcodec::ParamProfile;
use crate::error::{Error, Result};
use crate::gf2::FrozenSet;

/// Budget of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockBudget {
    pub frozen: usize,
    pub unfrozen: usize,
    /// Message bits carried.
    pub m: usize,
    /// Rows of the block matrix: `m + p + q` on the chain, 0 elsewhere.
    pub mbar: usize,
}

impl BlockBudget {
    pub fn rho(&self) -> f64 {
        self.frozen as f64 / (self.frozen + self.unfrozen) as f64
    }
}

/// Greedy assignment of message bits to blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    /// Entry `i − 1` describes block `i`.
    pub budgets: Vec<BlockBudget>,
    /// 1-based chain block indices, strictly increasing.
    pub chain: Vec<usize>,
    pub msg_len: usize,
    /// Sum of `unfrozen_i − p − q − s` over eligible blocks.
    pub capacity: usize,
}

impl BlockPlan {
    /// First chain block, or 0 when the chain is empty.
    pub fn first_block(&self) -> usize {
        self.chain.first().copied().unwrap_or(0)
    }

    pub fn first_count(&self) -> usize {
        self.chain.first().map_or(0, |&i| self.budgets[i - 1].m)
    }

    pub fn budget(&self, block: usize) -> &BlockBudget {
        &self.budgets[block - 1]
    }

    /// Generator bits consumed by the whole chain.
    pub fn stream_len(&self, block_len: usize) -> usize {
        self.chain
            .iter()
            .map(|&i| self.budgets[i - 1].mbar * block_len)
            .sum()
    }
}

/// Largest message the planner can place for this frozen set.
pub fn plan_capacity(profile: &ParamProfile, frozen: &FrozenSet) -> usize {
    (1..=profile.blocks)
        .map(|i| {
            let u = profile.block_len - frozen.count_in(profile.block_range(i));
            u.saturating_sub(profile.overhead())
        })
        .sum()
}

/// Assigns `m_i = min(unfrozen_i − p − q − s, remaining)` left to right.
///
/// Blocks with at most `p + q + s` unfrozen cells carry nothing. The chain is
/// every block that received message bits; an empty message still gets the
/// first eligible block so the metadata names a real block. With no eligible
/// block at all the chain is empty and `first_block` is 0.
pub fn plan_blocks(
    profile: &ParamProfile,
    frozen: &FrozenSet,
    msg_len: usize,
) -> Result<BlockPlan> {
    if frozen.universe() != profile.n {
        return Err(Error::DimensionMismatch {
            expected: profile.n,
            got: frozen.universe(),
        });
    }
    let (p, q) = (profile.pointer_width, profile.count_width);
    let mut budgets = Vec::with_capacity(profile.blocks);
    let mut chain = Vec::new();
    let mut remaining = msg_len;
    let mut capacity = 0;
    let mut first_eligible = None;
    for i in 1..=profile.blocks {
        let f = frozen.count_in(profile.block_range(i));
        let u = profile.block_len - f;
        let avail = u.saturating_sub(profile.overhead());
        let mut b = BlockBudget {
            frozen: f,
            unfrozen: u,
            m: 0,
            mbar: 0,
        };
        if avail > 0 {
            capacity += avail;
            first_eligible.get_or_insert(i);
            if remaining > 0 {
                b.m = avail.min(remaining);
                b.mbar = b.m + p + q;
                remaining -= b.m;
                chain.push(i);
            }
        }
        budgets.push(b);
    }
    if remaining > 0 {
        return Err(Error::MessageTooLong {
            len: msg_len,
            capacity,
        });
    }
    if msg_len == 0 {
        if let Some(i) = first_eligible {
            budgets[i - 1].mbar = p + q;
            chain.push(i);
        }
    }
    Ok(BlockPlan {
        budgets,
        chain,
        msg_len,
        capacity,
    })
}
