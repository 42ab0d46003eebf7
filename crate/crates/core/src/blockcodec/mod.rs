//! Block encoding with a clean side channel.
//!
//! The memory is cut into `M` blocks of `B` bits. Each chain block stores
//! `A_i·w_i = m_i ∘ Bin(next block) ∘ Bin(next count)`, where the matrices
//! `A_i` are consecutive slices of one small-bias generator output and `w_i`
//! agrees with the cover on the block's frozen cells. The decoder needs the
//! seed and the first pointer/count, which travel in a side channel here and
//! are embedded in memory by [`crate::strongcodec`].

mod codec;
mod plan;
mod profile;

pub use codec::{
    decode_with_sidechannel, deterministic_seed_search, encode_with_sidechannel, Encoded,
    FixedSeeds, MemoryImage, SeedSource, SideChannelCodec, SideChannelMetadata, DEFAULT_RETRY_CAP,
};
pub use plan::{plan_blocks, plan_capacity, BlockBudget, BlockPlan};
pub use profile::{ParamProfile, ProfileBuilder};

pub(crate) use profile::ceil_log2;
