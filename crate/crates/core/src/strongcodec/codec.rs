use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::blockcodec::{
    plan_capacity, MemoryImage, SeedSource, SideChannelCodec, SideChannelMetadata,
};
use crate::error::{Error, Result};
use crate::gf2::{flip_positions_to_residue, BitVector, FrozenSet};
use crate::strongcodec::partition::{find_partition, Partition, PartitionGeometry};
use crate::strongcodec::StrongProfile;

/// Which message lengths the strong encoder accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RatePolicy {
    /// Reject anything above `⌊(1 − ρ − 5/C)·N⌋`, the rate the construction
    /// promises for every frozen set.
    #[default]
    Contract,
    /// Accept whatever the outer planner can place for this frozen set.
    Capacity,
}

/// Position of the inner metadata window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedLayout {
    /// 0-based window index inside `v₂`.
    pub window: usize,
    /// Absolute start `i′` of `v₂₂`.
    pub start: usize,
    pub len: usize,
}

impl NestedLayout {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Windows of `v₂` with at most `(ρ + 2δ)·len22` frozen cells, in order.
pub fn valid_windows(
    profile: &StrongProfile,
    partition: &Partition,
    frozen: &FrozenSet,
) -> Vec<NestedLayout> {
    let geom = &profile.geometry;
    (0..profile.windows_per_interval)
        .map(|w| NestedLayout {
            window: w,
            start: partition.v2.start + w * profile.window_len,
            len: profile.window_len,
        })
        .filter(|l| geom.sparse_enough(frozen.count_in(l.range()), l.len, frozen.len()))
        .collect()
}

/// First valid window of `v₂`.
pub fn find_subblock(
    profile: &StrongProfile,
    partition: &Partition,
    frozen: &FrozenSet,
) -> Result<NestedLayout> {
    valid_windows(profile, partition, frozen)
        .into_iter()
        .next()
        .ok_or(Error::NoValidSubblock)
}

/// `d = interval · W + window`.
pub fn pack_position_code(profile: &StrongProfile, interval: usize, window: usize) -> Result<u64> {
    if interval >= profile.geometry.intervals || window >= profile.windows_per_interval {
        return Err(Error::InvalidParams(format!(
            "(interval {interval}, window {window}) out of range"
        )));
    }
    Ok((interval * profile.windows_per_interval + window) as u64)
}

pub fn unpack_position_code(profile: &StrongProfile, d: u64) -> Result<(usize, usize)> {
    let w = profile.windows_per_interval as u64;
    if w == 0 || d >= profile.geometry.intervals as u64 * w {
        return Err(Error::InvalidPositionCode { code: d });
    }
    Ok(((d / w) as usize, (d % w) as usize))
}

/// A successful strong encoding and how it was reached.
#[derive(Clone, Debug)]
pub struct StrongEncoded {
    pub stored: BitVector,
    pub partition: Partition,
    pub layout: NestedLayout,
    pub outer_attempts: u32,
    pub inner_attempts: u32,
    /// Windows tried before one accepted the outer metadata.
    pub windows_tried: usize,
    pub register_flips: usize,
    pub tail_flips: usize,
}

/// Encoder and decoder with no side channel.
#[derive(Clone, Debug)]
pub struct StrongCodec {
    profile: StrongProfile,
    outer: SideChannelCodec,
    inner: SideChannelCodec,
    policy: RatePolicy,
}

impl StrongCodec {
    pub fn new(profile: StrongProfile) -> Result<Self> {
        let outer = SideChannelCodec::new(profile.outer.clone())?;
        let inner = SideChannelCodec::new(profile.inner.clone())?;
        Ok(StrongCodec {
            profile,
            outer,
            inner,
            policy: RatePolicy::Contract,
        })
    }

    pub fn with_rate_policy(mut self, policy: RatePolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Retry cap for both nested block encoders.
    pub fn with_retry_cap(mut self, cap: u32) -> Self {
        self.outer = self.outer.with_retry_cap(cap);
        self.inner = self.inner.with_retry_cap(cap);
        self
    }

    pub fn profile(&self) -> &StrongProfile {
        &self.profile
    }

    pub fn rate_policy(&self) -> RatePolicy {
        self.policy
    }

    pub fn geometry(&self) -> &PartitionGeometry {
        &self.profile.geometry
    }

    /// Frozen set seen by the outer planner: `F ∪ v₂ ∪ [⌊j/B⌋·B, N)`.
    ///
    /// Marking the whole block that contains `j` keeps chain blocks clear of
    /// the tail, where the last step flips bits.
    pub fn planning_frozen(&self, frozen: &FrozenSet, partition: &Partition) -> FrozenSet {
        let b = self.profile.outer.block_len;
        let mut mask = frozen.mask();
        for i in partition
            .v2
            .clone()
            .chain((partition.j / b) * b..self.profile.n)
        {
            mask.set(i, true);
        }
        FrozenSet::from_mask(&mask)
    }

    /// Longest message the outer planner can place for this frozen set.
    pub fn capacity(&self, frozen: &FrozenSet) -> Result<usize> {
        let partition = find_partition(&self.profile.geometry, frozen)?;
        Ok(plan_capacity(
            &self.profile.outer,
            &self.planning_frozen(frozen, &partition),
        ))
    }

    pub fn max_message_len(&self, frozen: &FrozenSet) -> Result<usize> {
        match self.policy {
            RatePolicy::Contract => Ok(self.profile.contract_len(frozen.len())),
            RatePolicy::Capacity => self.capacity(frozen),
        }
    }

    pub fn encode(
        &self,
        image: &MemoryImage,
        msg: &BitVector,
        seeds: &mut dyn SeedSource,
    ) -> Result<StrongEncoded> {
        let prof = &self.profile;
        if image.len() != prof.n {
            return Err(Error::DimensionMismatch {
                expected: prof.n,
                got: image.len(),
            });
        }
        if self.policy == RatePolicy::Contract {
            let bound = prof.contract_len(image.frozen.len());
            if msg.len() > bound {
                return Err(Error::MessageTooLong {
                    len: msg.len(),
                    capacity: bound,
                });
            }
        }

        // Step 1: metadata interval and tail.
        let partition = find_partition(&prof.geometry, &image.frozen)?;

        // Step 2: the message goes everywhere except v2 and the tail.
        let outer_image = image.with_frozen(self.planning_frozen(&image.frozen, &partition))?;
        let outer = self.outer.encode(&outer_image, msg, seeds)?;
        let mut stored = outer.stored;
        let u1 = outer.meta.to_bits(&prof.outer);

        // Step 3.1: the outer metadata goes into the first window that takes it.
        let windows = valid_windows(prof, &partition, &image.frozen);
        if windows.is_empty() {
            return Err(Error::NoValidSubblock);
        }
        let mut inner_result = None;
        let mut last_err = Error::NoValidSubblock;
        let mut tried = 0;
        for layout in windows {
            tried += 1;
            let r = layout.range();
            let sub = MemoryImage::new(stored.slice(r.clone()), image.frozen.window(r))?;
            match self.inner.encode(&sub, &u1, seeds) {
                Ok(enc) => {
                    inner_result = Some((layout, enc));
                    break;
                }
                Err(e @ (Error::RankDeficient { .. } | Error::MessageTooLong { .. })) => {
                    last_err = e
                }
                Err(e) => return Err(e),
            }
        }
        let Some((layout, inner)) = inner_result else {
            return Err(last_err);
        };
        stored.write_slice(layout.start, &inner.stored);
        let u2 = inner.meta.to_bits(&prof.inner);

        // Step 3.2: inner metadata as weight residues of v2 around the window.
        let modulus = prof.register_modulus();
        let mut register_flips = 0;
        for (g, cells) in prof
            .register_cells(partition.v2.clone(), layout.start)
            .iter()
            .enumerate()
        {
            let digit = digit_of(&u2, g, prof.digit_bits)?;
            let mut weight = cells.iter().filter(|&&i| stored.get(i)).count();
            if g == 0 {
                weight += stored.weight_in(layout.range());
            }
            let candidates: Vec<usize> = cells
                .iter()
                .copied()
                .filter(|&i| !image.frozen.contains(i))
                .collect();
            register_flips += flip_positions_to_residue(
                &mut stored,
                &candidates,
                weight as u128,
                modulus,
                digit,
            )?
            .len();
        }

        // Step 4: window position as the weight of everything, flips in the tail only.
        let b = prof.outer.block_len;
        let tail_start = partition.j.div_ceil(b) * b;
        let candidates: Vec<usize> = (tail_start..prof.n)
            .filter(|&i| !image.frozen.contains(i))
            .collect();
        let d = pack_position_code(prof, partition.interval, layout.window)?;
        let total = stored.weight() as u128;
        let tail_flips = flip_positions_to_residue(
            &mut stored,
            &candidates,
            total,
            prof.mod4 as u128,
            d as u128,
        )?
        .len();

        debug_assert!(image.is_consistent(&stored));
        Ok(StrongEncoded {
            stored,
            partition,
            layout,
            outer_attempts: outer.attempts,
            inner_attempts: inner.attempts,
            windows_tried: tried,
            register_flips,
            tail_flips,
        })
    }

    /// Recovers the message from the stored bits alone.
    pub fn decode(&self, stored: &BitVector) -> Result<BitVector> {
        let prof = &self.profile;
        if stored.len() != prof.n {
            return Err(Error::DimensionMismatch {
                expected: prof.n,
                got: stored.len(),
            });
        }
        // Step 1: where is the window?
        let d = (stored.weight() as u64) % prof.mod4;
        let (interval, window) = unpack_position_code(prof, d)?;
        let v2 = prof.geometry.interval(interval);
        let start = v2.start + window * prof.window_len;
        let win = start..start + prof.window_len;

        // Step 2: the registers spell u2.
        let modulus = prof.register_modulus();
        let u2_len = prof.inner.metadata_len();
        let mut u2 = BitVector::zeros(0);
        for (g, cells) in prof.register_cells(v2, start).iter().enumerate() {
            let mut weight = cells.iter().filter(|&&i| stored.get(i)).count();
            if g == 0 {
                weight += stored.weight_in(win.clone());
            }
            let width = prof.digit_bits.min(u2_len - g * prof.digit_bits);
            let digit = (weight as u128) % modulus;
            if width < 128 && digit >> width != 0 {
                return Err(Error::MalformedChain(format!(
                    "register {g} holds {digit}, wider than {width} bits"
                )));
            }
            u2.extend(&BitVector::from_uint(digit, width));
        }

        // Steps 3 and 4: inner chain gives u1, outer chain gives the message.
        let inner_meta = SideChannelMetadata::from_bits(&prof.inner, &u2)?;
        let u1 = self.inner.decode(&stored.slice(win), &inner_meta)?;
        if u1.len() != prof.outer.metadata_len() {
            return Err(Error::MalformedChain(format!(
                "inner chain yields {} bits, expected {}",
                u1.len(),
                prof.outer.metadata_len()
            )));
        }
        let outer_meta = SideChannelMetadata::from_bits(&prof.outer, &u1)?;
        self.outer.decode(stored, &outer_meta)
    }
}

// Digit g of u2: bits [g·db, min((g+1)·db, |u2|)) read MSB-first.
fn digit_of(u2: &BitVector, g: usize, db: usize) -> Result<u128> {
    let end = ((g + 1) * db).min(u2.len());
    u2.slice(g * db..end).to_uint()
}

/// Free-function form of [`StrongCodec::encode`] under the contract policy.
pub fn encode(
    profile: &StrongProfile,
    image: &MemoryImage,
    msg: &BitVector,
    seeds: &mut dyn SeedSource,
) -> Result<BitVector> {
    Ok(StrongCodec::new(profile.clone())?
        .encode(image, msg, seeds)?
        .stored)
}

/// Free-function form of [`StrongCodec::decode`]. Takes no frozen set and no ρ.
pub fn decode(profile: &StrongProfile, stored: &BitVector) -> Result<BitVector> {
    StrongCodec::new(profile.clone())?.decode(stored)
}
