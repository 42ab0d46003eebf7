use crate::blockcodec::plan::{plan_blocks, BlockPlan};
use crate::blockcodec::ParamProfile;
use crate::error::{Error, Result};
use crate::gf2::{solve_masked, BitVector, FrozenSet, Gf2Matrix};
use crate::smallbias::{Expander, Seed, SmallBiasGenerator};

/// A cover vector together with the positions the writer cannot change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryImage {
    pub cover: BitVector,
    pub frozen: FrozenSet,
}

impl MemoryImage {
    pub fn new(cover: BitVector, frozen: FrozenSet) -> Result<Self> {
        if cover.len() != frozen.universe() {
            return Err(Error::DimensionMismatch {
                expected: cover.len(),
                got: frozen.universe(),
            });
        }
        Ok(MemoryImage { cover, frozen })
    }

    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    /// Does `w` agree with the cover on every frozen position?
    pub fn is_consistent(&self, w: &BitVector) -> bool {
        w.len() == self.cover.len()
            && self
                .frozen
                .indices()
                .iter()
                .all(|&i| w.get(i) == self.cover.get(i))
    }

    /// Same cover, more frozen cells.
    pub fn with_frozen(&self, frozen: FrozenSet) -> Result<Self> {
        MemoryImage::new(self.cover.clone(), frozen)
    }
}

/// What a decoder needs besides the stored vector: `seed ∘ Bin_p(i₁) ∘ Bin_q(m_{i₁})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideChannelMetadata {
    pub seed: Seed,
    pub first_block: usize,
    pub first_count: usize,
}

impl SideChannelMetadata {
    pub fn to_bits(&self, profile: &ParamProfile) -> BitVector {
        let mut out = self.seed.bits().clone();
        out.extend(&BitVector::from_uint(
            self.first_block as u128,
            profile.pointer_width,
        ));
        out.extend(&BitVector::from_uint(
            self.first_count as u128,
            profile.count_width,
        ));
        out
    }

    pub fn from_bits(profile: &ParamProfile, bits: &BitVector) -> Result<Self> {
        if bits.len() != profile.metadata_len() {
            return Err(Error::DimensionMismatch {
                expected: profile.metadata_len(),
                got: bits.len(),
            });
        }
        let t = profile.seed_len();
        let p = profile.pointer_width;
        let seed = Seed::new(bits.slice(0..t))?;
        let first_block = bits.slice(t..t + p).to_uint()? as usize;
        let first_count = bits.slice(t + p..bits.len()).to_uint()? as usize;
        Ok(SideChannelMetadata {
            seed,
            first_block,
            first_count,
        })
    }
}

/// Supplies seeds to the randomized encoder; `None` means "stop retrying".
pub trait SeedSource {
    fn next_seed(&mut self, t: usize) -> Option<Seed>;
}

impl<R: rand::RngCore> SeedSource for R {
    fn next_seed(&mut self, t: usize) -> Option<Seed> {
        Some(Seed::random(t, self))
    }
}

/// A fixed list of seeds, handed out in order.
#[derive(Clone, Debug)]
pub struct FixedSeeds(pub std::collections::VecDeque<Seed>);

impl FixedSeeds {
    pub fn new(seeds: impl IntoIterator<Item = Seed>) -> Self {
        FixedSeeds(seeds.into_iter().collect())
    }
}

impl SeedSource for FixedSeeds {
    fn next_seed(&mut self, t: usize) -> Option<Seed> {
        self.0.pop_front().filter(|s| s.len() == t)
    }
}

/// Result of a successful side-channel encoding.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub stored: BitVector,
    pub meta: SideChannelMetadata,
    /// Seeds tried, including the successful one.
    pub attempts: u32,
    pub plan: BlockPlan,
}

/// The block encoder and decoder for one profile.
///
/// Holds the generator (with its seed-independent tables), so build it once
/// and reuse it across trials.
#[derive(Clone, Debug)]
pub struct SideChannelCodec {
    profile: ParamProfile,
    generator: SmallBiasGenerator,
    retry_cap: u32,
}

pub const DEFAULT_RETRY_CAP: u32 = 16;

impl SideChannelCodec {
    pub fn new(profile: ParamProfile) -> Result<Self> {
        let generator = SmallBiasGenerator::new(profile.generator)?;
        Ok(SideChannelCodec {
            profile,
            generator,
            retry_cap: DEFAULT_RETRY_CAP,
        })
    }

    /// Number of seeds the randomized encoder tries before giving up.
    pub fn with_retry_cap(mut self, cap: u32) -> Self {
        self.retry_cap = cap.max(1);
        self
    }

    pub fn retry_cap(&self) -> u32 {
        self.retry_cap
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn generator(&self) -> &SmallBiasGenerator {
        &self.generator
    }

    pub fn plan(&self, frozen: &FrozenSet, msg_len: usize) -> Result<BlockPlan> {
        plan_blocks(&self.profile, frozen, msg_len)
    }

    /// Plans, then draws seeds until every chain matrix is full rank on its
    /// unfrozen columns or the retry cap is hit.
    pub fn encode(
        &self,
        image: &MemoryImage,
        msg: &BitVector,
        seeds: &mut dyn SeedSource,
    ) -> Result<Encoded> {
        self.check_image(image)?;
        let plan = self.plan(&image.frozen, msg.len())?;
        let mut attempts = 0;
        let mut last_block = 0;
        while attempts < self.retry_cap {
            let Some(seed) = seeds.next_seed(self.profile.seed_len()) else {
                break;
            };
            attempts += 1;
            match self.encode_with_seed(image, msg, &plan, &seed) {
                Ok((stored, meta)) => {
                    return Ok(Encoded {
                        stored,
                        meta,
                        attempts,
                        plan,
                    })
                }
                Err(Error::RankDeficient { block, .. }) => last_block = block,
                Err(e) => return Err(e),
            }
        }
        Err(Error::RankDeficient {
            block: last_block,
            attempts,
        })
    }

    /// One attempt with a given seed.
    pub fn encode_with_seed(
        &self,
        image: &MemoryImage,
        msg: &BitVector,
        plan: &BlockPlan,
        seed: &Seed,
    ) -> Result<(BitVector, SideChannelMetadata)> {
        self.check_image(image)?;
        if plan.msg_len != msg.len() {
            return Err(Error::DimensionMismatch {
                expected: plan.msg_len,
                got: msg.len(),
            });
        }
        let prof = &self.profile;
        let (b, p, q) = (prof.block_len, prof.pointer_width, prof.count_width);
        let mut ex = self.generator.expander(seed)?;
        ex.ensure(plan.stream_len(b));
        let mask = image.frozen.mask();
        let mut stored = image.cover.clone();
        let mut offset = 0;
        let mut msg_pos = 0;
        for (j, &i) in plan.chain.iter().enumerate() {
            let budget = plan.budget(i);
            let (next, next_m) = match plan.chain.get(j + 1) {
                Some(&nx) => (nx, plan.budget(nx).m),
                None => (0, 0),
            };
            let mut target = msg.slice(msg_pos..msg_pos + budget.m);
            target.extend(&BitVector::from_uint(next as u128, p));
            target.extend(&BitVector::from_uint(next_m as u128, q));
            msg_pos += budget.m;

            let a = Gf2Matrix::from_row_major(budget.mbar, b, &ex.bits(offset, budget.mbar * b)?)?;
            offset += budget.mbar * b;
            let range = prof.block_range(i);
            let w = solve_masked(
                &a,
                &mask.slice(range.clone()),
                &image.cover.slice(range.clone()),
                &target,
                true,
            )
            .map_err(|e| match e {
                Error::RankDeficient { .. } => Error::RankDeficient {
                    block: i,
                    attempts: 1,
                },
                other => other,
            })?;
            stored.write_slice(range.start, &w);
        }
        let meta = SideChannelMetadata {
            seed: seed.clone(),
            first_block: plan.first_block(),
            first_count: plan.first_count(),
        };
        Ok((stored, meta))
    }

    /// Walks the chain: multiply, split off message bits, follow the pointer.
    pub fn decode(&self, stored: &BitVector, meta: &SideChannelMetadata) -> Result<BitVector> {
        let prof = &self.profile;
        if stored.len() != prof.n {
            return Err(Error::DimensionMismatch {
                expected: prof.n,
                got: stored.len(),
            });
        }
        let (b, p, q) = (prof.block_len, prof.pointer_width, prof.count_width);
        let mut msg = BitVector::zeros(0);
        let (mut block, mut count) = (meta.first_block, meta.first_count);
        if block == 0 {
            if count != 0 {
                return Err(Error::MalformedChain(format!(
                    "empty chain with count {count}"
                )));
            }
            return Ok(msg);
        }
        let mut ex = self.generator.expander(&meta.seed)?;
        let mut offset = 0;
        let mut prev = 0;
        while block != 0 {
            if block > prof.blocks || block <= prev {
                return Err(Error::MalformedChain(format!(
                    "pointer {block} after block {prev} (M = {})",
                    prof.blocks
                )));
            }
            let mbar = count + p + q;
            if mbar > b {
                return Err(Error::MalformedChain(format!(
                    "count {count} does not fit block {block}"
                )));
            }
            let range = prof.block_range(block);
            let product = block_product(&mut ex, offset, mbar, b, stored, range.start);
            offset += mbar * b;
            msg.extend(&product.slice(0..count));
            prev = block;
            block = product.slice(count..count + p).to_uint()? as usize;
            count = product.slice(count + p..mbar).to_uint()? as usize;
        }
        if count != 0 {
            return Err(Error::MalformedChain(format!(
                "terminator carries count {count}"
            )));
        }
        Ok(msg)
    }

    /// Full rank of every chain block's matrix restricted to its unfrozen
    /// columns under `seed`.
    pub fn seed_is_good(&self, frozen: &FrozenSet, plan: &BlockPlan, seed: &Seed) -> Result<bool> {
        let prof = &self.profile;
        let b = prof.block_len;
        let mut ex = self.generator.expander(seed)?;
        let mut offset = 0;
        for &i in &plan.chain {
            let mbar = plan.budget(i).mbar;
            let free: Vec<usize> = prof
                .block_range(i)
                .filter(|&x| !frozen.contains(x))
                .map(|x| x - (i - 1) * b)
                .collect();
            let a = Gf2Matrix::from_row_major(mbar, b, &ex.bits(offset, mbar * b)?)?;
            offset += mbar * b;
            if a.select_columns(&free).rank() < mbar {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lexicographically first seed among the first `budget` that makes every
    /// chain matrix full rank.
    pub fn deterministic_seed_search(
        &self,
        image: &MemoryImage,
        plan: &BlockPlan,
        budget: u64,
    ) -> Result<Seed> {
        self.check_image(image)?;
        let t = self.profile.seed_len();
        let space = if t >= 64 { u64::MAX } else { 1u64 << t };
        let limit = budget.min(space);
        for idx in 0..limit {
            let seed = Seed::from_index(t, idx as u128);
            if self.seed_is_good(&image.frozen, plan, &seed)? {
                return Ok(seed);
            }
        }
        Err(Error::SearchExhausted { budget: limit })
    }

    /// Derandomized encoder: plan, search, encode with the found seed.
    pub fn encode_deterministic(
        &self,
        image: &MemoryImage,
        msg: &BitVector,
        budget: u64,
    ) -> Result<Encoded> {
        let plan = self.plan(&image.frozen, msg.len())?;
        let seed = self.deterministic_seed_search(image, &plan, budget)?;
        let (stored, meta) = self.encode_with_seed(image, msg, &plan, &seed)?;
        Ok(Encoded {
            stored,
            meta,
            attempts: 1,
            plan,
        })
    }

    fn check_image(&self, image: &MemoryImage) -> Result<()> {
        if image.len() != self.profile.n {
            return Err(Error::DimensionMismatch {
                expected: self.profile.n,
                got: image.len(),
            });
        }
        Ok(())
    }
}

// A·v for the mbar × B matrix at `offset` and the block of `stored` at `start`.
fn block_product(
    ex: &mut Expander<'_>,
    offset: usize,
    mbar: usize,
    b: usize,
    stored: &BitVector,
    start: usize,
) -> BitVector {
    let v: Vec<u64> = (0..b.div_ceil(64))
        .map(|w| stored.word_at(start + 64 * w, (b - 64 * w).min(64)))
        .collect();
    let mut out = BitVector::zeros(mbar);
    for r in 0..mbar {
        let mut acc = 0u64;
        for (w, &vw) in v.iter().enumerate() {
            acc ^= ex.word(offset + r * b + 64 * w, (b - 64 * w).min(64)) & vw;
        }
        if acc.count_ones() & 1 == 1 {
            out.set(r, true);
        }
    }
    out
}

/// Free-function form of [`SideChannelCodec::encode`].
pub fn encode_with_sidechannel(
    profile: &ParamProfile,
    image: &MemoryImage,
    msg: &BitVector,
    seeds: &mut dyn SeedSource,
) -> Result<(BitVector, SideChannelMetadata)> {
    let enc = SideChannelCodec::new(profile.clone())?.encode(image, msg, seeds)?;
    Ok((enc.stored, enc.meta))
}

/// Free-function form of [`SideChannelCodec::decode`].
pub fn decode_with_sidechannel(
    profile: &ParamProfile,
    stored: &BitVector,
    meta: &SideChannelMetadata,
) -> Result<BitVector> {
    SideChannelCodec::new(profile.clone())?.decode(stored, meta)
}

/// Free-function form of [`SideChannelCodec::deterministic_seed_search`].
pub fn deterministic_seed_search(
    profile: &ParamProfile,
    image: &MemoryImage,
    plan: &BlockPlan,
    budget: u64,
) -> Result<Seed> {
    SideChannelCodec::new(profile.clone())?.deterministic_seed_search(image, plan, budget)
}
