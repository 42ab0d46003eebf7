use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smallbias::{GeneratorParams, SeedRule};

pub(crate) fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Every constant the encoder and decoder must agree on.
///
/// Blocks are numbered `1..=M` and cover positions `(i−1)·B .. i·B`; the last
/// `N mod B` cells belong to no block and are never written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamProfile {
    pub n: usize,
    pub c: usize,
    /// `B`, default `C·⌈log₂ N⌉`.
    pub block_len: usize,
    /// `M = ⌊N/B⌋`.
    pub blocks: usize,
    /// `p = ⌈log₂(M+1)⌉`; pointer 0 terminates the chain.
    pub pointer_width: usize,
    /// `q = ⌈log₂(B+1)⌉`.
    pub count_width: usize,
    /// Rank margin `s`, default `p`.
    pub slack: usize,
    /// Generator over `r = B·N` bits with `k = B`.
    pub generator: GeneratorParams,
    /// Smallest `K` with `t + p + q ≤ K·C·⌈log₂ N⌉`.
    pub k_const: usize,
}

/// Optional overrides on top of the defaults derived from `(N, C)`.
#[derive(Clone, Debug, Default)]
pub struct ProfileBuilder {
    n: usize,
    c: usize,
    block_len: Option<usize>,
    slack: Option<usize>,
    mu_log2: Option<u32>,
    seed_rule: SeedRule,
}

impl ProfileBuilder {
    pub fn block_len(mut self, b: usize) -> Self {
        self.block_len = Some(b);
        self
    }

    pub fn slack(mut self, s: usize) -> Self {
        self.slack = Some(s);
        self
    }

    /// Generator bias `μ = 2^-mu_log2` (default `N^-C`, i.e. `C·⌈log₂ N⌉`).
    pub fn mu_log2(mut self, mu_log2: u32) -> Self {
        self.mu_log2 = Some(mu_log2);
        self
    }

    pub fn seed_rule(mut self, rule: SeedRule) -> Self {
        self.seed_rule = rule;
        self
    }

    pub fn build(self) -> Result<ParamProfile> {
        let (n, c) = (self.n, self.c);
        if c < 3 {
            return Err(Error::InvalidParams(format!("C = {c} must be at least 3")));
        }
        if n < 4 {
            return Err(Error::InvalidParams(format!("N = {n} is too small")));
        }
        let log_n = ceil_log2(n);
        let block_len = self.block_len.unwrap_or(c * log_n);
        if block_len < 2 || block_len > n {
            return Err(Error::InvalidParams(format!(
                "block length {block_len} must lie in 2..=N"
            )));
        }
        let blocks = n / block_len;
        let pointer_width = ceil_log2(blocks + 1);
        let count_width = ceil_log2(block_len + 1);
        let slack = self.slack.unwrap_or(pointer_width);
        let mu_log2 = self.mu_log2.unwrap_or((c * log_n) as u32);
        let r = block_len
            .checked_mul(n)
            .ok_or_else(|| Error::InvalidParams("B·N overflows".into()))?;
        let generator = GeneratorParams::new(r, block_len, mu_log2, self.seed_rule)?;
        let meta = generator.t + pointer_width + count_width;
        let k_const = meta.div_ceil(c * log_n);
        Ok(ParamProfile {
            n,
            c,
            block_len,
            blocks,
            pointer_width,
            count_width,
            slack,
            generator,
            k_const,
        })
    }
}

impl ParamProfile {
    /// Defaults: `B = C·⌈log₂ N⌉`, `s = p`, `μ = N^-C`, guaranteed seed rule.
    pub fn new(n: usize, c: usize) -> Result<Self> {
        ParamProfile::builder(n, c).build()
    }

    pub fn builder(n: usize, c: usize) -> ProfileBuilder {
        ProfileBuilder {
            n,
            c,
            ..ProfileBuilder::default()
        }
    }

    /// Rebuilds the builder that reproduces this profile.
    pub fn to_builder(&self) -> ProfileBuilder {
        ParamProfile::builder(self.n, self.c)
            .block_len(self.block_len)
            .slack(self.slack)
            .mu_log2(self.generator.mu_log2)
            .seed_rule(self.generator.rule)
    }

    pub fn seed_len(&self) -> usize {
        self.generator.t
    }

    /// Side-channel metadata length `t + p + q`.
    pub fn metadata_len(&self) -> usize {
        self.generator.t + self.pointer_width + self.count_width
    }

    /// Per-block overhead `p + q + s`; a block needs more unfrozen cells than
    /// this to carry message bits.
    pub fn overhead(&self) -> usize {
        self.pointer_width + self.count_width + self.slack
    }

    /// Positions of block `i` (1-based).
    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        assert!(
            i >= 1 && i <= self.blocks,
            "block {i} outside 1..={}",
            self.blocks
        );
        (i - 1) * self.block_len..i * self.block_len
    }

    /// `⌊(1 − ρ − 3/C)·N⌋` clamped at 0, with `ρ = frozen/N`.
    pub fn contract_len(&self, frozen: usize) -> usize {
        self.n
            .saturating_sub(frozen)
            .saturating_sub((3 * self.n).div_ceil(self.c))
    }
}
