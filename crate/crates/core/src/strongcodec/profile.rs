use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::blockcodec::{ceil_log2, ParamProfile};
use crate::error::{Error, Result};
use crate::strongcodec::partition::PartitionGeometry;

/// Constants shared by the strong encoder and decoder.
///
/// Inside the metadata interval `v₂` sits an aligned window `v₂₂` of
/// `window_len` cells that holds the outer metadata `u₁`, block-encoded under
/// `inner`. The inner metadata `u₂` is cut into `registers` digits of
/// `digit_bits` bits; digit `g` is stored as the weight, modulo
/// `2^digit_bits`, of the cells of `v₂ \ v₂₂` that register `g` owns
/// (register 0 also counts `v₂₂`). With one register this is the single residue
/// `wt(v₂) ≡ U (mod 2^{|u₂|})`. The window position is stored as the weight of
/// the whole memory modulo `mod4`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongProfile {
    pub n: usize,
    pub c: usize,
    pub outer: ParamProfile,
    pub inner: ParamProfile,
    pub geometry: PartitionGeometry,
    /// `len22`.
    pub window_len: usize,
    pub windows_per_interval: usize,
    pub digit_bits: usize,
    pub registers: usize,
    /// Smallest power of two ≥ `C · windows_per_interval`.
    pub mod4: u64,
}

#[derive(Clone, Debug)]
pub struct StrongProfileBuilder {
    n: usize,
    c: usize,
    outer: Option<ParamProfile>,
    window_len: Option<usize>,
    inner_c: Option<usize>,
    inner_mu_log2: Option<u32>,
    digit_bits: Option<usize>,
}

impl StrongProfileBuilder {
    pub fn outer(mut self, outer: ParamProfile) -> Self {
        self.outer = Some(outer);
        self
    }

    pub fn window_len(mut self, len: usize) -> Self {
        self.window_len = Some(len);
        self
    }

    pub fn inner_c(mut self, c: usize) -> Self {
        self.inner_c = Some(c);
        self
    }

    pub fn inner_mu_log2(mut self, mu_log2: u32) -> Self {
        self.inner_mu_log2 = Some(mu_log2);
        self
    }

    /// Bits per residue register; `None` keeps one register for all of `u₂`.
    pub fn digit_bits(mut self, bits: usize) -> Self {
        self.digit_bits = Some(bits);
        self
    }

    pub fn build(self) -> Result<StrongProfile> {
        let (n, c) = (self.n, self.c);
        let outer = match self.outer {
            Some(o) => o,
            None => ParamProfile::new(n, c)?,
        };
        if outer.n != n || outer.c != c {
            return Err(Error::InvalidParams(
                "outer profile does not match (N, C)".into(),
            ));
        }
        let geometry = PartitionGeometry::new(n, c, outer.block_len)?;
        let window_len = match self.window_len {
            Some(w) => w,
            None => asymptotic_window_len(n, c, outer.k_const),
        };
        if window_len == 0 || window_len > geometry.interval_len {
            return Err(Error::InvalidParams(format!(
                "window length {window_len} must lie in 1..={}",
                geometry.interval_len
            )));
        }
        let mut inner = ParamProfile::builder(window_len, self.inner_c.unwrap_or(c));
        if let Some(mu) = self.inner_mu_log2 {
            inner = inner.mu_log2(mu);
        }
        let inner = inner.build()?;
        let u2 = inner.metadata_len();
        let digit_bits = self.digit_bits.unwrap_or(u2).clamp(1, u2);
        if digit_bits > 127 {
            return Err(Error::InvalidParams(format!(
                "register of {digit_bits} bits exceeds 127"
            )));
        }
        let registers = u2.div_ceil(digit_bits);
        let windows_per_interval = geometry.interval_len / window_len;
        let mod4 = ((c * windows_per_interval) as u64).next_power_of_two();
        Ok(StrongProfile {
            n,
            c,
            outer,
            inner,
            geometry,
            window_len,
            windows_per_interval,
            digit_bits,
            registers,
            mod4,
        })
    }
}

/// `⌊N^{1/(2KC)}⌋`, at least 1.
fn asymptotic_window_len(n: usize, c: usize, k: usize) -> usize {
    let e = 1.0 / (2.0 * k as f64 * c as f64);
    ((n as f64).powf(e).floor() as usize).max(1)
}

impl StrongProfile {
    /// The asymptotic sizing: `len22 = N^{1/2KC}`, one residue register. Only
    /// meaningful for astronomically large `N`; at desk sizes the inner
    /// profile cannot even be built.
    pub fn asymptotic(n: usize, c: usize) -> Result<Self> {
        StrongProfile::builder(n, c).build()
    }

    /// Sizing that works at `N ≈ 2¹⁴`: a window of `2^⌊(log₂N + 6)/2⌋` cells
    /// and 4-bit residue registers.
    pub fn desk(n: usize, c: usize) -> Result<Self> {
        let w = 1usize << ((ceil_log2(n) + 6) / 2);
        StrongProfile::builder(n, c)
            .window_len(w)
            .digit_bits(4)
            .build()
    }

    pub fn builder(n: usize, c: usize) -> StrongProfileBuilder {
        StrongProfileBuilder {
            n,
            c,
            outer: None,
            window_len: None,
            inner_c: None,
            inner_mu_log2: None,
            digit_bits: None,
        }
    }

    pub fn to_builder(&self) -> StrongProfileBuilder {
        StrongProfile::builder(self.n, self.c)
            .outer(self.outer.clone())
            .window_len(self.window_len)
            .inner_c(self.inner.c)
            .inner_mu_log2(self.inner.generator.mu_log2)
            .digit_bits(self.digit_bits)
    }

    /// `K` of the outer metadata bound.
    pub fn k_const(&self) -> usize {
        self.outer.k_const
    }

    /// Modulus of each residue register, `2^digit_bits`.
    pub fn register_modulus(&self) -> u128 {
        1u128 << self.digit_bits
    }

    /// `⌊(1 − ρ − 5/C)·N⌋` clamped at 0.
    pub fn contract_len(&self, frozen: usize) -> usize {
        self.n
            .saturating_sub(frozen)
            .saturating_sub((5 * self.n).div_ceil(self.c))
    }

    /// Positions of `v₂ \ v₂₂` owned by each register. Register `g` takes
    /// every `registers`-th cell starting at the `g`-th, so a burst of frozen
    /// cells is shared out evenly instead of starving one register.
    pub fn register_cells(&self, v2: Range<usize>, window_start: usize) -> Vec<Vec<usize>> {
        let w_end = window_start + self.window_len;
        let mut cells = vec![Vec::new(); self.registers];
        for (x, i) in (v2.start..window_start).chain(w_end..v2.end).enumerate() {
            cells[x % self.registers].push(i);
        }
        cells
    }

    /// Static feasibility at a design defect fraction `rho`, assuming frozen
    /// cells spread evenly. Returns every violated condition.
    pub fn check_design(&self, rho: f64) -> Vec<String> {
        let mut issues = Vec::new();
        let delta = 1.0 / self.c as f64;
        if rho + 2.0 * delta >= 1.0 {
            issues.push(format!("ρ + 2δ = {:.3} is not below 1", rho + 2.0 * delta));
        }
        let inner = &self.inner;
        let per_block = ((inner.block_len as f64) * (1.0 - rho)).floor() as usize;
        let cap = inner.blocks * per_block.saturating_sub(inner.overhead());
        if cap < self.outer.metadata_len() {
            issues.push(format!(
                "inner capacity {cap} < outer metadata {}",
                self.outer.metadata_len()
            ));
        }
        let per_register = (self.geometry.interval_len - self.window_len) / self.registers.max(1);
        let free = ((per_register as f64) * (1.0 - rho)).floor() as u128;
        if free < 2 * self.register_modulus() {
            issues.push(format!(
                "register has ~{free} free cells, needs {}",
                2 * self.register_modulus()
            ));
        }
        let tail = self
            .geometry
            .tail_unfrozen
            .saturating_sub(self.outer.block_len) as u64;
        if tail < 2 * self.mod4 {
            issues.push(format!(
                "tail has {tail} free cells, needs {}",
                2 * self.mod4
            ));
        }
        if self.windows_per_interval == 0 {
            issues.push("window longer than interval".into());
        }
        issues
    }
}
