use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the seed length is derived from `(h, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SeedRule {
    /// `t = 2·⌈log₂(h/μ)⌉`. Each seed half then lives in a field of at least
    /// `h/μ` elements, which bounds the bias of every nonzero parity of the
    /// output by `(h−1)/2^{t/2} ≤ μ`.
    #[default]
    Guaranteed,
    /// `t = ⌈log₂(h/μ)⌉` rounded up to even. Half the seed for the same
    /// nominal μ, but the provable bias is only about `sqrt(h·μ)`. Useful
    /// when seeds must be enumerated exhaustively.
    Compact,
}

/// Shape of a small-bias generator `{0,1}^t → {0,1}^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Output length.
    pub r: usize,
    /// Independence order.
    pub k: usize,
    /// The bias target is `μ = 2^-mu_log2`.
    pub mu_log2: u32,
    /// Degree of the evaluation field, `⌈log₂ r⌉`.
    pub m: u32,
    /// Inner dimension `k·m`.
    pub h: usize,
    /// Seed length in bits; always even.
    pub t: usize,
    pub rule: SeedRule,
}

pub(crate) fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

impl GeneratorParams {
    pub fn new(r: usize, k: usize, mu_log2: u32, rule: SeedRule) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParams(format!(
                "output length r = {r} must be at least 2"
            )));
        }
        if k == 0 || k > r {
            return Err(Error::InvalidParams(format!(
                "independence order k = {k} must lie in 1..=r"
            )));
        }
        if mu_log2 == 0 {
            return Err(Error::InvalidParams(
                "μ must be below 1 (mu_log2 ≥ 1)".into(),
            ));
        }
        let m = ceil_log2(r as u128);
        if m > 31 {
            return Err(Error::InvalidParams(format!(
                "r = {r} needs an evaluation field above degree 31"
            )));
        }
        let h = k
            .checked_mul(m as usize)
            .ok_or_else(|| Error::InvalidParams("h = k·⌈log₂ r⌉ overflows".into()))?;
        let base = ceil_log2(h as u128) as usize + mu_log2 as usize;
        let t = match rule {
            SeedRule::Guaranteed => 2 * base,
            SeedRule::Compact => base + base % 2,
        };
        if t / 2 > 127 {
            return Err(Error::InvalidParams(format!(
                "seed half of {} bits exceeds the 127-bit field limit",
                t / 2
            )));
        }
        Ok(GeneratorParams {
            r,
            k,
            mu_log2,
            m,
            h,
            t,
            rule,
        })
    }

    pub fn mu(&self) -> f64 {
        (-(self.mu_log2 as f64)).exp2()
    }

    /// Provable bias of any nonzero parity of at most `k` outputs: `(h−1)/2^{t/2}`.
    pub fn bias_bound(&self) -> f64 {
        (self.h.saturating_sub(1)) as f64 / (self.t as f64 / 2.0).exp2()
    }
}

/// Parameters with the guaranteed seed rule (see [`SeedRule::Guaranteed`]).
pub fn derive_params(r: usize, k: usize, mu_log2: u32) -> Result<GeneratorParams> {
    GeneratorParams::new(r, k, mu_log2, SeedRule::Guaranteed)
}

/// Parameters with the literal `t = ⌈log₂(h/μ)⌉` rule (see [`SeedRule::Compact`]).
pub fn derive_params_compact(r: usize, k: usize, mu_log2: u32) -> Result<GeneratorParams> {
    GeneratorParams::new(r, k, mu_log2, SeedRule::Compact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_rule_examples() {
        let p = derive_params_compact(64, 4, 6).unwrap();
        assert_eq!((p.h, p.t), (24, 12));
        let p = derive_params_compact(2, 1, 1).unwrap();
        assert_eq!((p.h, p.t), (1, 2));
    }

    #[test]
    fn guaranteed_rule_doubles_the_field() {
        let p = derive_params(64, 4, 6).unwrap();
        assert_eq!((p.h, p.t), (24, 22));
        assert!(p.bias_bound() <= p.mu());
        let p = derive_params(16, 2, 4).unwrap();
        assert_eq!(p.t, 14);
        let p = derive_params(2, 1, 1).unwrap();
        assert_eq!(p.t, 2);
    }

    #[test]
    fn logarithmic_seed_at_remark_scale() {
        // r = B·N, k = B, μ = N^-C with B = C·log₂ N at N = 4096, C = 3.
        let (n, c) = (4096usize, 3usize);
        let b = c * 12;
        let p = derive_params(b * n, b, (c * 12) as u32).unwrap();
        assert_eq!(p.t, 92);
        assert!(p.t <= 4 * c * 12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(derive_params(1, 1, 1).is_err());
        assert!(derive_params(8, 0, 1).is_err());
        assert!(derive_params(8, 9, 1).is_err());
        assert!(derive_params(8, 2, 0).is_err());
        assert!(derive_params(1 << 20, 1 << 10, 120).is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4096), 12);
        assert_eq!(ceil_log2(4097), 13);
    }
}
