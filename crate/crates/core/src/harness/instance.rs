use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockcodec::MemoryImage;
use crate::error::{Error, Result};
use crate::gf2::{BitVector, FrozenSet};

/// How frozen cells are placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DefectModel {
    /// A uniformly random subset of the requested size.
    #[default]
    Uniform,
    /// Runs of up to 64 consecutive cells at random starts (see `BURST_LEN`).
    Clustered,
    /// The first `⌊ρN⌋` cells.
    AdversarialPrefix,
}

/// Longest run placed by [`DefectModel::Clustered`].
pub const BURST_LEN: usize = 64;

/// Which message length a trial uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MsgLen {
    /// The rate the codec promises for every frozen set of this size.
    #[default]
    MaxRate,
    /// Whatever the codec can place for this particular frozen set.
    Capacity,
    Fixed(usize),
}

impl std::str::FromStr for MsgLen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-rate" => Ok(MsgLen::MaxRate),
            "capacity" => Ok(MsgLen::Capacity),
            _ => s.parse().map(MsgLen::Fixed).map_err(|_| {
                Error::InvalidParams(format!(
                    "message length {s:?} is not max-rate, capacity or a number"
                ))
            }),
        }
    }
}

impl std::fmt::Display for MsgLen {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MsgLen::MaxRate => f.write_str("max-rate"),
            MsgLen::Capacity => f.write_str("capacity"),
            MsgLen::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// A family of random trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub c: usize,
    pub rho: f64,
    pub defect_model: DefectModel,
    pub msg_len: MsgLen,
    pub trials: u64,
    pub rng_seed: u64,
}

impl InstanceSpec {
    pub fn new(n: usize, c: usize, rho: f64) -> Self {
        InstanceSpec {
            n,
            c,
            rho,
            defect_model: DefectModel::Uniform,
            msg_len: MsgLen::MaxRate,
            trials: 1,
            rng_seed: 0,
        }
    }

    pub fn defect_model(mut self, model: DefectModel) -> Self {
        self.defect_model = model;
        self
    }

    pub fn msg_len(mut self, len: MsgLen) -> Self {
        self.msg_len = len;
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// `⌊ρN⌋`. A tolerance of 1e-9 keeps values such as `0.3·1000` from
    /// rounding down to 299.
    pub fn frozen_count(&self) -> usize {
        ((self.rho * self.n as f64) + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!(
                "ρ = {} outside [0, 1]",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Independent stream for trial `index`: ChaCha8 keyed by the spec seed, on
/// stream `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn draw_frozen<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    model: DefectModel,
    rng: &mut R,
) -> Result<FrozenSet> {
    if count > n {
        return Err(Error::InvalidParams(format!(
            "cannot freeze {count} of {n} cells"
        )));
    }
    match model {
        DefectModel::Uniform => FrozenSet::new(n, sample(rng, n, count).into_vec()),
        DefectModel::AdversarialPrefix => FrozenSet::new(n, 0..count),
        DefectModel::Clustered => {
            let mut mask = BitVector::zeros(n);
            let mut placed = 0;
            while placed < count {
                let start = rng.gen_range(0..n);
                let len = rng.gen_range(1..=BURST_LEN);
                for i in (start..start + len).map(|i| i % n) {
                    if placed == count {
                        break;
                    }
                    if !mask.get(i) {
                        mask.set(i, true);
                        placed += 1;
                    }
                }
            }
            Ok(FrozenSet::from_mask(&mask))
        }
    }
}

/// Trial `index` of `spec`: frozen set, uniform cover, uniform message.
///
/// `resolve` turns the frozen set into a message length for the non-fixed
/// [`MsgLen`] policies; it depends on the codec under test. Returns the rng
/// positioned after the message, so encoder seeds continue the same stream.
pub fn generate_instance_with(
    spec: &InstanceSpec,
    index: u64,
    resolve: &dyn Fn(&FrozenSet) -> Result<usize>,
) -> Result<(MemoryImage, BitVector, ChaCha8Rng)> {
    spec.validate()?;
    let mut rng = trial_rng(spec.rng_seed, index);
    let frozen = draw_frozen(spec.n, spec.frozen_count(), spec.defect_model, &mut rng)?;
    let cover: BitVector = (0..spec.n).map(|_| rng.gen::<bool>()).collect();
    let len = match spec.msg_len {
        MsgLen::Fixed(len) => len,
        _ => resolve(&frozen)?,
    };
    let msg: BitVector = (0..len).map(|_| rng.gen::<bool>()).collect();
    Ok((MemoryImage::new(cover, frozen)?, msg, rng))
}

/// Trial `index` with message lengths sized for the side-channel codec:
/// max-rate is `⌊(1 − ρ − 3/C)·N⌋`, capacity is what the block planner can place.
pub fn generate_instance(spec: &InstanceSpec, index: u64) -> Result<(MemoryImage, BitVector)> {
    let profile = crate::blockcodec::ParamProfile::new(spec.n, spec.c)?;
    let policy = spec.msg_len;
    let resolve = |f: &FrozenSet| -> Result<usize> {
        Ok(match policy {
            MsgLen::Capacity => crate::blockcodec::plan_capacity(&profile, f),
            _ => profile.contract_len(f.len()),
        })
    };
    let (image, msg, _) = generate_instance_with(spec, index, &resolve)?;
    Ok((image, msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts_and_determinism() {
        let spec = InstanceSpec::new(64, 4, 0.5)
            .msg_len(MsgLen::Fixed(10))
            .seed(11);
        let (a, m, _) = generate_instance_with(&spec, 3, &|_| Ok(0)).unwrap();
        assert_eq!(a.frozen.len(), 32);
        assert_eq!(m.len(), 10);
        let (b, m2, _) = generate_instance_with(&spec, 3, &|_| Ok(0)).unwrap();
        assert_eq!((a, m), (b, m2));

        let zero = InstanceSpec::new(64, 4, 0.0);
        assert!(generate_instance_with(&zero, 0, &|_| Ok(0))
            .unwrap()
            .0
            .frozen
            .is_empty());
    }

    #[test]
    fn every_model_hits_the_count() {
        let mut rng = trial_rng(1, 0);
        for model in [
            DefectModel::Uniform,
            DefectModel::Clustered,
            DefectModel::AdversarialPrefix,
        ] {
            for count in [0, 1, 100, 999, 1000] {
                assert_eq!(
                    draw_frozen(1000, count, model, &mut rng).unwrap().len(),
                    count
                );
            }
        }
    }

    #[test]
    fn floor_rule() {
        assert_eq!(InstanceSpec::new(1000, 4, 0.3).frozen_count(), 300);
        assert_eq!(InstanceSpec::new(4096, 4, 0.3).frozen_count(), 1228);
    }
}
