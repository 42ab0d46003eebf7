//! The strong stuck-at code: no side channel, decoder blind to the frozen set.
//!
//! Layout of an encoded memory, left to right:
//!
//! ```text
//! | v1 ........ | v2 = v21 | v22 | v23 | v3 ........ | v4 (tail) |
//!   message       residues  u1    residues  message     position code
//! ```
//!
//! The message is block-encoded over `v1 ∪ v3` with side-channel metadata
//! `u1`. `u1` is block-encoded inside the window `v22`, whose own metadata
//! `u2` is stored as weight residues of the rest of `v2`. Finally the weight
//! of the whole memory modulo `mod4` names the interval and window. The
//! decoder unwinds those four layers in reverse.

mod codec;
mod partition;
mod profile;

pub use codec::{
    decode, encode, find_subblock, pack_position_code, unpack_position_code, valid_windows,
    NestedLayout, RatePolicy, StrongCodec, StrongEncoded,
};
pub use partition::{find_partition, tail_start, Partition, PartitionGeometry};
pub use profile::{StrongProfile, StrongProfileBuilder};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockcodec::MemoryImage;
    use crate::gf2::{BitVector, FrozenSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn image(n: usize, frozen: usize, rng: &mut ChaCha8Rng) -> MemoryImage {
        let cover: BitVector = (0..n).map(|_| rng.gen()).collect();
        let idx = rand::seq::index::sample(rng, n, frozen).into_vec();
        MemoryImage::new(cover, FrozenSet::new(n, idx).unwrap()).unwrap()
    }

    #[test]
    fn pack_unpack_is_a_bijection() {
        let p = StrongProfile::desk(16384, 4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..p.geometry.intervals {
            for w in 0..p.windows_per_interval {
                let d = pack_position_code(&p, i, w).unwrap();
                assert!(d < p.mod4);
                assert!(seen.insert(d));
                assert_eq!(unpack_position_code(&p, d).unwrap(), (i, w));
            }
        }
        assert_eq!(pack_position_code(&p, 0, 0).unwrap(), 0);
        assert_eq!(pack_position_code(&p, 3, 2).unwrap(), 4 * 3 - 1);
        assert!(unpack_position_code(&p, 12).is_err());
    }

    #[test]
    fn subblock_skips_a_packed_window() {
        let p = StrongProfile::desk(16384, 4).unwrap();
        let part = find_partition(&p.geometry, &FrozenSet::empty(16384)).unwrap();
        assert_eq!(
            find_subblock(&p, &part, &FrozenSet::empty(16384))
                .unwrap()
                .window,
            0
        );
        let f = FrozenSet::new(16384, 0..900).unwrap();
        let part = find_partition(&p.geometry, &f).unwrap();
        // 900 frozen cells fit the interval bound but not the first window's.
        assert_eq!(part.interval, 0);
        let l = find_subblock(&p, &part, &f).unwrap();
        assert_eq!((l.window, l.start), (1, 1024));
    }

    #[test]
    fn round_trip_capacity_policy() {
        let codec = StrongCodec::new(StrongProfile::desk(16384, 4).unwrap())
            .unwrap()
            .with_rate_policy(RatePolicy::Capacity);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for rho in [0.0, 0.1, 0.3] {
            let img = image(16384, (rho * 16384.0) as usize, &mut rng);
            let cap = codec.capacity(&img.frozen).unwrap();
            let msg: BitVector = (0..cap).map(|_| rng.gen()).collect();
            let enc = codec.encode(&img, &msg, &mut rng).unwrap();
            assert!(img.is_consistent(&enc.stored));
            assert_eq!(codec.decode(&enc.stored).unwrap(), msg, "rho {rho}");
        }
    }

    #[test]
    fn contract_policy_rejects_above_bound() {
        let codec = StrongCodec::new(StrongProfile::desk(16384, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = image(16384, 0, &mut rng);
        // (1 − 0 − 5/4)·N < 0, so only the empty message is in contract.
        let err = codec
            .encode(&img, &BitVector::zeros(1), &mut rng)
            .unwrap_err();
        assert_eq!(
            err,
            crate::error::Error::MessageTooLong {
                len: 1,
                capacity: 0
            }
        );
        let enc = codec.encode(&img, &BitVector::zeros(0), &mut rng).unwrap();
        assert!(codec.decode(&enc.stored).unwrap().is_empty());
    }
}
