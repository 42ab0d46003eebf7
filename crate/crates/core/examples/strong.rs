//! The strong codec: everything the decoder needs is written into the
//! memory itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stuckat::strongcodec::RatePolicy;
use stuckat::{BitVector, FrozenSet, MemoryImage, StrongCodec, StrongProfile};

fn main() -> stuckat::Result<()> {
    let n = 16384;
    let profile = StrongProfile::desk(n, 4)?;
    println!(
        "B' = {}, window {} × {}, {} registers of {} bits, position code mod {}",
        profile.geometry.interval_len,
        profile.window_len,
        profile.windows_per_interval,
        profile.registers,
        profile.digit_bits,
        profile.mod4
    );
    // At C = 4 the guaranteed rate is zero, so accept whatever the layout can place.
    let codec = StrongCodec::new(profile)?.with_rate_policy(RatePolicy::Capacity);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let frozen = FrozenSet::new(n, rand::seq::index::sample(&mut rng, n, 2500).into_vec())?;
    let image = MemoryImage::new((0..n).map(|_| rng.gen()).collect(), frozen)?;
    let cap = codec.capacity(&image.frozen)?;
    let msg: BitVector = (0..cap).map(|_| rng.gen()).collect();

    let enc = codec.encode(&image, &msg, &mut rng)?;
    println!(
        "{} bits into {} cells with {} stuck: interval {}, window {}, {} register flips, {} tail flips",
        msg.len(),
        n,
        image.frozen.len(),
        enc.partition.interval,
        enc.layout.window,
        enc.register_flips,
        enc.tail_flips
    );

    // Only the stored vector goes to the decoder.
    assert_eq!(codec.decode(&enc.stored)?, msg);
    println!("decoded OK");
    Ok(())
}
