//! Block codec with a side channel: the decoder gets the stored vector plus
//! a few dozen bits of metadata.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stuckat::{BitVector, FrozenSet, MemoryImage, ParamProfile, SideChannelCodec};

fn main() -> stuckat::Result<()> {
    let (n, c, rho) = (4096, 4, 0.2);
    let codec = SideChannelCodec::new(ParamProfile::new(n, c)?)?;
    let p = codec.profile();
    println!(
        "B = {}, M = {}, p = {}, q = {}, s = {}, t = {}",
        p.block_len,
        p.blocks,
        p.pointer_width,
        p.count_width,
        p.slack,
        p.seed_len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frozen = FrozenSet::new(
        n,
        rand::seq::index::sample(&mut rng, n, (rho * n as f64) as usize).into_vec(),
    )?;
    let image = MemoryImage::new((0..n).map(|_| rng.gen()).collect(), frozen)?;

    let capacity = codec.plan(&image.frozen, 0)?.capacity;
    let msg: BitVector = (0..capacity).map(|_| rng.gen()).collect();
    let enc = codec.encode(&image, &msg, &mut rng)?;
    println!(
        "|F| = {}, message {} bits (contract {}), metadata {} bits, {} attempt(s), chain of {} blocks",
        image.frozen.len(),
        msg.len(),
        p.contract_len(image.frozen.len()),
        p.metadata_len(),
        enc.attempts,
        enc.plan.chain.len()
    );

    assert!(image.is_consistent(&enc.stored));
    assert_eq!(codec.decode(&enc.stored, &enc.meta)?, msg);
    println!("decoded OK");
    Ok(())
}
