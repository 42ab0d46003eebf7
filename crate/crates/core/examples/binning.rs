//! Random binning at toy size: each vector gets a random (level, message)
//! label, and encoding picks a consistent member of the requested bin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stuckat::binning::{
    binning_decode, binning_encode, build_bin_table, epsilon_for_levels, select_level,
};
use stuckat::{BitVector, Error, FrozenSet, MemoryImage};

fn main() -> stuckat::Result<()> {
    let (n, levels) = (12, 3);
    let table = build_bin_table(n, levels, 42)?;
    let eps = epsilon_for_levels(levels);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for stuck in [0, 2, 3, 5] {
        let Some(level) = select_level(n, levels, stuck, eps) else {
            println!("|F| = {stuck}: no level fits");
            continue;
        };
        let frozen = FrozenSet::new(n, rand::seq::index::sample(&mut rng, n, stuck).into_vec())?;
        let image = MemoryImage::new((0..n).map(|_| rng.gen()).collect(), frozen)?;
        let msg: BitVector = (0..table.msg_len(level)).map(|_| rng.gen()).collect();
        match binning_encode(&table, &image, level, &msg) {
            Ok(u) => {
                assert_eq!(binning_decode(&table, &u)?, (level, msg.clone()));
                println!("|F| = {stuck}: level {level}, message {msg} stored as {u}");
            }
            Err(Error::NotEncodable { level }) => {
                println!("|F| = {stuck}: level {level}, bin has no consistent member")
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
