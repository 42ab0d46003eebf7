//! Steer the Hamming weight of a vector to a residue by flipping only
//! unfrozen cells.

use stuckat::gf2::{flip_to_residue, BitVector, FrozenSet};

fn main() -> stuckat::Result<()> {
    let v = BitVector::parse_binary("1011001110100101")?;
    let frozen = FrozenSet::new(16, [0, 3, 7, 8])?;
    for (d, x) in [(4, 0), (4, 3), (8, 5)] {
        let w = flip_to_residue(&v, &frozen, d, x)?;
        println!(
            "{v} -> {w}  weight {} ≡ {x} (mod {d}), {} flips",
            w.weight(),
            v.hamming_distance(&w)
        );
        assert_eq!(w.weight() % d, x);
        assert!(frozen.indices().iter().all(|&i| w.get(i) == v.get(i)));
    }
    Ok(())
}
