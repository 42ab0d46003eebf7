//! Solve `A·u = m` over GF(2) while some coordinates of `u` are pinned.

use std::collections::BTreeMap;

use stuckat::gf2::{mat_vec_mul, restricted_rank, solve_constrained, BitVector, Gf2Matrix};

fn main() -> stuckat::Result<()> {
    let a = Gf2Matrix::from_bits(&[
        &[1, 0, 1, 1, 0, 1],
        &[0, 1, 1, 0, 1, 1],
        &[1, 1, 0, 1, 1, 0],
    ])?;
    let target = BitVector::parse_binary("101")?;
    // Cells 0 and 4 are stuck at 1 and 0.
    let fixed = BTreeMap::from([(0, true), (4, false)]);

    let mut mask = BitVector::zeros(a.cols());
    fixed.keys().for_each(|&c| mask.set(c, true));
    println!(
        "rank {} , rank on free columns {}",
        a.rank(),
        restricted_rank(&a, &mask)
    );

    let u = solve_constrained(&a, &fixed, &target)?;
    println!("u = {u}, A·u = {}", mat_vec_mul(&a, &u)?);
    assert_eq!(mat_vec_mul(&a, &u)?, target);
    assert!(u.get(0) && !u.get(4));
    Ok(())
}
