use std::collections::BTreeMap;

use proptest::prelude::*;
use stuckat::gf2::{
    flip_to_residue, restricted_rank, solve_constrained, solve_masked, BitVector, FrozenSet,
    Gf2Matrix,
};
use stuckat::Error;

// Rank as log2 of the size of the row span, found by enumerating every
// combination of rows. Shares nothing with elimination.
fn span_rank(rows: &[u64]) -> usize {
    let mut span = std::collections::HashSet::new();
    for mask in 0u32..1 << rows.len() {
        let v = (0..rows.len())
            .filter(|&i| mask >> i & 1 == 1)
            .fold(0u64, |acc, i| acc ^ rows[i]);
        span.insert(v);
    }
    span.len().trailing_zeros() as usize
}

fn matrix_from_words(rows: &[u64], cols: usize) -> Gf2Matrix {
    let bits: Vec<BitVector> = rows
        .iter()
        .map(|&r| (0..cols).map(|c| r >> c & 1 == 1).collect())
        .collect();
    Gf2Matrix::from_rows(&bits).unwrap()
}

#[test]
fn rank_of_every_3x3_matrix() {
    for m in 0u64..512 {
        let rows = [m & 7, m >> 3 & 7, m >> 6 & 7];
        let a = matrix_from_words(&rows, 3);
        assert_eq!(a.rank(), span_rank(&rows), "matrix {m:09b}");
        assert_eq!(a.transpose().rank(), a.rank());
    }
}

#[test]
fn full_rank_3x3_count() {
    // |GL(3, 2)| = (8 − 1)(8 − 2)(8 − 4) = 168.
    let full = (0u64..512)
        .filter(|&m| matrix_from_words(&[m & 7, m >> 3 & 7, m >> 6 & 7], 3).rank() == 3)
        .count();
    assert_eq!(full, 168);
}

#[test]
fn solve_matches_brute_force_on_2x4() {
    // Every 2×4 matrix, every pinned set, every target: a solution exists iff
    // brute force finds one, and the returned one is valid.
    for m in 0u64..256 {
        let rows = [m & 15, m >> 4 & 15];
        let a = matrix_from_words(&rows, 4);
        for pin in 0u64..16 {
            for vals in 0u64..16 {
                let fixed: BTreeMap<usize, bool> = (0..4)
                    .filter(|&c| pin >> c & 1 == 1)
                    .map(|c| (c, vals >> c & 1 == 1))
                    .collect();
                for t in 0u64..4 {
                    let target: BitVector = (0..2).map(|r| t >> r & 1 == 1).collect();
                    let exists = (0u64..16).any(|w| {
                        fixed.iter().all(|(&c, &b)| (w >> c & 1 == 1) == b)
                            && (0..2)
                                .all(|r| ((rows[r] & w).count_ones() % 2 == 1) == target.get(r))
                    });
                    match solve_constrained(&a, &fixed, &target) {
                        Ok(w) => {
                            assert!(exists);
                            assert_eq!(a.mul_vec(&w).unwrap(), target);
                            assert!(fixed.iter().all(|(&c, &b)| w.get(c) == b));
                        }
                        Err(e) => {
                            assert!(!exists, "solver missed a solution");
                            assert!(matches!(e, Error::RankDeficient { block: 0, .. }));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn full_rank_mode_rejects_reachable_target_on_deficient_matrix() {
    let a = Gf2Matrix::from_bits(&[&[1, 1, 0], &[1, 1, 0]]).unwrap();
    let target = BitVector::parse_binary("11").unwrap();
    let none = BitVector::zeros(3);
    assert!(solve_masked(&a, &none, &none, &target, false).is_ok());
    assert!(solve_masked(&a, &none, &none, &target, true).is_err());
    assert_eq!(restricted_rank(&a, &none), 1);
}

#[test]
fn weight_residue_exhaustive_on_eight_bits() {
    // Every v, every frozen set with at least 2d free cells, every x < d.
    let n = 8;
    for d in 1..=4usize {
        for fmask in 0u32..1 << n {
            if n - (fmask.count_ones() as usize) < 2 * d {
                continue;
            }
            let frozen = FrozenSet::from_mask(&BitVector::from_uint(fmask as u128, n));
            for v in 0u32..1 << n {
                let v = BitVector::from_uint(v as u128, n);
                for x in 0..d {
                    let w = flip_to_residue(&v, &frozen, d, x).unwrap();
                    assert_eq!(w.weight() % d, x);
                    assert!(v.hamming_distance(&w) <= d);
                    assert!(frozen.indices().iter().all(|&i| w.get(i) == v.get(i)));
                }
            }
        }
    }
}

fn arb_bits(max: usize) -> impl Strategy<Value = BitVector> {
    prop::collection::vec(any::<bool>(), 0..max).prop_map(|b| BitVector::from_bools(&b))
}

proptest! {
    #[test]
    fn hex_round_trip(v in arb_bits(300)) {
        prop_assert_eq!(BitVector::from_hex(&v.to_hex(), v.len()).unwrap(), v);
    }

    #[test]
    fn weight_is_sum_of_parts(v in arb_bits(300), cut in 0usize..300) {
        let cut = cut.min(v.len());
        prop_assert_eq!(v.weight(), v.weight_in(0..cut) + v.weight_in(cut..v.len()));
        prop_assert_eq!(v.slice(0..cut).concat(&v.slice(cut..v.len())), v);
    }

    #[test]
    fn rank_invariants(rows in 1usize..12, cols in 1usize..70, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bits: BitVector = (0..rows * cols).map(|_| rng.gen::<bool>()).collect();
        let a = Gf2Matrix::from_row_major(rows, cols, &bits).unwrap();
        let r = a.rank();
        prop_assert!(r <= rows.min(cols));
        prop_assert_eq!(r, a.transpose().rank());
        if cols <= 64 {
            let words: Vec<u64> = (0..rows).map(|i| (0..cols).fold(0u64, |w, c| w | (a.get(i, c) as u64) << c)).collect();
            prop_assert_eq!(r, span_rank(&words));
        }
    }

    #[test]
    fn solutions_respect_pins(rows in 1usize..10, extra in 0usize..20, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cols = rows + extra;
        let bits: BitVector = (0..rows * cols).map(|_| rng.gen::<bool>()).collect();
        let a = Gf2Matrix::from_row_major(rows, cols, &bits).unwrap();
        let mut fixed = BTreeMap::new();
        for c in 0..cols {
            if rng.gen_bool(0.3) {
                fixed.insert(c, rng.gen::<bool>());
            }
        }
        let target: BitVector = (0..rows).map(|_| rng.gen::<bool>()).collect();
        if let Ok(w) = solve_constrained(&a, &fixed, &target) {
            prop_assert_eq!(a.mul_vec(&w).unwrap(), target);
            for (&c, &b) in &fixed {
                prop_assert_eq!(w.get(c), b);
            }
        } else {
            let mask: BitVector = (0..cols).map(|c| fixed.contains_key(&c)).collect();
            prop_assert!(restricted_rank(&a, &mask) < rows);
        }
    }

    #[test]
    fn residue_flips_are_frozen_safe(v in arb_bits(80), d in 1usize..8, x_seed in any::<usize>(), fseed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let n = v.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(fseed);
        let frozen = FrozenSet::new(n, (0..n).filter(|_| rng.gen_bool(0.4))).unwrap();
        let x = x_seed % d;
        match flip_to_residue(&v, &frozen, d, x) {
            Ok(w) => {
                prop_assert_eq!(w.weight() % d, x);
                prop_assert!(frozen.indices().iter().all(|&i| w.get(i) == v.get(i)));
                if frozen.unfrozen_count() >= 2 * d {
                    prop_assert!(v.hamming_distance(&w) <= d);
                }
            }
            Err(e) => {
                prop_assert!(frozen.unfrozen_count() < 2 * d, "{:?}", e);
            }
        }
    }
}
