//! Bit vectors, GF(2) matrices, constrained solving and weight-residue flips.

mod bitvec;
mod flip;
mod frozen;
mod matrix;
mod solve;

pub use bitvec::{weight, BitVector};
pub use flip::{flip_positions_to_residue, flip_to_residue};
pub use frozen::FrozenSet;
pub use matrix::Gf2Matrix;
pub use solve::{mat_vec_mul, rank, restricted_rank, solve_constrained, solve_masked};
