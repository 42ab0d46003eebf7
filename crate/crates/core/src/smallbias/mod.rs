//! Seeded μ-almost k-wise independent bit generators.

mod code;
mod field;
mod generator;
mod params;
pub mod polys;

pub use code::{build_dual_distance_matrix, DualDistanceMatrix};
pub use field::{field_mul, BinaryField};
pub use generator::{expand_seed, Expander, Seed, SmallBiasGenerator};
pub use params::{derive_params, derive_params_compact, GeneratorParams, SeedRule};
