//! Strong stuck-at codes.
//!
//! A memory of `N` bits has some cells stuck at values the writer cannot
//! change. The encoder sees which cells are stuck and writes a message around
//! them; the decoder reads the raw `N` bits and recovers the message without
//! knowing where the stuck cells are or how many there were.
//!
//! The crate is layered:
//!
//! - [`gf2`]: bit vectors, GF(2) matrices, constrained solving, weight-residue flips.
//! - [`smallbias`]: the seeded μ-almost k-wise independent generator.
//! - [`blockcodec`]: block encoding with a clean side channel for the metadata.
//! - [`strongcodec`]: the full code, metadata embedded in the memory itself.
//! - [`binning`]: the random-binning construction at toy sizes.
//! - [`harness`]: instance generation, experiments, reports, file formats, CLI.

pub mod binning;
pub mod blockcodec;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod smallbias;
pub mod strongcodec;

pub use blockcodec::{MemoryImage, ParamProfile, SideChannelCodec, SideChannelMetadata};
pub use error::{Error, Result};
pub use gf2::{BitVector, FrozenSet, Gf2Matrix};
pub use smallbias::{Seed, SmallBiasGenerator};
pub use strongcodec::{StrongCodec, StrongProfile};
