//! Expand a short seed into a long k-wise small-bias string.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stuckat::smallbias::{derive_params, derive_params_compact, Seed, SmallBiasGenerator};

fn main() -> stuckat::Result<()> {
    let params = derive_params(4096, 8, 12)?;
    println!(
        "r = {}, k = {}, μ = 2^-{}: seed length t = {}",
        params.r, params.k, params.mu_log2, params.t
    );
    let compact = derive_params_compact(4096, 8, 12)?;
    println!(
        "compact rule gives t = {} (bias bound {:.3e})",
        compact.t,
        compact.bias_bound()
    );

    let gen = SmallBiasGenerator::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seed = Seed::random(params.t, &mut rng);
    let out = gen.expand(&seed, params.r)?;
    println!(
        "seed {}\nfirst 64 output bits {}",
        seed.bits(),
        out.slice(0..64)
    );
    println!("weight {} of {}", out.weight(), out.len());

    // Same seed, same string.
    assert_eq!(gen.expand(&seed, params.r)?, out);
    Ok(())
}
