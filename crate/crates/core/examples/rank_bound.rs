//! How often a random m×n matrix fails to have full row rank, against the
//! 2^-(n-m) bound.

use stuckat::harness::{run_rank_bound, MatrixSource};

fn main() -> stuckat::Result<()> {
    for (m, n) in [(8, 10), (16, 20), (32, 36)] {
        for source in [MatrixSource::Uniform, MatrixSource::Generator] {
            let r = run_rank_bound(m, n, 20, 20_000, source, 1)?;
            println!(
                "{m:>2}×{n:<2} {source:?}: deficiency rate {:.5}, bound {:.5}",
                r.summary_value("deficiency_rate").unwrap(),
                (-((n - m) as f64)).exp2()
            );
        }
    }
    Ok(())
}
