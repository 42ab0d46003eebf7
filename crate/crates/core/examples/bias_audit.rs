//! Exhaustive audit of the generator: every seed, every index set of size
//! up to k, largest deviation from uniform.

use stuckat::harness::run_bias_audit;
use stuckat::smallbias::SeedRule;

fn main() -> stuckat::Result<()> {
    let report = run_bias_audit(64, 3, 6, SeedRule::Guaranteed, 0)?;
    for (key, value) in &report.summary {
        println!("{key:>20} {value}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
