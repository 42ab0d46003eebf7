//! Instance generation, experiments, reports, file formats and the CLI.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, index)`, so
//! a report is reproducible bit for bit from its spec.

pub mod cli;
pub mod experiments;
pub mod formats;
pub mod instance;
pub mod report;

pub use experiments::{
    binning_exhaustive, rate_sweep, run_bias_audit, run_rank_bound, run_roundtrip,
    run_roundtrip_with, write_sweep_csv, CodecKind, MatrixSource, RoundtripOptions, SweepRow,
};
pub use instance::{
    draw_frozen, generate_instance, generate_instance_with, trial_rng, DefectModel, InstanceSpec,
    MsgLen,
};
pub use report::{Aggregates, ExperimentReport, TrialRecord};
