//! Achieved rate against the promised rate as the stuck fraction grows.

use stuckat::harness::{
    rate_sweep, write_sweep_csv, CodecKind, InstanceSpec, MsgLen, RoundtripOptions,
};

fn main() -> stuckat::Result<()> {
    let base = InstanceSpec::new(4096, 4, 0.0)
        .msg_len(MsgLen::Capacity)
        .trials(20)
        .seed(1);
    let rhos = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let rows = rate_sweep(
        &base,
        CodecKind::Sidechannel,
        &rhos,
        &RoundtripOptions::default(),
    )?;
    write_sweep_csv(&rows, std::io::stdout().lock())
}
