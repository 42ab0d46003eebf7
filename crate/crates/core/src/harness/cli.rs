use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binning::{build_bin_table, epsilon_for_levels};
use crate::blockcodec::{ParamProfile, SideChannelCodec, DEFAULT_RETRY_CAP};
use crate::error::{Error, Result};
use crate::harness::experiments::{
    binning_exhaustive, rate_sweep, run_bias_audit, run_rank_bound, run_roundtrip_with,
    write_sweep_csv, CodecKind, MatrixSource, RoundtripOptions,
};
use crate::harness::formats::{
    image_from_str, message_from_str, message_to_string, meta_from_str, meta_to_string,
    profile_from_str, read_text, stored_from_str, stored_to_string, write_text, CodecProfile,
    StoredFile,
};
use crate::harness::instance::{DefectModel, InstanceSpec, MsgLen};
use crate::harness::report::ExperimentReport;
use crate::smallbias::SeedRule;
use crate::strongcodec::{RatePolicy, StrongCodec, StrongProfile};

/// Environment variable naming the default report directory.
pub const REPORT_DIR_ENV: &str = "STUCKAT_REPORT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "stuckat",
    version,
    about = "Strong stuck-at codes: encode, decode and experiments"
)]
struct Cli {
    /// Where reports go when no --out is given.
    #[arg(long, global = true, env = REPORT_DIR_ENV, default_value = "reports")]
    report_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a message into a memory image.
    Encode(EncodeArgs),
    /// Recover a message from a stored vector.
    Decode(DecodeArgs),
    /// Encode/decode many random instances and report.
    Roundtrip(RoundtripArgs),
    /// Rank deficiency of random matrices against 2^(m-n) + μ·2^m.
    RankBound(RankArgs),
    /// Deviation from uniform of the small-bias generator.
    BiasAudit(BiasArgs),
    /// Random binning at toy sizes.
    BinningDemo(BinningArgs),
    /// Achieved rate across defect fractions, as CSV.
    RateSweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FileCodec {
    Sidechannel,
    Strong,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Contract,
    Capacity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    Guaranteed,
    Compact,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Profile file; overrides --codec and --c. Without it, N comes from the image.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value = "sidechannel")]
    codec: FileCodec,
    #[arg(long, default_value_t = 4)]
    c: usize,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    message: PathBuf,
    /// Stored-vector file to write.
    #[arg(long)]
    out: PathBuf,
    /// Side-channel metadata file to write (sidechannel codec only).
    #[arg(long)]
    meta_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RETRY_CAP)]
    retry_cap: u32,
    #[arg(long, default_value = "contract")]
    rate_policy: PolicyArg,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    stored: PathBuf,
    /// Side-channel metadata (sidechannel codec only).
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Message file to write; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrialArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long, default_value = "uniform")]
    defect_model: DefectModel,
    /// max-rate, capacity, or a bit count.
    #[arg(long, default_value = "max-rate")]
    msg_len: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RETRY_CAP)]
    retry_cap: u32,
    /// Binning levels L.
    #[arg(long, default_value_t = 3)]
    levels: usize,
}

impl TrialArgs {
    fn spec(&self, rho: f64) -> Result<InstanceSpec> {
        Ok(InstanceSpec::new(self.n, self.c, rho)
            .defect_model(self.defect_model)
            .msg_len(self.msg_len.parse::<MsgLen>()?)
            .trials(self.trials)
            .seed(self.seed))
    }

    fn options(&self) -> RoundtripOptions {
        RoundtripOptions {
            retry_cap: self.retry_cap,
            binning_levels: self.levels,
            ..RoundtripOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct RoundtripArgs {
    #[arg(long)]
    codec: CodecKind,
    #[arg(long)]
    rho: f64,
    #[command(flatten)]
    trial: TrialArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    mu_log2: u32,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value = "uniform")]
    source: MatrixSource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BiasArgs {
    #[arg(long)]
    r: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    mu_log2: u32,
    #[arg(long, default_value = "guaranteed")]
    rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BinningArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample this many trials at --rho instead of the exhaustive audit.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0.25)]
    rho: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    codec: CodecKind,
    /// Comma-separated defect fractions.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7"
    )]
    rhos: Vec<f64>,
    #[command(flatten)]
    trial: TrialArgs,
    /// CSV file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Normal output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.cause());
            1
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let dir = cli.report_dir;
    match cli.command {
        Command::Encode(a) => encode(a, out),
        Command::Decode(a) => decode(a, out),
        Command::Roundtrip(a) => {
            let spec = a.trial.spec(a.rho)?;
            let report = run_roundtrip_with(&spec, a.codec, &a.trial.options())?;
            let name = format!(
                "roundtrip-{}-n{}-rho{}-seed{}.jsonl",
                a.codec, spec.n, spec.rho, spec.rng_seed
            );
            finish_report(&report, a.out, &dir, &name, out)
        }
        Command::RankBound(a) => {
            let report = run_rank_bound(a.m, a.n, a.mu_log2, a.trials, a.source, a.seed)?;
            let name = format!("rank-bound-{}x{}-{:?}.jsonl", a.m, a.n, a.source).to_lowercase();
            finish_report(&report, a.out, &dir, &name, out)
        }
        Command::BiasAudit(a) => {
            let rule = match a.rule {
                RuleArg::Guaranteed => SeedRule::Guaranteed,
                RuleArg::Compact => SeedRule::Compact,
            };
            let report = run_bias_audit(a.r, a.k, a.mu_log2, rule, a.seed)?;
            let name = format!("bias-audit-r{}-k{}-mu{}.jsonl", a.r, a.k, a.mu_log2);
            finish_report(&report, a.out, &dir, &name, out)
        }
        Command::BinningDemo(a) => {
            let report = match a.trials {
                None => binning_exhaustive(
                    &build_bin_table(a.n, a.levels, a.seed)?,
                    epsilon_for_levels(a.levels),
                )?,
                Some(trials) => {
                    let spec = InstanceSpec::new(a.n, 4, a.rho).trials(trials).seed(a.seed);
                    let opts = RoundtripOptions {
                        binning_levels: a.levels,
                        ..RoundtripOptions::default()
                    };
                    run_roundtrip_with(&spec, CodecKind::Binning, &opts)?
                }
            };
            let name = format!("binning-n{}-l{}-seed{}.jsonl", a.n, a.levels, a.seed);
            finish_report(&report, a.out, &dir, &name, out)
        }
        Command::RateSweep(a) => {
            let rows = rate_sweep(&a.trial.spec(0.0)?, a.codec, &a.rhos, &a.trial.options())?;
            match a.out {
                Some(path) => {
                    if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(d)?;
                    }
                    write_sweep_csv(&rows, std::fs::File::create(&path)?)?;
                    writeln!(out, "wrote {}", path.display())?;
                    Ok(())
                }
                None => write_sweep_csv(&rows, out),
            }
        }
    }
}

fn finish_report(
    report: &ExperimentReport,
    explicit: Option<PathBuf>,
    dir: &Path,
    name: &str,
    out: &mut dyn Write,
) -> Result<()> {
    let path = explicit.unwrap_or_else(|| dir.join(name));
    report.save(&path)?;
    let a = &report.aggregates;
    writeln!(
        out,
        "{}: {} trials, {} succeeded, {}/{} decoded, {}/{} consistent",
        report.experiment,
        a.trials,
        a.successes,
        a.decode_matches,
        a.decode_checked,
        a.consistent,
        a.consistency_checked
    )?;
    for (k, v) in &report.summary {
        writeln!(out, "  {k} = {v}")?;
    }
    for n in &report.notes {
        writeln!(out, "  note: {n}")?;
    }
    writeln!(out, "report: {}", path.display())?;
    Ok(())
}

fn load_profile(a: &ProfileArgs, n: usize) -> Result<CodecProfile> {
    if let Some(p) = &a.profile {
        let profile = profile_from_str(&read_text(p)?)?;
        if profile.n() != n {
            return Err(Error::DimensionMismatch {
                expected: profile.n(),
                got: n,
            });
        }
        return Ok(profile);
    }
    Ok(match a.codec {
        FileCodec::Sidechannel => CodecProfile::Sidechannel(ParamProfile::new(n, a.c)?),
        FileCodec::Strong => CodecProfile::Strong(Box::new(StrongProfile::desk(n, a.c)?)),
    })
}

fn encode(a: EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let image = image_from_str(&read_text(&a.image)?)?;
    let msg = message_from_str(&read_text(&a.message)?)?;
    let profile = load_profile(&a.profile, image.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let stored = match &profile {
        CodecProfile::Sidechannel(p) => {
            let meta_out = a.meta_out.as_ref().ok_or_else(|| {
                Error::InvalidParams("the sidechannel codec needs --meta-out".into())
            })?;
            let codec = SideChannelCodec::new(p.clone())?.with_retry_cap(a.retry_cap);
            let enc = codec.encode(&image, &msg, &mut rng)?;
            write_text(meta_out, &meta_to_string(&enc.meta, p))?;
            enc.stored
        }
        CodecProfile::Strong(p) => {
            let policy = match a.rate_policy {
                PolicyArg::Contract => RatePolicy::Contract,
                PolicyArg::Capacity => RatePolicy::Capacity,
            };
            let codec = StrongCodec::new((**p).clone())?
                .with_rate_policy(policy)
                .with_retry_cap(a.retry_cap);
            codec.encode(&image, &msg, &mut rng)?.stored
        }
    };
    write_text(&a.out, &stored_to_string(&StoredFile { profile, stored })?)?;
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let file = stored_from_str(&read_text(&a.stored)?)?;
    let msg = match &file.profile {
        CodecProfile::Sidechannel(p) => {
            let path = a
                .meta
                .as_ref()
                .ok_or_else(|| Error::InvalidParams("the sidechannel codec needs --meta".into()))?;
            let meta = meta_from_str(&read_text(path)?, p)?;
            SideChannelCodec::new(p.clone())?.decode(&file.stored, &meta)?
        }
        CodecProfile::Strong(p) => StrongCodec::new((**p).clone())?.decode(&file.stored)?,
    };
    let text = message_to_string(&msg);
    match a.out {
        Some(path) => write_text(&path, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}
