use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binning::{
    binning_decode, binning_encode, build_bin_table, epsilon_for_levels, select_level, BinTable,
};
use crate::blockcodec::{
    plan_capacity, MemoryImage, ParamProfile, SideChannelCodec, DEFAULT_RETRY_CAP,
};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, FrozenSet, Gf2Matrix};
use crate::harness::instance::{generate_instance_with, InstanceSpec, MsgLen};
use crate::harness::report::{binomial_sigma, ExperimentReport, TrialRecord};
use crate::smallbias::{GeneratorParams, Seed, SeedRule, SmallBiasGenerator};
use crate::strongcodec::{RatePolicy, StrongCodec, StrongProfile};

/// Codec exercised by a round-trip experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CodecKind {
    Sidechannel,
    Strong,
    Binning,
}

impl std::fmt::Display for CodecKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CodecKind::Sidechannel => "sidechannel",
            CodecKind::Strong => "strong",
            CodecKind::Binning => "binning",
        })
    }
}

/// Knobs for [`run_roundtrip_with`]. `None` profiles mean the defaults for
/// `(N, C)`: [`ParamProfile::new`] and [`StrongProfile::desk`].
#[derive(Clone, Debug)]
pub struct RoundtripOptions {
    pub retry_cap: u32,
    pub sidechannel: Option<ParamProfile>,
    pub strong: Option<StrongProfile>,
    pub binning_levels: usize,
    /// Defaults to `2/(L+1)`.
    pub binning_epsilon: Option<f64>,
}

impl Default for RoundtripOptions {
    fn default() -> Self {
        RoundtripOptions {
            retry_cap: DEFAULT_RETRY_CAP,
            sidechannel: None,
            strong: None,
            binning_levels: 3,
            binning_epsilon: None,
        }
    }
}

pub fn run_roundtrip(spec: &InstanceSpec, kind: CodecKind) -> Result<ExperimentReport> {
    run_roundtrip_with(spec, kind, &RoundtripOptions::default())
}

/// Encode then decode every trial of `spec`. Failures are recorded, not
/// returned; an `Err` means the spec and codec cannot be set up at all.
pub fn run_roundtrip_with(
    spec: &InstanceSpec,
    kind: CodecKind,
    opts: &RoundtripOptions,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let (records, profile_echo) = match kind {
        CodecKind::Sidechannel => {
            let profile = match &opts.sidechannel {
                Some(p) => p.clone(),
                None => ParamProfile::new(spec.n, spec.c)?,
            };
            let codec = SideChannelCodec::new(profile.clone())?.with_retry_cap(opts.retry_cap);
            let records = (0..spec.trials)
                .map(|i| sidechannel_trial(spec, &codec, i))
                .collect();
            (records, serde_json::to_value(&profile))
        }
        CodecKind::Strong => {
            let profile = match &opts.strong {
                Some(p) => p.clone(),
                None => StrongProfile::desk(spec.n, spec.c)?,
            };
            let policy = if spec.msg_len == MsgLen::Capacity {
                RatePolicy::Capacity
            } else {
                RatePolicy::Contract
            };
            let codec = StrongCodec::new(profile.clone())?
                .with_rate_policy(policy)
                .with_retry_cap(opts.retry_cap);
            let records = (0..spec.trials)
                .map(|i| strong_trial(spec, &codec, i))
                .collect();
            (records, serde_json::to_value(&profile))
        }
        CodecKind::Binning => {
            let table = build_bin_table(spec.n, opts.binning_levels, spec.rng_seed)?;
            let eps = opts
                .binning_epsilon
                .unwrap_or_else(|| epsilon_for_levels(opts.binning_levels));
            let records = (0..spec.trials)
                .map(|i| binning_trial(spec, &table, eps, i))
                .collect();
            (records, serde_json::to_value(table.params()))
        }
    };
    let params = serde_json::json!({
        "codec": kind,
        "spec": spec,
        "retry_cap": opts.retry_cap,
        "profile": profile_echo.map_err(|e| Error::Format(e.to_string()))?,
    });
    Ok(ExperimentReport::new(
        &format!("roundtrip-{kind}"),
        params,
        records,
    ))
}

fn base_record(index: u64, image: &MemoryImage, msg: &BitVector) -> TrialRecord {
    TrialRecord {
        frozen: Some(image.frozen.len()),
        msg_len: Some(msg.len()),
        ..TrialRecord::new(index)
    }
}

fn sidechannel_trial(spec: &InstanceSpec, codec: &SideChannelCodec, index: u64) -> TrialRecord {
    let profile = codec.profile();
    let resolve = |f: &FrozenSet| -> Result<usize> {
        Ok(match spec.msg_len {
            MsgLen::Capacity => plan_capacity(profile, f),
            _ => profile.contract_len(f.len()),
        })
    };
    let (image, msg, mut rng) = match generate_instance_with(spec, index, &resolve) {
        Ok(x) => x,
        Err(e) => return TrialRecord::failed(index, &e),
    };
    let mut rec = base_record(index, &image, &msg);
    rec.metadata_len = Some(profile.metadata_len());
    match codec.encode(&image, &msg, &mut rng) {
        Ok(enc) => {
            rec.success = true;
            rec.attempts = Some(enc.attempts);
            rec.flips = Some(image.cover.hamming_distance(&enc.stored));
            rec.consistent = Some(image.is_consistent(&enc.stored));
            rec.decode_match = Some(codec.decode(&enc.stored, &enc.meta).as_ref() == Ok(&msg));
        }
        Err(e) => {
            rec.cause = Some(e.cause().into());
            if let Error::RankDeficient { attempts, .. } = e {
                rec.attempts = Some(attempts);
            }
        }
    }
    rec
}

fn strong_trial(spec: &InstanceSpec, codec: &StrongCodec, index: u64) -> TrialRecord {
    let resolve = |f: &FrozenSet| -> Result<usize> {
        match spec.msg_len {
            MsgLen::Capacity => codec.capacity(f),
            _ => Ok(codec.profile().contract_len(f.len())),
        }
    };
    let (image, msg, mut rng) = match generate_instance_with(spec, index, &resolve) {
        Ok(x) => x,
        Err(e) => return TrialRecord::failed(index, &e),
    };
    let mut rec = base_record(index, &image, &msg);
    match codec.encode(&image, &msg, &mut rng) {
        Ok(enc) => {
            rec.success = true;
            rec.attempts = Some(enc.outer_attempts + enc.inner_attempts);
            rec.flips = Some(image.cover.hamming_distance(&enc.stored));
            rec.consistent = Some(image.is_consistent(&enc.stored));
            // The decoder sees the stored bits and nothing else.
            rec.decode_match = Some(codec.decode(&enc.stored).as_ref() == Ok(&msg));
            rec.values
                .insert("interval".into(), enc.partition.interval as f64);
            rec.values.insert("window".into(), enc.layout.window as f64);
            rec.values
                .insert("windows_tried".into(), enc.windows_tried as f64);
            rec.values.insert(
                "residue_flips".into(),
                (enc.register_flips + enc.tail_flips) as f64,
            );
        }
        Err(e) => rec.cause = Some(e.cause().into()),
    }
    rec
}

fn binning_trial(spec: &InstanceSpec, table: &BinTable, eps: f64, index: u64) -> TrialRecord {
    let (n, levels) = (table.n(), table.levels());
    let pick = |f: &FrozenSet| select_level(n, levels, f.len(), eps);
    let resolve = |f: &FrozenSet| {
        pick(f)
            .map(|j| table.msg_len(j))
            .ok_or(Error::NotEncodable { level: 0 })
    };
    let (image, msg, _) = match generate_instance_with(spec, index, &resolve) {
        Ok(x) => x,
        Err(e) => return TrialRecord::failed(index, &e),
    };
    let mut rec = base_record(index, &image, &msg);
    let level = match spec.msg_len {
        MsgLen::Fixed(len) => (1..=levels).find(|&j| table.msg_len(j) == len),
        _ => pick(&image.frozen),
    };
    let Some(level) = level else {
        rec.cause = Some(Error::NotEncodable { level: 0 }.cause().into());
        return rec;
    };
    rec.values.insert("level".into(), level as f64);
    match binning_encode(table, &image, level, &msg) {
        Ok(u) => {
            rec.success = true;
            rec.flips = Some(image.cover.hamming_distance(&u));
            rec.consistent = Some(image.is_consistent(&u));
            rec.decode_match = Some(binning_decode(table, &u).ok() == Some((level, msg)));
        }
        Err(e) => rec.cause = Some(e.cause().into()),
    }
    rec
}

/// Every cover, every frozen set and every message of the chosen level.
///
/// One record per frozen set (index = its mask, MSB = cell 0), with the
/// number of `(v, m)` pairs tried and how many were not encodable. Summary
/// carries the overall and per-`|F|` NotEncodable rates.
pub fn binning_exhaustive(table: &BinTable, eps: f64) -> Result<ExperimentReport> {
    let n = table.n();
    if n > 12 {
        return Err(Error::InvalidParams(format!(
            "exhaustive binning audit needs N ≤ 12, got {n}"
        )));
    }
    let mut records = Vec::new();
    let mut by_size: HashMap<usize, (u64, u64)> = HashMap::new();
    for mask in 0u64..1 << n {
        let frozen = FrozenSet::from_mask(&BitVector::from_uint(mask as u128, n));
        let mut rec = TrialRecord {
            frozen: Some(frozen.len()),
            ..TrialRecord::new(mask)
        };
        let Some(level) = select_level(n, table.levels(), frozen.len(), eps) else {
            continue;
        };
        let len = table.msg_len(level);
        let (mut tried, mut missing, mut inconsistent, mut mismatched) = (0u64, 0u64, 0u64, 0u64);
        for v in 0u64..1 << n {
            let image = MemoryImage::new(BitVector::from_uint(v as u128, n), frozen.clone())?;
            for m in 0u64..1 << len {
                let msg = BitVector::from_uint(m as u128, len);
                tried += 1;
                match binning_encode(table, &image, level, &msg) {
                    Ok(u) => {
                        inconsistent += !image.is_consistent(&u) as u64;
                        mismatched += (binning_decode(table, &u)? != (level, msg)) as u64;
                    }
                    Err(Error::NotEncodable { .. }) => missing += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        rec.success = missing == 0;
        rec.msg_len = Some(len);
        rec.consistent = Some(inconsistent == 0);
        rec.decode_match = Some(mismatched == 0);
        if missing > 0 {
            rec.cause = Some("NotEncodable".into());
        }
        rec.values.insert("level".into(), level as f64);
        rec.values.insert("pairs".into(), tried as f64);
        rec.values.insert("not_encodable".into(), missing as f64);
        let e = by_size.entry(frozen.len()).or_default();
        e.0 += tried;
        e.1 += missing;
        records.push(rec);
    }
    let (tried, missing) = by_size.values().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let params = serde_json::json!({ "binning": table.params(), "epsilon": eps });
    let mut report = ExperimentReport::new("binning-exhaustive", params, records)
        .with_summary("triples", tried as f64)
        .with_summary("not_encodable", missing as f64)
        .with_summary("not_encodable_rate", missing as f64 / tried.max(1) as f64);
    let mut sizes: Vec<_> = by_size.into_iter().collect();
    sizes.sort();
    for (k, (t, m)) in sizes {
        report = report.with_summary(
            &format!("not_encodable_rate_f{k}"),
            m as f64 / t.max(1) as f64,
        );
    }
    Ok(report)
}

/// Where the rank experiment takes its matrix entries from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixSource {
    /// Independent fair bits.
    Uniform,
    /// The first `m·n` outputs of a fresh small-bias seed with `k = n`.
    Generator,
}

/// Minimum trials for experiments that compare a rate against a bound.
pub const MIN_BOUND_TRIALS: u64 = 1000;

/// Rank deficiency of random `m × n` matrices against `2^{m−n} + μ·2^m`.
///
/// The bound's `μ` term applies only to [`MatrixSource::Generator`]. The
/// verdict is `rate ≤ bound + 3σ` with `σ` the binomial deviation at the
/// bound. Summary also has the exact uniform deficiency
/// `1 − ∏_{i<m}(1 − 2^{i−n})`.
pub fn run_rank_bound(
    m: usize,
    n: usize,
    mu_log2: u32,
    trials: u64,
    source: MatrixSource,
    seed: u64,
) -> Result<ExperimentReport> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParams(format!(
            "need 0 < m < n, got m = {m}, n = {n}"
        )));
    }
    if trials < MIN_BOUND_TRIALS {
        return Err(Error::InvalidParams(format!(
            "bound comparisons need at least {MIN_BOUND_TRIALS} trials"
        )));
    }
    let gen = match source {
        MatrixSource::Generator => Some(SmallBiasGenerator::new(GeneratorParams::new(
            m * n,
            n,
            mu_log2,
            SeedRule::Guaranteed,
        )?)?),
        MatrixSource::Uniform => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let bits = match &gen {
            Some(g) => g.expand(&Seed::random(g.params().t, &mut rng), m * n)?,
            None => (0..m * n).map(|_| rng.gen::<bool>()).collect(),
        };
        let full = Gf2Matrix::from_row_major(m, n, &bits)?.rank() == m;
        let mut rec = TrialRecord::new(i);
        rec.success = full;
        if !full {
            rec.cause = Some("RankDeficient".into());
        }
        records.push(rec);
    }
    let mu = match source {
        MatrixSource::Generator => (-(mu_log2 as f64)).exp2(),
        MatrixSource::Uniform => 0.0,
    };
    let bound = (m as f64 - n as f64).exp2() + mu * (m as f64).exp2();
    let exact: f64 = 1.0
        - (0..m)
            .map(|i| 1.0 - (i as f64 - n as f64).exp2())
            .product::<f64>();
    let sigma = binomial_sigma(bound, trials);
    let params = serde_json::json!({ "m": m, "n": n, "mu_log2": mu_log2, "trials": trials, "source": source, "seed": seed });
    let report = ExperimentReport::new("rank-bound", params, records);
    let rate = report.aggregates.failure_rate();
    Ok(report
        .with_summary("deficiency_rate", rate)
        .with_summary("bound", bound)
        .with_summary("sigma", sigma)
        .with_summary("uniform_exact", exact)
        .with_summary("pass", (rate <= bound + 3.0 * sigma) as u8 as f64))
}

/// Largest seed length enumerated exhaustively by the bias audit.
pub const MAX_EXHAUSTIVE_SEED: usize = 22;
/// Index sets checked exhaustively up to this many; sampled beyond.
const MAX_INDEX_SETS: u64 = 200_000;
const SAMPLED_SEEDS: u64 = 1 << 20;

/// Deviation of small-bias outputs from uniform on every index set of size
/// at most `k`, against `μ = 2^-mu_log2`.
///
/// With `t ≤ 22` every seed is enumerated and all pattern probabilities are
/// exact; otherwise `2^20` random seeds are used and the report says so.
/// Probabilities come from inclusion-exclusion over AND counts of bit-sliced
/// output columns. One record per set size `k′ = 0..=k`.
pub fn run_bias_audit(
    r: usize,
    k: usize,
    mu_log2: u32,
    rule: SeedRule,
    rng_seed: u64,
) -> Result<ExperimentReport> {
    let gen = SmallBiasGenerator::new(GeneratorParams::new(r, k, mu_log2, rule)?)?;
    let t = gen.params().t;
    let exhaustive = t <= MAX_EXHAUSTIVE_SEED;
    let samples: u64 = if exhaustive { 1 << t } else { SAMPLED_SEEDS };
    let words = samples.div_ceil(64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // cols[i] bit s = output bit i under seed s.
    let mut cols = vec![vec![0u64; words]; r];
    for s in 0..samples {
        let seed = if exhaustive {
            Seed::from_index(t, s as u128)
        } else {
            Seed::random(t, &mut rng)
        };
        let out = gen.expand(&seed, r)?;
        for i in out.ones_positions() {
            cols[i][(s / 64) as usize] |= 1 << (s % 64);
        }
    }

    let set_count: u64 = (1..=k).map(|j| binomial(r as u64, j as u64)).sum();
    let all_sets = set_count <= MAX_INDEX_SETS;
    let sets = if all_sets {
        all_index_sets(r, k)
    } else {
        sampled_index_sets(r, k, MAX_INDEX_SETS / k as u64, &mut rng)
    };

    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    counts.insert(Vec::new(), samples);
    let mut max_dev = vec![0f64; k + 1];
    let mut within = true;
    let mut scratch = vec![0u64; words];
    for set in &sets {
        for sub in subsets(set) {
            if sub.is_empty() || counts.contains_key(&sub) {
                continue;
            }
            scratch.copy_from_slice(&cols[sub[0]]);
            for &i in &sub[1..] {
                for (a, b) in scratch.iter_mut().zip(&cols[i]) {
                    *a &= b;
                }
            }
            counts.insert(sub, scratch.iter().map(|w| w.count_ones() as u64).sum());
        }
        let size = set.len();
        for pattern in 0u32..1 << size {
            let ones: Vec<usize> = (0..size)
                .filter(|&b| pattern >> b & 1 == 1)
                .map(|b| set[b])
                .collect();
            // count(X_S = pattern) = Σ_{ones ⊆ T ⊆ S} (−1)^{|T|−|ones|} N(T)
            let mut c: i128 = 0;
            for sub in subsets(set) {
                if ones.iter().all(|o| sub.contains(o)) {
                    let sign = if (sub.len() - ones.len()).is_multiple_of(2) {
                        1
                    } else {
                        -1
                    };
                    c += sign * counts[&sub] as i128;
                }
            }
            // |c/S − 2^-size| ≤ μ  ⇔  |c·2^size − S|·2^mu_log2 ≤ S·2^size
            let num = (c * (1i128 << size) - samples as i128).unsigned_abs();
            if num << mu_log2 > (samples as u128) << size {
                within = false;
            }
            let dev = num as f64 / ((samples as f64) * (size as f64).exp2());
            max_dev[size] = max_dev[size].max(dev);
        }
    }

    let mu = (-(mu_log2 as f64)).exp2();
    let records: Vec<TrialRecord> = (0..=k)
        .map(|kp| {
            let mut rec = TrialRecord::new(kp as u64);
            rec.success = max_dev[kp] <= mu;
            rec.values.insert("max_deviation".into(), max_dev[kp]);
            rec
        })
        .collect();
    let overall = max_dev.iter().cloned().fold(0.0, f64::max);
    let params = serde_json::json!({ "r": r, "k": k, "mu_log2": mu_log2, "rule": rule, "t": t, "rng_seed": rng_seed });
    let mut report = ExperimentReport::new("bias-audit", params, records)
        .with_summary("t", t as f64)
        .with_summary("seeds", samples as f64)
        .with_summary("index_sets", sets.len() as f64)
        .with_summary("mu", mu)
        .with_summary("max_deviation", overall)
        .with_summary("exhaustive", (exhaustive && all_sets) as u8 as f64)
        .with_summary("within_mu", within as u8 as f64);
    for (kp, d) in max_dev.iter().enumerate() {
        report = report.with_summary(&format!("max_deviation_k{kp}"), *d);
    }
    if !exhaustive {
        report = report.with_note(format!(
            "seed length {t} > {MAX_EXHAUSTIVE_SEED}: sampled {samples} random seeds"
        ));
    }
    if !all_sets {
        report = report.with_note(format!(
            "{set_count} index sets: checked {} random ones",
            sets.len()
        ));
    }
    Ok(report)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn all_index_sets(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(r, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, k, 0, &mut Vec::new(), &mut out);
    out
}

fn sampled_index_sets(r: usize, k: usize, per_size: u64, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=k {
        for _ in 0..per_size {
            let mut s = sample(rng, r, size).into_vec();
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

// All subsets of a sorted set, each sorted.
fn subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u32..1 << set.len()).map(move |mask| {
        (0..set.len())
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| set[b])
            .collect()
    })
}

/// One row of a rate sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub codec: String,
    pub n: usize,
    pub c: usize,
    pub rho: f64,
    pub msg_len: String,
    pub trials: u64,
    pub successes: u64,
    pub decode_matches: u64,
    pub mean_msg_len: f64,
    /// Mean message bits per memory cell over successful trials.
    pub rate: f64,
    /// `1 − ρ − 3/C` (side channel) or `1 − ρ − 5/C` (strong), clamped at 0;
    /// `1 − ρ − ε` for binning.
    pub promised_rate: f64,
}

/// Round trips at each `ρ`, summarised one row per `ρ`.
pub fn rate_sweep(
    base: &InstanceSpec,
    kind: CodecKind,
    rhos: &[f64],
    opts: &RoundtripOptions,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &rho in rhos {
        let spec = InstanceSpec {
            rho,
            ..base.clone()
        };
        let a = run_roundtrip_with(&spec, kind, opts)?.aggregates;
        let gap = match kind {
            CodecKind::Sidechannel => 3.0 / spec.c as f64,
            CodecKind::Strong => 5.0 / spec.c as f64,
            CodecKind::Binning => opts
                .binning_epsilon
                .unwrap_or_else(|| epsilon_for_levels(opts.binning_levels)),
        };
        let mean = a.total_msg_bits as f64 / a.successes.max(1) as f64;
        rows.push(SweepRow {
            codec: kind.to_string(),
            n: spec.n,
            c: spec.c,
            rho,
            msg_len: spec.msg_len.to_string(),
            trials: a.trials,
            successes: a.successes,
            decode_matches: a.decode_matches,
            mean_msg_len: mean,
            rate: mean / spec.n as f64,
            promised_rate: (1.0 - rho - gap).max(0.0),
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
