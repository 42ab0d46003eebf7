use std::path::Path;

use stuckat::blockcodec::MemoryImage;
use stuckat::gf2::{BitVector, FrozenSet};
use stuckat::harness::cli::run_with;
use stuckat::harness::formats::{image_to_string, message_to_string};
use stuckat::harness::{
    generate_instance, run_bias_audit, run_rank_bound, run_roundtrip, CodecKind, DefectModel,
    ExperimentReport, InstanceSpec, MatrixSource, MsgLen,
};
use stuckat::smallbias::SeedRule;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["stuckat"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn jsonl(report: &ExperimentReport) -> Vec<u8> {
    let mut buf = Vec::new();
    report.write_jsonl(&mut buf).unwrap();
    buf
}

#[test]
fn instances_follow_their_spec() {
    let (image, _) = generate_instance(&InstanceSpec::new(256, 4, 0.0), 0).unwrap();
    assert!(image.frozen.is_empty());
    for model in [
        DefectModel::Uniform,
        DefectModel::Clustered,
        DefectModel::AdversarialPrefix,
    ] {
        let spec = InstanceSpec::new(64, 4, 0.5)
            .defect_model(model)
            .msg_len(MsgLen::Fixed(7))
            .seed(3);
        let (a, m) = generate_instance(&spec, 9).unwrap();
        assert_eq!(a.frozen.len(), 32);
        assert_eq!(m.len(), 7);
        assert_eq!(generate_instance(&spec, 9).unwrap(), (a.clone(), m));
        assert_ne!(generate_instance(&spec, 10).unwrap().0.cover, a.cover);
    }
    let spec = InstanceSpec::new(4096, 4, 0.1);
    let (a, m) = generate_instance(&spec, 0).unwrap();
    assert_eq!(m.len(), 4096 - 409 - 3072);
    assert_eq!(a.frozen.len(), 409);
}

#[test]
fn reports_are_reproducible_and_self_checking() {
    let spec = InstanceSpec::new(1024, 4, 0.1)
        .msg_len(MsgLen::Capacity)
        .trials(40)
        .seed(5);
    let a = run_roundtrip(&spec, CodecKind::Sidechannel).unwrap();
    let b = run_roundtrip(&spec, CodecKind::Sidechannel).unwrap();
    assert_eq!(jsonl(&a), jsonl(&b));
    assert!(a.verify_aggregates());
    assert_eq!(a.aggregates.trials, 40);
    assert_eq!(a.records.len(), 40);
    assert!(a.aggregates.all_decoded() && a.aggregates.all_consistent());

    let back = ExperimentReport::read_jsonl(&jsonl(&a)[..]).unwrap();
    assert_eq!(jsonl(&back), jsonl(&a));

    let mut tampered = a.clone();
    tampered.records[0].success = !tampered.records[0].success;
    assert!(!tampered.verify_aggregates());

    let other = run_roundtrip(&spec.clone().seed(6), CodecKind::Sidechannel).unwrap();
    assert_ne!(jsonl(&other), jsonl(&a));
}

#[test]
fn unfrozen_memory_nearly_always_encodes() {
    let spec = InstanceSpec::new(4096, 4, 0.0)
        .msg_len(MsgLen::Capacity)
        .trials(50)
        .seed(1);
    let r = run_roundtrip(&spec, CodecKind::Sidechannel).unwrap();
    assert!(r.aggregates.successes >= 49);
    assert_eq!(r.aggregates.decode_matches, r.aggregates.successes);
}

#[test]
fn strong_and_binning_runs() {
    let spec = InstanceSpec::new(16384, 4, 0.2)
        .msg_len(MsgLen::Capacity)
        .trials(20)
        .seed(2);
    let r = run_roundtrip(&spec, CodecKind::Strong).unwrap();
    assert!(r.aggregates.successes >= 18);
    assert!(r.aggregates.all_decoded() && r.aggregates.all_consistent());

    let spec = InstanceSpec::new(8, 4, 0.25).trials(500).seed(2);
    let r = run_roundtrip(&spec, CodecKind::Binning).unwrap();
    assert!(r.aggregates.all_decoded() && r.aggregates.all_consistent());
    assert!(r
        .aggregates
        .failures_by_cause
        .keys()
        .all(|k| k == "NotEncodable"));
}

#[test]
fn rank_bound_closed_form_and_guard() {
    // A 1×2 matrix is deficient iff its row is zero: probability 1/4.
    let r = run_rank_bound(1, 2, 20, 20_000, MatrixSource::Uniform, 4).unwrap();
    let rate = r.summary_value("deficiency_rate").unwrap();
    let sigma = (0.25f64 * 0.75 / 20_000.0).sqrt();
    assert!((rate - 0.25).abs() <= 3.0 * sigma, "{rate}");
    assert!(run_rank_bound(8, 16, 20, 999, MatrixSource::Uniform, 0).is_err());
    assert!(run_rank_bound(16, 8, 20, 1000, MatrixSource::Uniform, 0).is_err());
}

#[test]
fn bias_audit_marginals() {
    let r = run_bias_audit(16, 2, 4, SeedRule::Guaranteed, 0).unwrap();
    let mu = r.summary_value("mu").unwrap();
    assert_eq!(r.summary_value("within_mu"), Some(1.0));
    assert_eq!(r.summary_value("exhaustive"), Some(1.0));
    assert_eq!(r.summary_value("max_deviation_k0"), Some(0.0));
    assert!(r.summary_value("max_deviation_k1").unwrap() <= 2.0 * mu);
}

fn write_inputs(
    dir: &Path,
    n: usize,
    frozen: &[usize],
    msg_len: usize,
) -> (String, String, BitVector) {
    let cover: BitVector = (0..n).map(|i| (i * 7 + 3) % 5 < 2).collect();
    let image =
        MemoryImage::new(cover, FrozenSet::new(n, frozen.iter().copied()).unwrap()).unwrap();
    let msg: BitVector = (0..msg_len).map(|i| i % 3 == 0).collect();
    let image_path = dir.join("image.txt");
    let msg_path = dir.join("message.txt");
    std::fs::write(&image_path, image_to_string(&image)).unwrap();
    std::fs::write(&msg_path, message_to_string(&msg)).unwrap();
    (
        path_str(&image_path).to_string(),
        path_str(&msg_path).to_string(),
        msg,
    )
}

#[test]
fn cli_sidechannel_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let frozen: Vec<usize> = (0..1024).step_by(7).collect();
    let (image, message, msg) = write_inputs(dir.path(), 1024, &frozen, 200);
    let stored = dir.path().join("out/stored.txt");
    let meta = dir.path().join("out/meta.txt");
    let (code, _, err) = cli(&[
        "encode",
        "--image",
        &image,
        "--message",
        &message,
        "--out",
        path_str(&stored),
        "--meta-out",
        path_str(&meta),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, out, err) = cli(&[
        "decode",
        "--stored",
        path_str(&stored),
        "--meta",
        path_str(&meta),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, message_to_string(&msg));
    assert_eq!(out, std::fs::read_to_string(&message).unwrap());

    // Without the side channel the decode is refused, not guessed.
    let (code, _, err) = cli(&["decode", "--stored", path_str(&stored)]);
    assert_ne!(code, 0);
    assert!(err.contains("--meta"));
}

#[test]
fn cli_strong_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let frozen: Vec<usize> = (0..16384).filter(|i| i % 11 == 4).collect();
    let (image, message, _) = write_inputs(dir.path(), 16384, &frozen, 4000);
    let stored = dir.path().join("stored.txt");
    let (code, _, err) = cli(&[
        "encode",
        "--codec",
        "strong",
        "--rate-policy",
        "capacity",
        "--image",
        &image,
        "--message",
        &message,
        "--out",
        path_str(&stored),
    ]);
    assert_eq!(code, 0, "{err}");
    // The decoder's input names the profile and the bits, nothing about defects.
    let text = std::fs::read_to_string(&stored).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "stuckat-stored v1");
    assert!(lines[1].starts_with("{\"codec\":\"strong\""));
    assert_eq!(lines[2], "N 16384");
    assert_eq!(lines[3].len(), 16384 / 4);
    let decoded = dir.path().join("decoded.txt");
    let (code, _, err) = cli(&[
        "decode",
        "--stored",
        path_str(&stored),
        "--out",
        path_str(&decoded),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        std::fs::read_to_string(&decoded).unwrap(),
        std::fs::read_to_string(&message).unwrap()
    );
}

#[test]
fn cli_rejects_an_oversized_message() {
    let dir = tempfile::tempdir().unwrap();
    let frozen: Vec<usize> = (0..512).collect();
    let (image, message, _) = write_inputs(dir.path(), 1024, &frozen, 600);
    let out = dir.path().join("stored.txt");
    let meta = dir.path().join("meta.txt");
    let (code, _, err) = cli(&[
        "encode",
        "--image",
        &image,
        "--message",
        &message,
        "--out",
        path_str(&out),
        "--meta-out",
        path_str(&meta),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("MessageTooLong"), "{err}");
    assert!(!out.exists());

    // Under the contract policy the strong codec refuses any bit at C = 4.
    let (image, message, _) = write_inputs(dir.path(), 16384, &[], 1);
    let (code, _, err) = cli(&[
        "encode",
        "--codec",
        "strong",
        "--image",
        &image,
        "--message",
        &message,
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("MessageTooLong"), "{err}");
}

#[test]
fn cli_usage_errors() {
    let (code, _, err) = cli(&[
        "roundtrip",
        "--codec",
        "nonsense",
        "--rho",
        "0.1",
        "--n",
        "64",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("nonsense"));
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "encode",
        "decode",
        "roundtrip",
        "rank-bound",
        "bias-audit",
        "binning-demo",
        "rate-sweep",
    ] {
        assert!(out.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn cli_reports_land_in_the_report_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var("STUCKAT_REPORT_DIR", dir.path());
    let (code, out, err) = cli(&["rank-bound", "--trials", "1000", "--seed", "3"]);
    std::env::remove_var("STUCKAT_REPORT_DIR");
    assert_eq!(code, 0, "{err}");
    let written: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(written.len(), 1);
    assert!(out.contains(path_str(&written[0])));
    let report = ExperimentReport::load(&written[0]).unwrap();
    assert!(report.verify_aggregates());
    assert_eq!(report.experiment, "rank-bound");

    // An explicit flag wins over the default.
    let other = tempfile::tempdir().unwrap();
    let (code, _, _) = cli(&[
        "--report-dir",
        path_str(other.path()),
        "binning-demo",
        "--n",
        "8",
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_dir(other.path()).unwrap().count(), 1);
}

#[test]
fn cli_rate_sweep_csv() {
    let (code, out, err) = cli(&[
        "rate-sweep",
        "--codec",
        "sidechannel",
        "--n",
        "1024",
        "--rhos",
        "0.1,0.2",
        "--trials",
        "5",
        "--msg-len",
        "capacity",
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("codec,n,c,rho"));
    assert!(lines[1].starts_with("sidechannel,1024,4,0.1"));
}
