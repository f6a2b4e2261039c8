use std::fs;
use std::path::Path;

use mongoose::cli::run_command;
use mongoose::io::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use mongoose::io::csv::{METRICS_HEADER, REPORT_HEADER, SUMMARY_HEADER, TABLES_HEADER};
use mongoose::io::kv::{parse_kv, render_kv};
use mongoose::policy::PolicyParams;
use mongoose::rng::from_seed;
use mongoose::train::{Adam, TrainConfig};
use mongoose::Error;

fn sample_checkpoint(with_adam: bool) -> Checkpoint {
    let mut config = TrainConfig::new(2, 20);
    config.hidden_size = 5;
    let params = PolicyParams::init(2, 5, &mut from_seed(3)).unwrap();
    let mut adam = Adam::new(params.len());
    adam.steps = 17;
    adam.first_moment.iter_mut().enumerate().for_each(|(i, m)| *m = i as f64 * 0.01);
    adam.second_moment.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64 * 1e-4);
    Checkpoint::new(&params, &config, 42, with_adam.then_some(&adam))
}

fn run(args: &[&str]) -> i32 {
    run_command(std::iter::once("mongoose").chain(args.iter().copied()))
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for with_adam in [false, true] {
        let ckpt = sample_checkpoint(with_adam);
        let path = dir.path().join("nested/c.ckpt");
        save_checkpoint(&ckpt, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.params, ckpt.params);
        assert_eq!(back.adam, ckpt.adam);
        assert_eq!(back.step, 42);
        assert_eq!(back.config, ckpt.config);
        assert_eq!(back.to_bytes(), ckpt.to_bytes());
        assert_eq!(back.train_config().unwrap().hidden_size, 5);
    }
}

fn payload_start(bytes: &[u8]) -> usize {
    let text = String::from_utf8_lossy(bytes);
    let end = text.find("\nend").unwrap();
    end + text[end + 1..].find('\n').unwrap() + 2
}

#[test]
fn corrupted_payload_names_segment() {
    let bytes = sample_checkpoint(true).to_bytes();
    let start = payload_start(&bytes);
    let params = PolicyParams::zeros(2, 5).unwrap();
    let [_, rec, _, dec, _] = params.offsets();
    for (offset, name) in [(0, "input_weights"), (rec * 8 + 3, "recurrent_weights"), (dec * 8, "decoder_weights")] {
        let mut bad = bytes.clone();
        bad[start + offset] ^= 0x40;
        match Checkpoint::from_bytes(&bad) {
            Err(Error::CheckpointSegment { segment, .. }) => assert_eq!(segment, name),
            other => panic!("expected segment error, got {:?}", other.map(|c| c.step)),
        }
    }
    let mut bad = bytes.clone();
    let last = bad.len() - 1;
    bad[last] ^= 1;
    match Checkpoint::from_bytes(&bad) {
        Err(Error::CheckpointSegment { segment, .. }) => assert!(segment.starts_with("adam_v."), "{segment}"),
        other => panic!("expected segment error, got {:?}", other.map(|c| c.step)),
    }
}

#[test]
fn truncated_and_mismatched_files_are_rejected() {
    let ckpt = sample_checkpoint(false);
    let bytes = ckpt.to_bytes();
    assert!(matches!(Checkpoint::from_bytes(&bytes[..bytes.len() - 9]), Err(Error::CheckpointSegment { .. })));
    assert!(Checkpoint::from_bytes(&bytes[..20]).is_err());
    assert!(Checkpoint::from_bytes(b"hello").is_err());

    let text = String::from_utf8_lossy(&bytes).replacen("version = 1", "version = 9", 1);
    let mut versioned = text.as_bytes()[..payload_start(text.as_bytes())].to_vec();
    versioned.extend_from_slice(&bytes[payload_start(&bytes)..]);
    match Checkpoint::from_bytes(&versioned) {
        Err(Error::Checkpoint(msg)) => assert!(msg.contains("version"), "{msg}"),
        other => panic!("expected version error, got {:?}", other.map(|c| c.step)),
    }

    assert!(ckpt.expect_dimension(2).is_ok());
    let err = ckpt.expect_dimension(3).unwrap_err().to_string();
    assert!(err.contains("d=2") && err.contains("d=3"), "{err}");
}

#[test]
fn config_parsing() {
    let text = "# desk run\ndimension = 2\ntarget_horizon = 20 # inline\nalpha = 0.05\nloss_form = add\n";
    let config = TrainConfig::from_pairs(&parse_kv(text).unwrap()).unwrap();
    assert_eq!(config.horizon_schedule, vec![10, 20]);
    assert_eq!(config.alpha, 0.05);
    let echoed = TrainConfig::from_pairs(&parse_kv(&render_kv(&config.to_pairs())).unwrap()).unwrap();
    assert_eq!(echoed.to_pairs(), config.to_pairs());

    let unknown = parse_kv("dimension = 2\nlearning_rate = 0.1\n").unwrap();
    assert!(matches!(TrainConfig::from_pairs(&unknown), Err(Error::Config(m)) if m.contains("learning_rate")));
    assert!(TrainConfig::from_pairs(&parse_kv("hidden_size = 4\n").unwrap()).is_err());
    assert!(parse_kv("dimension = 2\ndimension = 3\n").is_err());
    assert!(parse_kv("no equals sign\n").is_err());
}

#[test]
fn cli_exit_codes() {
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["bench", "--horizon", "ten"]), 2);
    assert_eq!(run(&["sample-prior", "--grid"]), 2);
    assert_eq!(run(&["--help"]), 0);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["grad-check", "--seed", "7"]), 0);
    assert_eq!(run(&["grad-check", "--seed", "7", "--threshold", "1e-20"]), 1);
    assert_eq!(run(&["bench", "--fn", "nosuch", "--actor", "random", "--out", out]), 1);
    assert_eq!(run(&["train", "--config", "/nonexistent/config.kv", "--out", out]), 1);
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("tiny.kv");
    fs::write(
        &path,
        "dimension = 2\nhidden_size = 6\nbatch_size = 3\nhorizon_schedule = 4,6\nsteps_per_phase = 4\nseed = 11\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn cli_training_outputs_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let full = dir.path().join("full");
    assert_eq!(run(&["train", "--config", &config, "--out", full.to_str().unwrap()]), 0);
    for f in ["metrics.csv", "phase0_h4.ckpt", "phase1_h6.ckpt", "final.ckpt"] {
        assert!(full.join(f).exists(), "missing {f}");
    }
    let metrics = fs::read_to_string(full.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], METRICS_HEADER);
    assert_eq!(lines.len(), 9);
    assert!(lines[1..].iter().all(|l| l.ends_with(',')), "wall_time left blank without --timing");

    let resumed = dir.path().join("resumed");
    let phase0 = full.join("phase0_h4.ckpt");
    assert_eq!(run(&["train", "--resume", phase0.to_str().unwrap(), "--out", resumed.to_str().unwrap()]), 0);
    assert_eq!(fs::read(resumed.join("final.ckpt")).unwrap(), fs::read(full.join("final.ckpt")).unwrap());
    let tail = fs::read_to_string(resumed.join("metrics.csv")).unwrap();
    let tail: Vec<&str> = tail.lines().collect();
    assert_eq!(tail[0], METRICS_HEADER);
    assert_eq!(&tail[1..], &lines[5..]);
}

#[test]
fn cli_bench_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let code = run(&[
        "bench",
        "--actor",
        "random",
        "--actor",
        "ei",
        "--fn",
        "branin",
        "--horizon",
        "3",
        "--seeds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let first_line = |f: &str| {
        let text = fs::read_to_string(out.join(f)).unwrap();
        text.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
    };
    assert_eq!(first_line("report.csv"), REPORT_HEADER);
    assert_eq!(first_line("summary.csv"), SUMMARY_HEADER);
    assert_eq!(first_line("tables.csv"), TABLES_HEADER);
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    let rows = report.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 2 * 2 * 4);
}
