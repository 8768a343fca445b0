use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vpc_core::evaluation::EvalConfig;
use vpc_core::io::{
    load_features, load_partition_csv, load_place_csv, load_trajectory_csv, write_partition_csv,
};
use vpc_core::pipeline::{compare, run_strategy, CompareConfig, CompareSource, SessionPair};
use vpc_core::synthworld::{generate_world, SpeedProfile, WorldSpec};
use vpc_core::{Partition, PartitionConfig, Strategy};

fn vpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpc"))
        .args(args)
        .env_remove("VPC_PALETTE_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("world");
    let mut args = vec!["synth", "--out-dir", s(&out)];
    args.extend_from_slice(extra);
    let o = vpc(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn time_split_of_uniform_csv() {
    let dir = TempDir::new().unwrap();
    let traj = dir.path().join("t.csv");
    let mut csv = String::from("sample_id,timestamp_s,x_m,y_m,heading_rad\n");
    for i in 0..10 {
        csv += &format!("{i},{i}.0,{i},0,0\n");
    }
    fs::write(&traj, csv).unwrap();
    let out = dir.path().join("p.csv");
    let o = vpc(&["partition", "--trajectory", s(&traj), "--strategy", "time", "--classes", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let p = load_partition_csv(&out).unwrap();
    assert_eq!(p.class_sizes(), vec![5, 5]);
    assert!(dir.path().join("p.csv.manifest.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "2", "--n-samples", "20"]);
    let traj = w.join("train_trajectory.csv");
    let out = dir.path().join("p.csv");
    let o = vpc(&["partition", "--trajectory", s(&traj), "--strategy", "time-appearance", "--classes", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--features"));
    assert!(!out.exists());

    let o = vpc(&["partition", "--trajectory", s(&traj), "--strategy", "nearest", "--classes", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let o = vpc(&["partition", "--trajectory", s(&traj), "--strategy", "time", "--classes", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let o = vpc(&["synth", "--n-samples", "2", "--n-places", "4", "--out-dir", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
    let o = vpc(&["compare", "--classes", "2", "--train-trajectory", s(&traj)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--test-features"));
}

#[test]
fn runtime_errors_exit_1_and_name_the_flag() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = vpc(&["partition", "--trajectory", s(&missing), "--strategy", "time", "--classes", "2", "--out", s(&dir.path().join("p.csv"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--trajectory"));

    let w = synth(dir.path(), &["--n-places", "2", "--n-samples", "20"]);
    let bad = dir.path().join("bad.vpcf");
    fs::write(&bad, b"VPCF").unwrap();
    let o = vpc(&[
        "partition", "--trajectory", s(&w.join("train_trajectory.csv")), "--strategy", "location-appearance",
        "--classes", "2", "--features", s(&bad), "--out", s(&dir.path().join("p.csv")),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--features"));
}

#[test]
fn synth_files_load_and_match_library() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "4", "--n-samples", "200", "--seed", "7", "--noise-sigma", "0.3", "--speed", "variable"]);
    let spec = WorldSpec {
        speed_profile: SpeedProfile::Variable { min_speed: 0.2, max_speed: 5.0 },
        feature_noise_sigma: 0.3,
        ..WorldSpec::new(4, 200, 16, 7)
    };
    let world = generate_world(&spec).unwrap();
    assert_eq!(load_trajectory_csv(w.join("train_trajectory.csv")).unwrap().samples(), world.train.samples());
    assert_eq!(load_trajectory_csv(w.join("test_trajectory.csv")).unwrap().samples(), world.test.samples());
    assert_eq!(load_features(w.join("train_features.vpcf")).unwrap(), world.train_features);
    assert_eq!(load_features(w.join("test_features.vpcf")).unwrap(), world.test_features);
    assert_eq!(load_place_csv(w.join("train_places.csv")).unwrap().1, world.train_places);
    assert_eq!(load_place_csv(w.join("test_places.csv")).unwrap().1, world.test_places);
    let m = json(&w.join("manifest.json"));
    assert_eq!(m["subcommand"], "synth");
    assert_eq!(m["flags"]["seed"], 7);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 6);
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["--n-places", "4", "--n-samples", "200", "--seed", "7"];
    let a = synth(&dir.path().join("a"), &args);
    let b = synth(&dir.path().join("b"), &args);
    for name in fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()) {
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    // manifests differ only in the echoed output directory
    let (mut ma, mut mb) = (json(&a.join("manifest.json")), json(&b.join("manifest.json")));
    ma["flags"]["out_dir"].take();
    mb["flags"]["out_dir"].take();
    assert_eq!(ma, mb);
}

#[test]
fn pipeline_matches_library_calls() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "6", "--n-samples", "240", "--seed", "3", "--noise-sigma", "0.5", "--speed", "variable"]);
    let part_path = dir.path().join("p.csv");
    let report_path = dir.path().join("r.json");
    let o = vpc(&[
        "partition", "--trajectory", s(&w.join("train_trajectory.csv")), "--features", s(&w.join("train_features.vpcf")),
        "--strategy", "location-appearance", "--classes", "6", "--k-appearance", "4", "--seed", "11",
        "--restarts", "3", "--out", s(&part_path),
    ]);
    assert_eq!(code(&o), 0);
    let o = vpc(&[
        "evaluate",
        "--train-trajectory", s(&w.join("train_trajectory.csv")),
        "--train-features", s(&w.join("train_features.vpcf")),
        "--train-partition", s(&part_path),
        "--test-trajectory", s(&w.join("test_trajectory.csv")),
        "--test-features", s(&w.join("test_features.vpcf")),
        "--label", "location-appearance",
        "--out", s(&report_path),
    ]);
    assert_eq!(code(&o), 0);

    let sessions = SessionPair {
        train: load_trajectory_csv(w.join("train_trajectory.csv")).unwrap(),
        train_features: load_features(w.join("train_features.vpcf")).unwrap(),
        test: load_trajectory_csv(w.join("test_trajectory.csv")).unwrap(),
        test_features: load_features(w.join("test_features.vpcf")).unwrap(),
    };
    let pcfg = PartitionConfig {
        k_appearance: 4,
        seed: 11,
        kmeans_restarts: 3,
        ..PartitionConfig::new(Strategy::LocationAppearance, 6)
    };
    let run = run_strategy(&sessions, &pcfg, &EvalConfig::default()).unwrap();
    let lib_part = dir.path().join("lib.csv");
    write_partition_csv(&run.partition, &lib_part).unwrap();
    assert_eq!(fs::read(&part_path).unwrap(), fs::read(&lib_part).unwrap());

    let cli_report = json(&report_path);
    let lib_report: serde_json::Value = serde_json::from_str(&run.report.to_json()).unwrap();
    for key in ["n_classes", "n_valid_tests", "n_invalid_tests", "sr_top1", "sr_top5", "nsr_top1", "mean_class_size", "class_size_histogram"] {
        assert_eq!(cli_report[key], lib_report[key], "{key}");
    }
}

fn write_true_partition(w: &Path, out: &Path) {
    let (ids, places) = load_place_csv(w.join("train_places.csv")).unwrap();
    write_partition_csv(&Partition::new(ids, places).unwrap(), out).unwrap();
}

fn evaluate_args(w: &Path, part: &Path, out: &Path) -> Vec<String> {
    [
        ("--train-trajectory", w.join("train_trajectory.csv")),
        ("--train-features", w.join("train_features.vpcf")),
        ("--train-partition", part.to_path_buf()),
        ("--test-trajectory", w.join("test_trajectory.csv")),
        ("--test-features", w.join("test_features.vpcf")),
        ("--out", out.to_path_buf()),
    ]
    .into_iter()
    .flat_map(|(f, p)| [f.to_string(), p.display().to_string()])
    .collect()
}

#[test]
fn perfect_partition_scores_one() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "8", "--n-samples", "400", "--speed", "variable", "--seed", "5"]);
    let part = dir.path().join("truth.csv");
    write_true_partition(&w, &part);
    let out = dir.path().join("r.json");
    let mut args = vec!["evaluate".to_string()];
    args.extend(evaluate_args(&w, &part, &out));
    let o = vpc(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out);
    assert_eq!(r["sr_top1"], 1.0);
    assert_eq!(r["n_invalid_tests"], 0);

    let m = json(&dir.path().join("r.json.manifest.json"));
    assert_eq!(m["flags"]["orient_thresh"], 20.0);
    assert_eq!(m["flags"]["dist_thresh"], 18.0);
    assert_eq!(m["flags"]["top"], 5);
    assert_eq!(m["inputs"].as_object().unwrap().len(), 5);
    let digest = m["inputs"]["train-partition"]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn tiny_distance_threshold_invalidates_everything() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "4", "--n-samples", "100", "--seed", "2"]);
    let part = dir.path().join("truth.csv");
    write_true_partition(&w, &part);
    let out = dir.path().join("r.json");
    let mut args = vec!["evaluate".to_string()];
    args.extend(evaluate_args(&w, &part, &out));
    args.extend(["--dist-thresh".to_string(), "0.0001".to_string()]);
    let o = vpc(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0);
    let r = json(&out);
    assert_eq!(r["n_valid_tests"], 0);
    assert_eq!(r["n_invalid_tests"], 100);
    assert_eq!(r["sr_top1"], 0.0);
}

#[test]
fn single_strategy_compare_matches_library() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    let o = vpc(&[
        "compare", "--strategies", "time", "--classes", "4", "--seeds", "1,2,3", "--n-places", "4",
        "--n-samples", "120", "--noise-sigma", "0.5", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);

    let cfg = CompareConfig {
        strategies: vec![Strategy::Time],
        classes: 4,
        k_appearance: None,
        kmeans_restarts: 1,
        normalize_features: false,
        seeds: vec![1, 2, 3],
        eval: EvalConfig::default(),
    };
    let spec = WorldSpec {
        feature_noise_sigma: 0.5,
        ..WorldSpec::new(4, 120, 16, 1)
    };
    let table = compare(&CompareSource::Synthetic(spec), &cfg).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), table.to_json());
    assert_eq!(stdout, table.to_text());

    let rows = json(&out);
    let mut keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["n_classes", "nsr_top1", "sr_top1", "sr_top5", "strategy"]);
}

#[test]
fn compare_on_session_files() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "4", "--n-samples", "80", "--noise-sigma", "0.2"]);
    let o = vpc(&[
        "compare", "--classes", "4", "--seeds", "0,1",
        "--train-trajectory", s(&w.join("train_trajectory.csv")),
        "--train-features", s(&w.join("train_features.vpcf")),
        "--test-trajectory", s(&w.join("test_trajectory.csv")),
        "--test-features", s(&w.join("test_features.vpcf")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
}

#[test]
fn palette_seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let w = synth(dir.path(), &["--n-places", "3", "--n-samples", "30"]);
    let traj = w.join("train_trajectory.csv");
    let run = |env: Option<&str>, name: &str| {
        let svg = dir.path().join(format!("{name}.svg"));
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vpc"));
        cmd.args(["partition", "--trajectory", s(&traj), "--strategy", "location", "--classes", "3"])
            .args(["--svg", s(&svg), "--out", s(&dir.path().join(format!("{name}.csv")))])
            .env_remove("VPC_PALETTE_SEED");
        if let Some(v) = env {
            cmd.env("VPC_PALETTE_SEED", v);
        }
        let o = cmd.output().unwrap();
        (code(&o), fs::read_to_string(&svg).unwrap_or_default())
    };
    let (c0, plain) = run(None, "plain");
    let (c1, seeded) = run(Some("9"), "seeded");
    let (c2, again) = run(Some("9"), "again");
    assert_eq!((c0, c1, c2), (0, 0, 0));
    assert_ne!(plain, seeded);
    assert_eq!(seeded, again);
    assert_eq!(plain.matches("<circle").count(), 30);
    let m = json(&dir.path().join("seeded.csv.manifest.json"));
    assert_eq!(m["env"]["VPC_PALETTE_SEED"], "9");
    assert_eq!(run(Some("blue"), "bad").0, 2);
}
