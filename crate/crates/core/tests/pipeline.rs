use std::fs;
use std::path::PathBuf;

use vpc_core::evaluation::{evaluate, EvalConfig};
use vpc_core::io::{load_report_json, write_report_json, ReportConfig, RunReport};
use vpc_core::partitioning::partition;
use vpc_core::pipeline::{run_strategy, SessionPair};
use vpc_core::synthworld::{generate_world, SpeedProfile, WorldSpec};
use vpc_core::{PartitionConfig, Strategy};

fn seed7_world() -> SessionPair {
    let spec = WorldSpec {
        speed_profile: SpeedProfile::Variable { min_speed: 0.2, max_speed: 5.0 },
        feature_noise_sigma: 0.5,
        ..WorldSpec::new(8, 400, 16, 7)
    };
    generate_world(&spec).unwrap().into()
}

fn seed7_config() -> PartitionConfig {
    PartitionConfig {
        kmeans_restarts: 3,
        seed: 7,
        ..PartitionConfig::new(Strategy::LocationAppearance, 8)
    }
}

/// Set `VPC_UPDATE_GOLDEN=1` to rewrite the golden file after an intended
/// change, then review the diff.
#[test]
fn seed7_report_matches_golden() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/synth_seed7_location_appearance.json");
    let run = run_strategy(&seed7_world(), &seed7_config(), &EvalConfig::default()).unwrap();
    let json = run.report.to_json();
    if std::env::var_os("VPC_UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &json).unwrap();
    }
    assert_eq!(json, fs::read_to_string(&golden).unwrap());
}

#[test]
fn run_strategy_composes_the_stages() {
    let sessions = seed7_world();
    let cfg = seed7_config();
    let eval = EvalConfig { top_x: 3, ..EvalConfig::default() };
    let part = partition(&sessions.train, Some(&sessions.train_features), &cfg).unwrap();
    let report = evaluate(
        &sessions.train,
        &sessions.train_features,
        &part,
        &sessions.test,
        &sessions.test_features,
        &eval,
    )
    .unwrap();
    let run = run_strategy(&sessions, &cfg, &eval).unwrap();
    assert_eq!(run.partition, part);
    assert_eq!(
        run.report,
        RunReport::new("location-appearance", ReportConfig::from_eval(&eval).with_partition(&cfg), &report)
    );
    assert_eq!(run.report.config.top, 3);
}

#[test]
fn report_file_reloads_to_serialized_precision() {
    let run = run_strategy(&seed7_world(), &seed7_config(), &EvalConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report_json(&run.report, &path).unwrap();
    let back = load_report_json(&path).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * a.abs().max(b.abs());
    assert!(close(back.sr_top1, run.report.sr_top1));
    assert!(close(back.sr_top5, run.report.sr_top5));
    assert!(close(back.nsr_top1, run.report.nsr_top1));
    assert!(close(back.mean_class_size, run.report.mean_class_size));
    assert_eq!(back.n_classes, run.report.n_classes);
    assert_eq!(back.class_size_histogram, run.report.class_size_histogram);
    assert_eq!(back.config, run.report.config);
}

#[test]
fn appearance_beats_cues_on_a_clean_world() {
    let sessions = seed7_world();
    let eval = EvalConfig::default();
    let sr = |s: Strategy| {
        let cfg = PartitionConfig { kmeans_restarts: 5, ..PartitionConfig::new(s, 8) };
        run_strategy(&sessions, &cfg, &eval).unwrap().report.sr_top1
    };
    assert!(sr(Strategy::LocationAppearance) >= sr(Strategy::Location));
    assert!(sr(Strategy::TimeAppearance) >= sr(Strategy::Time));
}
