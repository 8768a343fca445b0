//! `vpc`: partition trajectories into place classes, score partitions, generate
//! synthetic sessions and compare strategies.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage error.

mod args;
mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use vpc_core::evaluation::{EvalConfig, GroundTruthThresholds};
use vpc_core::io::{
    load_features, load_partition_csv, load_trajectory_csv, render_partition_svg, write_features,
    write_partition_csv, write_place_csv, write_report_json, write_trajectory_csv, ReportConfig,
    RunReport, SvgOptions,
};
use vpc_core::pipeline::{compare, CompareConfig, CompareSource, SessionPair};
use vpc_core::synthworld::generate_world;
use vpc_core::{evaluation, partitioning, PartitionConfig};

use args::{Cli, Command, CompareArgs, EvaluateArgs, PartitionArgs, SynthArgs, ThresholdArgs};
use manifest::{sidecar_path, RunManifest};

pub const PALETTE_ENV: &str = "VPC_PALETTE_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<vpc_core::Error> for CliError {
    fn from(e: vpc_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Tags a library error with the flag whose file caused it.
fn for_flag<T>(flag: &str, r: vpc_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Runtime(format!("--{flag}: {e}")))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn eval_config(t: &ThresholdArgs) -> Result<EvalConfig, CliError> {
    if !(t.orient_thresh.is_finite() && t.orient_thresh >= 0.0) {
        return Err(usage(format!("--orient-thresh must be a finite angle >= 0, got {}", t.orient_thresh)));
    }
    if !(t.dist_thresh.is_finite() && t.dist_thresh >= 0.0) {
        return Err(usage(format!("--dist-thresh must be a finite distance >= 0, got {}", t.dist_thresh)));
    }
    if t.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    Ok(EvalConfig {
        thresholds: GroundTruthThresholds {
            orient_deg: t.orient_thresh,
            dist_m: t.dist_thresh,
        },
        top_x: t.top,
    })
}

fn palette_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(PALETTE_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{PALETTE_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn cmd_partition(a: PartitionArgs) -> Result<(), CliError> {
    if a.classes == 0 {
        return Err(usage("--classes must be at least 1"));
    }
    if a.strategy.uses_appearance() && a.features.is_none() {
        return Err(usage(format!("--features is required for strategy {}", a.strategy)));
    }
    if a.k_appearance == Some(0) {
        return Err(usage("--k-appearance must be at least 1"));
    }
    if a.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    let palette = palette_seed()?;
    let cfg = PartitionConfig {
        k_appearance: a.k_appearance.unwrap_or(a.classes),
        seed: a.seed,
        kmeans_restarts: a.restarts,
        normalize_features: a.normalize_features,
        ..PartitionConfig::new(a.strategy, a.classes)
    };

    let traj = for_flag("trajectory", load_trajectory_csv(&a.trajectory))?;
    // features are only read when the strategy uses them
    let features = match (&a.features, a.strategy.uses_appearance()) {
        (Some(p), true) => Some(for_flag("features", load_features(p))?),
        _ => None,
    };
    let part = partitioning::partition(&traj, features.as_ref(), &cfg)?;

    let mut m = RunManifest::new("partition", &a);
    m.input("trajectory", &a.trajectory)?;
    if let (Some(p), true) = (&a.features, features.is_some()) {
        m.input("features", p)?;
    }
    for_flag("out", write_partition_csv(&part, &a.out))?;
    m.output(&a.out);
    if let Some(svg) = &a.svg {
        let opts = SvgOptions {
            palette_seed: palette.unwrap_or(0),
            ..SvgOptions::default()
        };
        for_flag("svg", render_partition_svg(&traj, &part, svg, &opts))?;
        m.output(svg);
        if let Some(p) = palette {
            m.env.insert(PALETTE_ENV, p.to_string());
        }
    }
    m.write(&sidecar_path(&a.out))
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let cfg = eval_config(&a.thresholds)?;
    let train = for_flag("train-trajectory", load_trajectory_csv(&a.train_trajectory))?;
    let train_f = for_flag("train-features", load_features(&a.train_features))?;
    let part = for_flag("train-partition", load_partition_csv(&a.train_partition))?;
    let test = for_flag("test-trajectory", load_trajectory_csv(&a.test_trajectory))?;
    let test_f = for_flag("test-features", load_features(&a.test_features))?;
    if !part.is_aligned_with(&train) {
        return Err(CliError::Runtime(
            "--train-partition: sample ids do not match --train-trajectory in trajectory order".into(),
        ));
    }
    let eval = evaluation::evaluate(&train, &train_f, &part, &test, &test_f, &cfg)?;
    let report = RunReport::new(a.label.clone(), ReportConfig::from_eval(&cfg), &eval);

    let mut m = RunManifest::new("evaluate", &a);
    m.input("train-trajectory", &a.train_trajectory)?;
    m.input("train-features", &a.train_features)?;
    m.input("train-partition", &a.train_partition)?;
    m.input("test-trajectory", &a.test_trajectory)?;
    m.input("test-features", &a.test_features)?;
    for_flag("out", write_report_json(&report, &a.out))?;
    m.output(&a.out);
    m.write(&sidecar_path(&a.out))
}

/// File names written by `synth` inside `--out-dir`.
pub const SYNTH_FILES: [&str; 6] = [
    "train_trajectory.csv",
    "train_features.vpcf",
    "train_places.csv",
    "test_trajectory.csv",
    "test_features.vpcf",
    "test_places.csv",
];

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let spec = a.world.spec(a.seed);
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let w = generate_world(&spec)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let path = |name: &str| a.out_dir.join(name);
    let paths: Vec<PathBuf> = SYNTH_FILES.iter().map(|n| path(n)).collect();
    write_trajectory_csv(&w.train, &paths[0])?;
    write_features(&w.train_features, &paths[1])?;
    write_place_csv(&w.train.sample_ids(), &w.train_places, &paths[2])?;
    write_trajectory_csv(&w.test, &paths[3])?;
    write_features(&w.test_features, &paths[4])?;
    write_place_csv(&w.test.sample_ids(), &w.test_places, &paths[5])?;

    let mut m = RunManifest::new("synth", &a);
    for p in &paths {
        m.output(p);
    }
    m.write(&path("manifest.json"))
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let eval = eval_config(&a.thresholds)?;
    if a.classes == 0 {
        return Err(usage("--classes must be at least 1"));
    }
    if a.strategies.is_empty() {
        return Err(usage("--strategies must name at least one strategy"));
    }
    if a.seeds.is_empty() {
        return Err(usage("--seeds must list at least one seed"));
    }
    if a.k_appearance == Some(0) {
        return Err(usage("--k-appearance must be at least 1"));
    }
    if a.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    let f = &a.files;
    let file_flags = [
        ("train-trajectory", &f.train_trajectory),
        ("train-features", &f.train_features),
        ("test-trajectory", &f.test_trajectory),
        ("test-features", &f.test_features),
    ];
    let given = file_flags.iter().filter(|(_, p)| p.is_some()).count();
    let source = match given {
        0 => {
            let spec = a.world.spec(a.seeds[0]);
            spec.validate().map_err(|e| usage(e.to_string()))?;
            CompareSource::Synthetic(spec)
        }
        4 => {
            let path = |i: usize| file_flags[i].1.as_ref().expect("checked above");
            CompareSource::Sessions(SessionPair {
                train: for_flag("train-trajectory", load_trajectory_csv(path(0)))?,
                train_features: for_flag("train-features", load_features(path(1)))?,
                test: for_flag("test-trajectory", load_trajectory_csv(path(2)))?,
                test_features: for_flag("test-features", load_features(path(3)))?,
            })
        }
        _ => {
            let missing: Vec<String> = file_flags
                .iter()
                .filter(|(_, p)| p.is_none())
                .map(|(n, _)| format!("--{n}"))
                .collect();
            return Err(usage(format!(
                "file sessions need all four session flags; missing {}",
                missing.join(", ")
            )));
        }
    };
    let cfg = CompareConfig {
        strategies: a.strategies.clone(),
        classes: a.classes,
        k_appearance: a.k_appearance,
        kmeans_restarts: a.restarts,
        normalize_features: a.normalize_features,
        seeds: a.seeds.clone(),
        eval,
    };
    let table = compare(&source, &cfg)?;
    print!("{}", table.to_text());

    if let Some(out) = &a.out {
        let mut m = RunManifest::new("compare", &a);
        for (flag, p) in file_flags {
            if let Some(p) = p {
                m.input(flag, p)?;
            }
        }
        fs::write(out, table.to_json()).map_err(|e| CliError::io(out, e))?;
        m.output(out);
        m.write(&sidecar_path(out))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Partition(a) => cmd_partition(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed flags
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
