//! End-to-end runs: partition the training session, score it on the test
//! session, and tabulate strategies across seeds.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvalConfig};
use crate::io::{ReportConfig, RunReport};
use crate::model::{FeatureMatrix, Partition, Trajectory};
use crate::partitioning::{partition, PartitionConfig, Strategy};
use crate::synthworld::{generate_world, SyntheticWorld, WorldSpec};

/// A training session (partitioned) and a test session (scored).
#[derive(Debug, Clone, PartialEq)]
pub struct SessionPair {
    pub train: Trajectory,
    pub train_features: FeatureMatrix,
    pub test: Trajectory,
    pub test_features: FeatureMatrix,
}

impl From<SyntheticWorld> for SessionPair {
    fn from(w: SyntheticWorld) -> Self {
        SessionPair {
            train: w.train,
            train_features: w.train_features,
            test: w.test,
            test_features: w.test_features,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub partition: Partition,
    pub report: RunReport,
}

pub fn run_strategy(sessions: &SessionPair, pcfg: &PartitionConfig, ecfg: &EvalConfig) -> Result<StrategyRun> {
    let part = partition(&sessions.train, Some(&sessions.train_features), pcfg)?;
    let eval = evaluate(
        &sessions.train,
        &sessions.train_features,
        &part,
        &sessions.test,
        &sessions.test_features,
        ecfg,
    )?;
    let config = ReportConfig::from_eval(ecfg).with_partition(pcfg);
    Ok(StrategyRun {
        report: RunReport::new(pcfg.strategy.name(), config, &eval),
        partition: part,
    })
}

#[derive(Debug, Clone)]
pub enum CompareSource {
    /// A fresh world per seed; the world's own seed is replaced by the run
    /// seed.
    Synthetic(WorldSpec),
    /// Fixed sessions; seeds only drive the appearance clustering.
    Sessions(SessionPair),
}

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub strategies: Vec<Strategy>,
    pub classes: usize,
    /// Appearance cluster count; defaults to `classes`.
    pub k_appearance: Option<usize>,
    pub kmeans_restarts: usize,
    pub normalize_features: bool,
    pub seeds: Vec<u64>,
    pub eval: EvalConfig,
}

impl CompareConfig {
    pub fn partition_config(&self, strategy: Strategy, seed: u64) -> PartitionConfig {
        PartitionConfig {
            k_appearance: self.k_appearance.unwrap_or(self.classes),
            seed,
            kmeans_restarts: self.kmeans_restarts,
            normalize_features: self.normalize_features,
            ..PartitionConfig::new(strategy, self.classes)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub n_classes: usize,
    pub sr_top1: f64,
    pub sr_top5: f64,
    pub nsr_top1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    #[serde(serialize_with = "crate::io::six_sig")]
    pub mean: f64,
    #[serde(serialize_with = "crate::io::six_sig")]
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for fewer than two values).
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let std = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

/// One row of the comparison table. Serialized key order is the table's
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub strategy: Strategy,
    pub n_classes: MeanStd,
    pub sr_top5: MeanStd,
    pub nsr_top1: MeanStd,
    pub sr_top1: MeanStd,
    #[serde(skip)]
    pub per_seed: Vec<SeedResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub top_x: usize,
}

impl CompareTable {
    pub fn row(&self, strategy: Strategy) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.rows).expect("table serializes");
        s.push('\n');
        s
    }

    /// Fixed-width text table, one line per strategy.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let top = format!("top-{} SR", self.top_x);
        let _ = writeln!(
            out,
            "{:<22} {:>16} {:>18} {:>18} {:>18}",
            "strategy", "#class", top, "top-1 NSR", "top-1 SR"
        );
        let cell = |m: &MeanStd, pct: bool| {
            if pct {
                format!("{:.2}% ± {:.2}", 100.0 * m.mean, 100.0 * m.std)
            } else {
                format!("{:.1} ± {:.1}", m.mean, m.std)
            }
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<22} {:>16} {:>18} {:>18} {:>18}",
                r.strategy.name(),
                cell(&r.n_classes, false),
                cell(&r.sr_top5, true),
                cell(&r.nsr_top1, true),
                cell(&r.sr_top1, true)
            );
        }
        out
    }
}

/// Runs every (strategy, seed) cell, in parallel, and aggregates per
/// strategy. Row order follows `cfg.strategies`; per-seed order follows
/// `cfg.seeds`.
pub fn compare(source: &CompareSource, cfg: &CompareConfig) -> Result<CompareTable> {
    if cfg.strategies.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one strategy and one seed".into()));
    }
    let sessions: Vec<SessionPair> = match source {
        CompareSource::Synthetic(spec) => cfg
            .seeds
            .par_iter()
            .map(|&seed| generate_world(&WorldSpec { seed, ..*spec }).map(SessionPair::from))
            .collect::<Result<_>>()?,
        CompareSource::Sessions(s) => vec![s.clone()],
    };
    let cells: Vec<(usize, usize)> = (0..cfg.strategies.len())
        .flat_map(|s| (0..cfg.seeds.len()).map(move |k| (s, k)))
        .collect();
    let results: Vec<SeedResult> = cells
        .par_iter()
        .map(|&(s, k)| {
            let seed = cfg.seeds[k];
            let pair = &sessions[k.min(sessions.len() - 1)];
            let run = run_strategy(pair, &cfg.partition_config(cfg.strategies[s], seed), &cfg.eval)?;
            Ok(SeedResult {
                seed,
                n_classes: run.report.n_classes,
                sr_top1: run.report.sr_top1,
                sr_top5: run.report.sr_top5,
                nsr_top1: run.report.nsr_top1,
            })
        })
        .collect::<Result<_>>()?;

    let rows = cfg
        .strategies
        .iter()
        .enumerate()
        .map(|(s, &strategy)| {
            let per_seed: Vec<SeedResult> = results[s * cfg.seeds.len()..(s + 1) * cfg.seeds.len()].to_vec();
            CompareRow {
                strategy,
                n_classes: MeanStd::of(per_seed.iter().map(|r| r.n_classes as f64)),
                sr_top5: MeanStd::of(per_seed.iter().map(|r| r.sr_top5)),
                nsr_top1: MeanStd::of(per_seed.iter().map(|r| r.nsr_top1)),
                sr_top1: MeanStd::of(per_seed.iter().map(|r| r.sr_top1)),
                per_seed,
            }
        })
        .collect();
    Ok(CompareTable {
        rows,
        top_x: cfg.eval.top_x,
    })
}
