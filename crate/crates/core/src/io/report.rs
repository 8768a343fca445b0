use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::evaluation::{EvalConfig, EvaluationReport, HistogramBin};
use crate::partitioning::PartitionConfig;

use super::write_bytes;

/// Rounds to 6 significant digits before serializing.
pub(crate) fn six_sig<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rounded = if v.is_finite() && *v != 0.0 {
        format!("{v:.5e}").parse::<f64>().unwrap_or(*v)
    } else {
        *v
    };
    s.serialize_f64(rounded)
}

/// Settings echoed into a report. Partitioning fields are absent when the
/// partition came from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_appearance: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize_features: Option<bool>,
    pub orient_thresh_deg: f64,
    pub dist_thresh_m: f64,
    pub top: usize,
}

impl ReportConfig {
    pub fn from_eval(eval: &EvalConfig) -> Self {
        ReportConfig {
            classes: None,
            k_appearance: None,
            seed: None,
            normalize_features: None,
            orient_thresh_deg: eval.thresholds.orient_deg,
            dist_thresh_m: eval.thresholds.dist_m,
            top: eval.top_x,
        }
    }

    pub fn with_partition(mut self, cfg: &PartitionConfig) -> Self {
        self.classes = Some(cfg.n_classes_target);
        if cfg.strategy.uses_appearance() {
            self.k_appearance = Some(cfg.k_appearance);
            self.seed = Some(cfg.seed);
            self.normalize_features = Some(cfg.normalize_features);
        }
        self
    }
}

/// Serialized evaluation result of one strategy run. Field order is the JSON
/// key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub strategy: String,
    pub config: ReportConfig,
    pub n_classes: usize,
    pub n_valid_tests: usize,
    pub n_invalid_tests: usize,
    #[serde(serialize_with = "six_sig")]
    pub sr_top1: f64,
    #[serde(serialize_with = "six_sig")]
    pub sr_top5: f64,
    #[serde(serialize_with = "six_sig")]
    pub nsr_top1: f64,
    #[serde(serialize_with = "six_sig")]
    pub mean_class_size: f64,
    pub class_size_histogram: Vec<HistogramBin>,
}

impl RunReport {
    pub fn new(strategy: impl Into<String>, config: ReportConfig, report: &EvaluationReport) -> Self {
        RunReport {
            strategy: strategy.into(),
            config,
            n_classes: report.n_classes,
            n_valid_tests: report.n_valid_tests,
            n_invalid_tests: report.n_invalid_tests,
            sr_top1: report.sr_top1,
            sr_top5: report.sr_top5,
            nsr_top1: report.nsr_top1,
            mean_class_size: report.mean_class_size,
            class_size_histogram: report.class_size_histogram.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn write_report_json(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), report.to_json().as_bytes())
}

pub fn load_report_json(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}
