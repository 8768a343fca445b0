//! Simulated place-classification evaluation.
//!
//! Test samples get ground-truth classes from the nearest orientation-compatible
//! training viewpoint. A nearest-centroid classifier over the training features
//! stands in for a trained network, and its top-X predictions are scored with
//! the success rate (SR) and the class-size normalized success rate (NSR).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angular_difference, FeatureMatrix, Partition, Trajectory};

pub const DEFAULT_ORIENT_THRESH_DEG: f64 = 20.0;
pub const DEFAULT_DIST_THRESH_M: f64 = 18.0;
pub const DEFAULT_TOP_X: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthThresholds {
    pub orient_deg: f64,
    pub dist_m: f64,
}

impl Default for GroundTruthThresholds {
    fn default() -> Self {
        GroundTruthThresholds {
            orient_deg: DEFAULT_ORIENT_THRESH_DEG,
            dist_m: DEFAULT_DIST_THRESH_M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthLabel {
    pub test_sample_id: u64,
    /// `None` marks a test sample excluded from scoring.
    pub label: Option<usize>,
    /// Nearest orientation-compatible training sample, reported even when it
    /// is too far away to give a label.
    pub matched_train_id: Option<u64>,
    pub match_distance: Option<f64>,
}

impl GroundTruthLabel {
    pub fn is_valid(&self) -> bool {
        self.label.is_some()
    }
}

/// Labels every test sample with the class of the nearest training sample
/// whose heading is within `orient_deg`. Samples with no such training sample,
/// or whose nearest one lies farther than `dist_m`, are invalid. Both limits
/// are inclusive; equidistant candidates resolve to the lower sample id.
pub fn assign_ground_truth(
    test: &Trajectory,
    train: &Trajectory,
    train_partition: &Partition,
    thresholds: &GroundTruthThresholds,
) -> Result<Vec<GroundTruthLabel>> {
    if train.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if !train_partition.is_aligned_with(train) {
        return Err(Error::InvalidConfig(
            "training partition does not list the training samples in trajectory order".into(),
        ));
    }
    let orient = thresholds.orient_deg.to_radians();
    let labels = test
        .samples()
        .par_iter()
        .map(|t| {
            let mut best: Option<(f64, u64, usize)> = None;
            for (pos, s) in train.samples().iter().enumerate() {
                if angular_difference(t.pose.heading, s.pose.heading) > orient {
                    continue;
                }
                let d = t.pose.distance_to(&s.pose);
                let better = match best {
                    None => true,
                    Some((bd, bid, _)) => d < bd || (d == bd && s.sample_id < bid),
                };
                if better {
                    best = Some((d, s.sample_id, pos));
                }
            }
            match best {
                Some((d, id, pos)) => GroundTruthLabel {
                    test_sample_id: t.sample_id,
                    label: (d <= thresholds.dist_m).then(|| train_partition.labels()[pos]),
                    matched_train_id: Some(id),
                    match_distance: Some(d),
                },
                None => GroundTruthLabel {
                    test_sample_id: t.sample_id,
                    label: None,
                    matched_train_id: None,
                    match_distance: None,
                },
            }
        })
        .collect();
    Ok(labels)
}

/// Nearest-centroid classifier: one mean feature vector per class.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    dim: usize,
    centroids: Vec<f64>,
    counts: Vec<usize>,
}

impl CentroidModel {
    pub fn new(dim: usize, centroids: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if dim == 0 || centroids.len() != dim * counts.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} centroid values for {} classes of dimension {dim}",
                centroids.len(),
                counts.len()
            )));
        }
        Ok(CentroidModel {
            dim,
            centroids,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn centroid(&self, class: usize) -> &[f64] {
        &self.centroids[class * self.dim..(class + 1) * self.dim]
    }

    /// Training-sample count of each class.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

pub fn train_centroid_model(
    train_features: &FeatureMatrix,
    train_partition: &Partition,
) -> Result<CentroidModel> {
    if train_features.n_rows() != train_partition.len() {
        return Err(Error::RowMismatch {
            what: "training features",
            expected: train_partition.len(),
            got: train_features.n_rows(),
        });
    }
    let dim = train_features.dim();
    let k = train_partition.n_classes();
    let mut sums = vec![0.0f64; k * dim];
    let mut counts = vec![0usize; k];
    for (row, &c) in train_features.rows().zip(train_partition.labels()) {
        counts[c] += 1;
        for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row) {
            *s += f64::from(v);
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        for s in &mut sums[c * dim..(c + 1) * dim] {
            *s /= n as f64;
        }
    }
    CentroidModel::new(dim, sums, counts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopXPrediction {
    pub test_sample_id: u64,
    /// Distinct class ids, best first.
    pub ranked_classes: Vec<usize>,
}

impl TopXPrediction {
    /// The first `x` entries, which are the top-`x` prediction.
    pub fn truncated(&self, x: usize) -> TopXPrediction {
        TopXPrediction {
            test_sample_id: self.test_sample_id,
            ranked_classes: self.ranked_classes.iter().take(x).copied().collect(),
        }
    }
}

/// Ranks classes by Euclidean distance from `feature` to their centroids,
/// lower class id first on ties, and keeps the first `min(x, n_classes)`.
pub fn classify_top_x(
    model: &CentroidModel,
    test_sample_id: u64,
    feature: &[f32],
    x: usize,
) -> Result<TopXPrediction> {
    if feature.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: feature.len(),
        });
    }
    if x == 0 {
        return Err(Error::InvalidConfig("top-X needs X >= 1".into()));
    }
    let mut ranked: Vec<(f64, usize)> = model
        .centroids
        .chunks_exact(model.dim)
        .enumerate()
        .map(|(c, centroid)| {
            let d2: f64 = feature
                .iter()
                .zip(centroid)
                .map(|(&a, &b)| {
                    let d = f64::from(a) - b;
                    d * d
                })
                .sum();
            (d2, c)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(TopXPrediction {
        test_sample_id,
        ranked_classes: ranked.into_iter().take(x).map(|(_, c)| c).collect(),
    })
}

/// Classifies every test row, in trajectory order.
pub fn classify_all(
    model: &CentroidModel,
    test: &Trajectory,
    test_features: &FeatureMatrix,
    x: usize,
) -> Result<Vec<TopXPrediction>> {
    if test_features.n_rows() != test.len() {
        return Err(Error::RowMismatch {
            what: "test features",
            expected: test.len(),
            got: test_features.n_rows(),
        });
    }
    test.samples()
        .par_iter()
        .enumerate()
        .map(|(i, s)| classify_top_x(model, s.sample_id, test_features.row(i), x))
        .collect()
}

/// Exact SR counts over the valid test samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateTally {
    pub hits: usize,
    pub n_valid: usize,
}

impl RateTally {
    /// False when there were no valid test samples; [`Self::value`] is then 0.
    pub fn is_defined(&self) -> bool {
        self.n_valid > 0
    }

    pub fn value(&self) -> f64 {
        if self.n_valid == 0 {
            0.0
        } else {
            self.hits as f64 / self.n_valid as f64
        }
    }
}

/// Exact NSR terms: the number of hits whose class held `size` training
/// samples, keyed by `size`. NSR is `sum(hits / size) / n_valid`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NsrTally {
    pub hits_by_class_size: BTreeMap<usize, usize>,
    pub n_valid: usize,
}

impl NsrTally {
    pub fn is_defined(&self) -> bool {
        self.n_valid > 0
    }

    pub fn value(&self) -> f64 {
        if self.n_valid == 0 {
            return 0.0;
        }
        // one correctly rounded division per class size
        self.hits_by_class_size
            .iter()
            .map(|(&size, &hits)| hits as f64 / (size as f64 * self.n_valid as f64))
            .sum()
    }
}

fn aligned<'a>(
    preds: &'a [TopXPrediction],
    gts: &'a [GroundTruthLabel],
) -> Result<impl Iterator<Item = (&'a TopXPrediction, usize)>> {
    if preds.len() != gts.len() {
        return Err(Error::RowMismatch {
            what: "predictions",
            expected: gts.len(),
            got: preds.len(),
        });
    }
    if let Some((index, (p, g))) = preds
        .iter()
        .zip(gts)
        .enumerate()
        .find(|(_, (p, g))| p.test_sample_id != g.test_sample_id)
    {
        return Err(Error::Misaligned {
            index,
            pred_id: p.test_sample_id,
            gt_id: g.test_sample_id,
        });
    }
    Ok(preds
        .iter()
        .zip(gts)
        .filter_map(|(p, g)| g.label.map(|l| (p, l))))
}

/// Fraction of valid test samples whose true class is in the predicted list.
/// Invalid ground truths are skipped.
pub fn success_rate(preds: &[TopXPrediction], gts: &[GroundTruthLabel]) -> Result<RateTally> {
    let mut tally = RateTally::default();
    for (p, truth) in aligned(preds, gts)? {
        tally.n_valid += 1;
        if p.ranked_classes.contains(&truth) {
            tally.hits += 1;
        }
    }
    Ok(tally)
}

/// SR with each hit weighted by one over the training-set size of the hit
/// class. Needs top-1 predictions.
pub fn normalized_success_rate(
    preds: &[TopXPrediction],
    gts: &[GroundTruthLabel],
    model: &CentroidModel,
) -> Result<NsrTally> {
    if let Some(p) = preds.iter().find(|p| p.ranked_classes.len() > 1) {
        return Err(Error::NsrRequiresTop1(p.ranked_classes.len()));
    }
    let mut tally = NsrTally::default();
    for (p, truth) in aligned(preds, gts)? {
        tally.n_valid += 1;
        if p.ranked_classes.first() == Some(&truth) {
            let size = model.counts.get(truth).copied().unwrap_or(0);
            if size == 0 {
                return Err(Error::EmptyClass(truth));
            }
            *tally.hits_by_class_size.entry(size).or_insert(0) += 1;
        }
    }
    Ok(tally)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub size: usize,
    pub count: usize,
}

/// How many classes have each member count, ascending by size.
pub fn class_size_histogram(partition: &Partition) -> Vec<HistogramBin> {
    let mut hist = BTreeMap::new();
    for size in partition.class_sizes() {
        *hist.entry(size).or_insert(0) += 1;
    }
    hist.into_iter()
        .map(|(size, count)| HistogramBin { size, count })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub thresholds: GroundTruthThresholds,
    /// X of the wide top-X success rate.
    pub top_x: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            thresholds: GroundTruthThresholds::default(),
            top_x: DEFAULT_TOP_X,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub n_valid_tests: usize,
    pub n_invalid_tests: usize,
    pub sr_top1: f64,
    /// SR at the configured X (5 unless overridden).
    pub sr_top5: f64,
    pub nsr_top1: f64,
    pub n_classes: usize,
    pub mean_class_size: f64,
    pub class_size_histogram: Vec<HistogramBin>,
}

/// Ground truth, centroid training, classification and scoring in one call.
pub fn evaluate(
    train: &Trajectory,
    train_features: &FeatureMatrix,
    train_partition: &Partition,
    test: &Trajectory,
    test_features: &FeatureMatrix,
    cfg: &EvalConfig,
) -> Result<EvaluationReport> {
    if train_features.n_rows() != train.len() {
        return Err(Error::RowMismatch {
            what: "training features",
            expected: train.len(),
            got: train_features.n_rows(),
        });
    }
    if test_features.dim() != train_features.dim() {
        return Err(Error::DimensionMismatch {
            expected: train_features.dim(),
            got: test_features.dim(),
        });
    }
    let gts = assign_ground_truth(test, train, train_partition, &cfg.thresholds)?;
    let model = train_centroid_model(train_features, train_partition)?;
    let wide = classify_all(&model, test, test_features, cfg.top_x.max(1))?;
    let top1: Vec<TopXPrediction> = wide.iter().map(|p| p.truncated(1)).collect();

    let sr1 = success_rate(&top1, &gts)?;
    let srx = success_rate(&wide, &gts)?;
    let nsr = normalized_success_rate(&top1, &gts, &model)?;
    let n_classes = train_partition.n_classes();
    Ok(EvaluationReport {
        n_valid_tests: sr1.n_valid,
        n_invalid_tests: gts.len() - sr1.n_valid,
        sr_top1: sr1.value(),
        sr_top5: srx.value(),
        nsr_top1: nsr.value(),
        n_classes,
        mean_class_size: train_partition.len() as f64 / n_classes as f64,
        class_size_histogram: class_size_histogram(train_partition),
    })
}
