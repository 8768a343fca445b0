//! Appearance-guided strategies: k-means over the feature rows, then each
//! appearance cluster is cut into sub-classes along the time or travel
//! distance cue of its own members.

use crate::error::{Error, Result};
use crate::model::{cumulative_travel_distance, FeatureMatrix, Partition, Trajectory};

use super::interval::equal_width_bins;
use super::kmeans::{kmeans_best_of, KMeansConfig};
use super::{PartitionConfig, Strategy};

/// Number of sub-classes for an appearance cluster of `members` samples when
/// the target class size is `target_size`: `max(1, round(members / target_size))`,
/// halves rounded up.
pub fn sub_class_count(members: usize, target_size: usize) -> usize {
    ((2 * members + target_size) / (2 * target_size)).max(1)
}

/// Appearance clustering followed by per-cluster interval partitioning.
///
/// When the appearance cluster count exceeds the number of samples it is
/// reduced to the number of samples.
pub fn partition_hybrid(
    traj: &Trajectory,
    features: &FeatureMatrix,
    cfg: &PartitionConfig,
) -> Result<Partition> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if cfg.n_classes_target == 0 || cfg.k_appearance == 0 {
        return Err(Error::ZeroClasses);
    }
    let n = traj.len();
    if features.n_rows() != n {
        return Err(Error::RowMismatch {
            what: "feature matrix",
            expected: n,
            got: features.n_rows(),
        });
    }
    let cues = match cfg.strategy {
        Strategy::TimeAppearance => traj.timestamps(),
        Strategy::LocationAppearance => cumulative_travel_distance(traj)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "{} is not an appearance strategy",
                other.name()
            )))
        }
    };

    let normalized;
    let input = if cfg.normalize_features {
        normalized = features.l2_normalized();
        &normalized
    } else {
        features
    };
    let km_cfg = KMeansConfig {
        k: cfg.k_appearance.min(n),
        seed: cfg.seed,
        max_iter: cfg.kmeans_max_iter,
        tol: cfg.kmeans_tol,
    };
    let clusters = kmeans_best_of(input, &km_cfg, cfg.kmeans_restarts)?;

    let target_size = n.div_ceil(cfg.n_classes_target);
    let n_app = clusters.n_clusters();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_app];
    for (i, &c) in clusters.assignments.iter().enumerate() {
        members[c].push(i);
    }

    // raw label = offset of cluster c + sub-bin, so labels sort by (c, sub)
    let mut raw = vec![0usize; n];
    let mut offset = 0;
    for group in &members {
        let m = sub_class_count(group.len(), target_size);
        let group_cues: Vec<f64> = group.iter().map(|&i| cues[i]).collect();
        for (&i, bin) in group.iter().zip(equal_width_bins(&group_cues, m)) {
            raw[i] = offset + bin;
        }
        offset += m;
    }
    Partition::from_raw_labels(traj.sample_ids(), &raw)
}
