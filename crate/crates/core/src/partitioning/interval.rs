//! Equal-width interval partitioning along a scalar cue (time or travel
//! distance).

use crate::error::{Error, Result};
use crate::model::{cumulative_travel_distance, Partition, Trajectory};

/// Bins each cue value into one of `k` equal-width intervals spanning
/// `[min, max]` of the values. A value on an interior boundary falls into the
/// upper bin; the maximum is clamped into bin `k - 1`. A zero span puts
/// everything in bin 0. Bins may be empty.
pub fn equal_width_bins(cues: &[f64], k: usize) -> Vec<usize> {
    debug_assert!(k >= 1);
    let Some((lo, hi)) = cues.iter().fold(None, |acc: Option<(f64, f64)>, &v| {
        Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
    }) else {
        return Vec::new();
    };
    let span = hi - lo;
    if span <= 0.0 || k == 1 {
        return vec![0; cues.len()];
    }
    let kf = k as f64;
    cues.iter()
        .map(|&v| {
            // floor((v - lo) / (span / k)), evaluated as (v - lo) * k / span so
            // that exact boundaries land exactly
            let bin = ((v - lo) * kf / span).floor();
            (bin.max(0.0) as usize).min(k - 1)
        })
        .collect()
}

fn partition_by_cue(traj: &Trajectory, cues: &[f64], k: usize) -> Result<Partition> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if k == 0 {
        return Err(Error::ZeroClasses);
    }
    let bins = equal_width_bins(cues, k);
    Partition::from_raw_labels(traj.sample_ids(), &bins)
}

/// Time-cue strategy: `k` intervals of equal duration over the trajectory's
/// time span. Empty intervals are dropped, so fewer than `k` classes may come
/// back.
pub fn partition_by_time(traj: &Trajectory, k: usize) -> Result<Partition> {
    partition_by_cue(traj, &traj.timestamps(), k)
}

/// Location-cue strategy: `k` intervals of equal travel distance along the
/// trajectory.
pub fn partition_by_location(traj: &Trajectory, k: usize) -> Result<Partition> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let cues = cumulative_travel_distance(traj)?;
    partition_by_cue(traj, &cues, k)
}
