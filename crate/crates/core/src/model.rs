//! Domain types shared by every stage of the pipeline: poses, trajectories,
//! appearance features, and the partition of a trajectory into place classes.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(rad: f64) -> f64 {
    let mut r = (rad + PI).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        r = 0.0;
    }
    r - PI
}

/// Smallest absolute angle between two headings, in `[0, π]`.
pub fn angular_difference(a: f64, b: f64) -> f64 {
    // |a - b| is exactly symmetric in IEEE arithmetic
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

/// Planar viewpoint in a local metric frame. Heading is counter-clockwise
/// from the +x axis, kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite { what: "pose position" });
        }
        if !heading.is_finite() {
            return Err(Error::NonFinite { what: "pose heading" });
        }
        Ok(Pose {
            x,
            y,
            heading: normalize_angle(heading),
        })
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub sample_id: u64,
    pub timestamp: f64,
    pub pose: Pose,
}

impl TrajectorySample {
    pub fn new(sample_id: u64, timestamp: f64, pose: Pose) -> Result<Self> {
        if !timestamp.is_finite() {
            return Err(Error::NonFinite { what: "timestamp" });
        }
        Ok(TrajectorySample {
            sample_id,
            timestamp,
            pose,
        })
    }
}

/// Samples ordered by `(timestamp, sample_id)` with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
    pub frame_note: String,
}

impl Trajectory {
    /// Sorts the samples by timestamp (ties by sample id) and rejects
    /// duplicate ids.
    pub fn new(mut samples: Vec<TrajectorySample>, frame_note: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if !seen.insert(s.sample_id) {
                return Err(Error::DuplicateSampleId(s.sample_id));
            }
        }
        samples.sort_by(|a, b| {
            a.timestamp
                .total_cmp(&b.timestamp)
                .then(a.sample_id.cmp(&b.sample_id))
        });
        Ok(Trajectory {
            samples,
            frame_note: frame_note.into(),
        })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_ids(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.sample_id).collect()
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.timestamp).collect()
    }
}

/// Travel distance along the trajectory up to each sample. Element 0 is 0.
pub fn cumulative_travel_distance(traj: &Trajectory) -> Result<Vec<f64>> {
    let samples = traj.samples();
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(acc);
    for pair in samples.windows(2) {
        acc += pair[0].pose.distance_to(&pair[1].pose);
        out.push(acc);
    }
    Ok(out)
}

/// Dense row-major matrix of appearance descriptors, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    dim: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if n_rows == 0 || dim == 0 {
            return Err(Error::InvalidMatrix(format!(
                "shape {n_rows}x{dim} must be at least 1x1"
            )));
        }
        if n_rows.checked_mul(dim) != Some(values.len()) {
            return Err(Error::InvalidMatrix(format!(
                "{} values do not fill a {n_rows}x{dim} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(FeatureMatrix {
            n_rows,
            dim,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Copy with each row scaled to unit Euclidean norm. Zero rows are kept.
    pub fn l2_normalized(&self) -> FeatureMatrix {
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.dim) {
            let norm = row
                .iter()
                .map(|&v| f64::from(v) * f64::from(v))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v = (f64::from(*v) / norm) as f32;
                }
            }
        }
        FeatureMatrix {
            n_rows: self.n_rows,
            dim: self.dim,
            values,
        }
    }
}

/// Assignment of every trajectory sample to a dense place-class id.
///
/// Entries are stored in the order of the source trajectory so that position
/// `i` lines up with trajectory sample `i` and feature row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sample_ids: Vec<u64>,
    labels: Vec<usize>,
    n_classes: usize,
    index: HashMap<u64, usize>,
}

impl Partition {
    /// Validates that ids are unique and that labels cover `0..n_classes`
    /// without gaps.
    pub fn new(sample_ids: Vec<u64>, labels: Vec<usize>) -> Result<Self> {
        if sample_ids.len() != labels.len() {
            return Err(Error::RowMismatch {
                what: "partition labels",
                expected: sample_ids.len(),
                got: labels.len(),
            });
        }
        let mut index = HashMap::with_capacity(sample_ids.len());
        for (pos, &id) in sample_ids.iter().enumerate() {
            if index.insert(id, pos).is_some() {
                return Err(Error::DuplicateSampleId(id));
            }
        }
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut used = vec![false; n_classes];
        for &l in &labels {
            used[l] = true;
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::NonDenseClasses(format!(
                "class {missing} has no members but {} classes are referenced",
                n_classes
            )));
        }
        Ok(Partition {
            sample_ids,
            labels,
            n_classes,
            index,
        })
    }

    /// Builds a partition from arbitrary raw labels, compacting them to dense
    /// ids while preserving their relative order.
    pub fn from_raw_labels(sample_ids: Vec<u64>, raw: &[usize]) -> Result<Self> {
        let mut distinct: Vec<usize> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let labels = raw
            .iter()
            .map(|r| distinct.binary_search(r).expect("label present"))
            .collect();
        Self::new(sample_ids, labels)
    }

    pub fn sample_ids(&self) -> &[u64] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_of(&self, sample_id: u64) -> Option<usize> {
        self.index.get(&sample_id).map(|&pos| self.labels[pos])
    }

    /// Number of members of each class, indexed by class id.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_classes];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// True when the partition lists exactly the trajectory's samples, in
    /// trajectory order.
    pub fn is_aligned_with(&self, traj: &Trajectory) -> bool {
        self.sample_ids.len() == traj.len()
            && self
                .sample_ids
                .iter()
                .zip(traj.samples())
                .all(|(&id, s)| id == s.sample_id)
    }

    /// Labels renumbered by order of first appearance. Two partitions that
    /// differ only by a relabeling have equal canonical labels.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.n_classes];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect()
    }
}
