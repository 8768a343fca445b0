//! Unsupervised discovery of place classes for visual place classification.
//!
//! A mapper robot's trajectory is split into place classes by one of four
//! strategies (time, location, time-appearance, location-appearance). Each
//! partition is then scored by a simulated classification task: test images
//! get ground-truth classes from the nearest compatible training viewpoint, a
//! nearest-centroid classifier predicts the top-X classes, and the success
//! rate and size-normalized success rate summarize the result.
//!
//! Modules:
//!
//! * [`model`]: poses, trajectories, feature matrices, partitions.
//! * [`partitioning`]: the four strategies and the k-means they rely on.
//! * [`evaluation`]: ground-truth labeling, the proxy classifier, SR and NSR.
//! * [`io`]: CSV, VPCF, JSON and SVG formats.
//! * [`synthworld`]: seeded synthetic sessions with place-dependent features.
//! * [`pipeline`]: end-to-end runs and multi-seed strategy comparison.

pub mod error;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod partitioning;
pub mod pipeline;
pub mod synthworld;

pub use error::{Error, Result};
pub use model::{FeatureMatrix, Partition, Pose, Trajectory, TrajectorySample};
pub use partitioning::{PartitionConfig, Strategy};
