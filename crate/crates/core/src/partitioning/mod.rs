//! Workspace partitioning strategies.
//!
//! * [`Strategy::Time`]: equal-duration intervals over the timestamps.
//! * [`Strategy::Location`]: equal-length intervals of travel distance.
//! * [`Strategy::TimeAppearance`] / [`Strategy::LocationAppearance`]: k-means
//!   over appearance features, then the time or location rule inside each
//!   appearance cluster.

mod hybrid;
mod interval;
mod kmeans;

use std::fmt;
use std::str::FromStr;

pub use hybrid::{partition_hybrid, sub_class_count};
pub use interval::{equal_width_bins, partition_by_location, partition_by_time};
pub use kmeans::{kmeans, kmeans_best_of, restart_seed, KMeansConfig, KMeansResult};

use crate::error::{Error, Result};
use crate::model::{FeatureMatrix, Partition, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Time,
    Location,
    TimeAppearance,
    LocationAppearance,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Time,
        Strategy::Location,
        Strategy::TimeAppearance,
        Strategy::LocationAppearance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Time => "time",
            Strategy::Location => "location",
            Strategy::TimeAppearance => "time-appearance",
            Strategy::LocationAppearance => "location-appearance",
        }
    }

    pub fn uses_appearance(self) -> bool {
        matches!(self, Strategy::TimeAppearance | Strategy::LocationAppearance)
    }

    /// The cue-only strategy a hybrid refines; base strategies map to
    /// themselves.
    pub fn base(self) -> Strategy {
        match self {
            Strategy::Time | Strategy::TimeAppearance => Strategy::Time,
            Strategy::Location | Strategy::LocationAppearance => Strategy::Location,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionConfig {
    pub strategy: Strategy,
    /// Exact class count for the cue strategies; sizes the sub-classes of the
    /// hybrids.
    pub n_classes_target: usize,
    /// Cluster count of the appearance stage (hybrids only).
    pub k_appearance: usize,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    /// L2-normalize feature rows before clustering.
    pub normalize_features: bool,
}

impl PartitionConfig {
    pub fn new(strategy: Strategy, n_classes_target: usize) -> Self {
        PartitionConfig {
            strategy,
            n_classes_target,
            k_appearance: n_classes_target,
            seed: 0,
            kmeans_restarts: 1,
            kmeans_max_iter: 100,
            kmeans_tol: 1e-6,
            normalize_features: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes_target == 0 {
            return Err(Error::InvalidConfig("class count must be at least 1".into()));
        }
        if self.strategy.uses_appearance() && self.k_appearance == 0 {
            return Err(Error::InvalidConfig(
                "appearance cluster count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Runs the configured strategy. Appearance strategies need `features`.
pub fn partition(
    traj: &Trajectory,
    features: Option<&FeatureMatrix>,
    cfg: &PartitionConfig,
) -> Result<Partition> {
    cfg.validate()?;
    match cfg.strategy {
        Strategy::Time => partition_by_time(traj, cfg.n_classes_target),
        Strategy::Location => partition_by_location(traj, cfg.n_classes_target),
        Strategy::TimeAppearance | Strategy::LocationAppearance => {
            let features = features.ok_or_else(|| {
                Error::InvalidConfig(format!("{} needs appearance features", cfg.strategy))
            })?;
            partition_hybrid(traj, features, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("appearance".parse::<Strategy>().is_err());
        assert_eq!(Strategy::TimeAppearance.base(), Strategy::Time);
        assert_eq!(Strategy::LocationAppearance.base(), Strategy::Location);
    }

    #[test]
    fn hybrid_without_features_is_rejected() {
        let traj = Trajectory::default();
        let cfg = PartitionConfig::new(Strategy::TimeAppearance, 2);
        assert!(matches!(partition(&traj, None, &cfg), Err(Error::InvalidConfig(_))));
    }
}
