//! Seeded synthetic mapping sessions.
//!
//! The robot drives counter-clockwise around a circular loop that is cut into
//! contiguous arc regions, one per place. Frames are keyed by travel distance
//! (one every `loop_length * laps / n_samples` meters), so under a variable
//! speed profile the timestamps are unevenly spaced while the arc positions
//! stay even. Each place owns a random prototype vector; a frame's feature is
//! its place's prototype plus isotropic Gaussian noise.
//!
//! The test session revisits every training viewpoint with up to 2 m of
//! position jitter and 10 degrees of heading jitter, fresh feature noise, and
//! its own speed profile. A test frame takes the place of the training viewpoint
//! it matches under the default ground-truth thresholds.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::evaluation::{assign_ground_truth, GroundTruthThresholds};
use crate::model::{FeatureMatrix, Partition, Pose, Trajectory, TrajectorySample};

pub const MAX_POSITION_JITTER_M: f64 = 2.0;
pub const MAX_HEADING_JITTER_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedProfile {
    /// Constant 1 m/s.
    Constant,
    /// Piecewise-constant speed drawn uniformly from `[min_speed, max_speed]`
    /// (m/s) on random stretches of the loop.
    Variable { min_speed: f64, max_speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSpec {
    pub n_places: usize,
    pub n_samples: usize,
    pub feature_dim: usize,
    pub speed_profile: SpeedProfile,
    pub feature_noise_sigma: f64,
    /// Drive the loop twice.
    pub revisit: bool,
    pub seed: u64,
    pub radius_m: f64,
    /// Place arc lengths are drawn from `1 ± place_length_spread` before
    /// normalizing to the loop length; 0 gives equal arcs.
    pub place_length_spread: f64,
}

impl WorldSpec {
    pub fn new(n_places: usize, n_samples: usize, feature_dim: usize, seed: u64) -> Self {
        WorldSpec {
            n_places,
            n_samples,
            feature_dim,
            speed_profile: SpeedProfile::Constant,
            feature_noise_sigma: 0.0,
            revisit: false,
            seed,
            radius_m: 100.0,
            place_length_spread: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_places == 0 {
            return bad("n_places must be at least 1".into());
        }
        if self.n_samples < self.n_places {
            return bad(format!(
                "n_samples ({}) must be at least n_places ({})",
                self.n_samples, self.n_places
            ));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be at least 1".into());
        }
        if !(self.feature_noise_sigma >= 0.0 && self.feature_noise_sigma.is_finite()) {
            return bad(format!("noise sigma {} must be finite and >= 0", self.feature_noise_sigma));
        }
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return bad(format!("radius {} must be positive", self.radius_m));
        }
        if !(0.0..1.0).contains(&self.place_length_spread) {
            return bad(format!("place length spread {} must be in [0, 1)", self.place_length_spread));
        }
        if let SpeedProfile::Variable { min_speed, max_speed } = self.speed_profile {
            if !(min_speed > 0.0 && min_speed <= max_speed && max_speed.is_finite()) {
                return bad(format!("speed range [{min_speed}, {max_speed}] must satisfy 0 < min <= max"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWorld {
    pub train: Trajectory,
    pub train_features: FeatureMatrix,
    pub test: Trajectory,
    pub test_features: FeatureMatrix,
    /// True place of each training sample, in trajectory order.
    pub train_places: Vec<usize>,
    /// True place of each test sample, in trajectory order.
    pub test_places: Vec<usize>,
    /// Arc position (meters from the start, modulo the loop) where each place
    /// begins; place `p` spans `[place_starts[p], place_starts[p + 1])`.
    pub place_starts: Vec<f64>,
}

struct SpeedField {
    /// Arc position where each constant-speed stretch begins.
    starts: Vec<f64>,
    speeds: Vec<f64>,
}

impl SpeedField {
    fn draw(profile: SpeedProfile, total_len: f64, n_stretches: usize, rng: &mut ChaCha8Rng) -> Self {
        match profile {
            SpeedProfile::Constant => SpeedField {
                starts: vec![0.0],
                speeds: vec![1.0],
            },
            SpeedProfile::Variable { min_speed, max_speed } => {
                let mut starts: Vec<f64> = (1..n_stretches).map(|_| rng.random::<f64>() * total_len).collect();
                starts.push(0.0);
                starts.sort_by(f64::total_cmp);
                let speeds = starts
                    .iter()
                    .map(|_| {
                        if max_speed > min_speed {
                            rng.random_range(min_speed..=max_speed)
                        } else {
                            min_speed
                        }
                    })
                    .collect();
                SpeedField { starts, speeds }
            }
        }
    }

    fn at(&self, arc: f64) -> f64 {
        let i = self.starts.partition_point(|&s| s <= arc).saturating_sub(1);
        self.speeds[i]
    }
}

fn place_boundaries(spec: &WorldSpec, loop_len: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let weights: Vec<f64> = (0..spec.n_places)
        .map(|_| 1.0 + spec.place_length_spread * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut starts = Vec::with_capacity(spec.n_places);
    let mut acc = 0.0;
    for w in &weights {
        starts.push(acc);
        acc += w / total * loop_len;
    }
    starts
}

fn place_at(starts: &[f64], arc_in_loop: f64) -> usize {
    starts.partition_point(|&s| s <= arc_in_loop).saturating_sub(1)
}

fn noisy_row(prototype: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f32> {
    prototype
        .iter()
        .map(|&p| {
            let z: f64 = StandardNormal.sample(rng);
            (p + sigma * z) as f32
        })
        .collect()
}

/// Timestamps for frames at the given arc positions driven with `speed`.
fn timestamps(arcs: &[f64], speed: &SpeedField) -> Vec<f64> {
    let mut t = 0.0;
    let mut out = Vec::with_capacity(arcs.len());
    for (i, &a) in arcs.iter().enumerate() {
        if i > 0 {
            let prev = arcs[i - 1];
            t += (a - prev) / speed.at(prev);
        }
        out.push(t);
    }
    out
}

pub fn generate_world(spec: &WorldSpec) -> Result<SyntheticWorld> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let laps = if spec.revisit { 2.0 } else { 1.0 };
    let loop_len = TAU * spec.radius_m;
    let total_len = loop_len * laps;
    let n = spec.n_samples;
    let step = total_len / n as f64;

    let place_starts = place_boundaries(spec, loop_len, &mut rng);
    let prototypes: Vec<Vec<f64>> = (0..spec.n_places)
        .map(|_| (0..spec.feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    let arcs: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let places: Vec<usize> = arcs.iter().map(|&a| place_at(&place_starts, a % loop_len)).collect();
    let n_stretches = 2 * spec.n_places.max(4);

    let train_speed = SpeedField::draw(spec.speed_profile, total_len, n_stretches, &mut rng);
    let train_times = timestamps(&arcs, &train_speed);
    let mut train_samples = Vec::with_capacity(n);
    let mut train_rows = Vec::with_capacity(n * spec.feature_dim);
    for i in 0..n {
        let theta = arcs[i] / spec.radius_m;
        let pose = Pose::new(
            spec.radius_m * theta.cos(),
            spec.radius_m * theta.sin(),
            theta + FRAC_PI_2,
        )?;
        train_samples.push(TrajectorySample::new(i as u64, train_times[i], pose)?);
        train_rows.extend(noisy_row(&prototypes[places[i]], spec.feature_noise_sigma, &mut rng));
    }

    let test_speed = SpeedField::draw(spec.speed_profile, total_len, n_stretches, &mut rng);
    let test_times = timestamps(&arcs, &test_speed);
    let max_heading_jitter = MAX_HEADING_JITTER_DEG.to_radians();
    let mut test_samples = Vec::with_capacity(n);
    for i in 0..n {
        let theta = arcs[i] / spec.radius_m;
        // uniform over the jitter disk
        let r = MAX_POSITION_JITTER_M * rng.random::<f64>().sqrt();
        let phi = rng.random::<f64>() * TAU;
        let dh = (2.0 * rng.random::<f64>() - 1.0) * max_heading_jitter;
        let pose = Pose::new(
            spec.radius_m * theta.cos() + r * phi.cos(),
            spec.radius_m * theta.sin() + r * phi.sin(),
            theta + FRAC_PI_2 + dh,
        )?;
        test_samples.push(TrajectorySample::new(i as u64, test_times[i], pose)?);
    }
    let frame = format!("circular loop, radius {} m, centered at the origin", spec.radius_m);
    let train = Trajectory::new(train_samples, frame.clone())?;
    let test = Trajectory::new(test_samples, frame)?;

    // a test view looks like the place of the training view it matches
    let whole = Partition::new(train.sample_ids(), vec![0; n])?;
    let matches = assign_ground_truth(&test, &train, &whole, &GroundTruthThresholds::default())?;
    let test_places: Vec<usize> = matches
        .iter()
        .map(|m| {
            let id = m.matched_train_id.filter(|_| m.is_valid());
            // train sample ids are frame indices
            places[id.expect("jitter stays within the matching thresholds") as usize]
        })
        .collect();
    let mut test_rows = Vec::with_capacity(n * spec.feature_dim);
    for &p in &test_places {
        test_rows.extend(noisy_row(&prototypes[p], spec.feature_noise_sigma, &mut rng));
    }

    Ok(SyntheticWorld {
        train,
        train_features: FeatureMatrix::new(n, spec.feature_dim, train_rows)?,
        test,
        test_features: FeatureMatrix::new(n, spec.feature_dim, test_rows)?,
        train_places: places,
        test_places,
        place_starts,
    })
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::angular_difference;
    use crate::partitioning::{kmeans, partition_by_location, partition_by_time, KMeansConfig};

    /// Adjusted Rand index from the pair-counting contingency table.
    fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
        let ka = a.iter().max().unwrap() + 1;
        let kb = b.iter().max().unwrap() + 1;
        let mut table = vec![vec![0u64; kb]; ka];
        for (&x, &y) in a.iter().zip(b) {
            table[x][y] += 1;
        }
        let c2 = |n: u64| (n * n.saturating_sub(1)) as f64 / 2.0;
        let index: f64 = table.iter().flatten().map(|&n| c2(n)).sum();
        let rows: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
        let cols: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
        let expected = rows * cols / c2(a.len() as u64);
        let max = (rows + cols) / 2.0;
        if max == expected {
            return 1.0;
        }
        (index - expected) / (max - expected)
    }

    #[test]
    fn ari_oracle_sanity() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }

    #[test]
    fn zero_noise_places_are_recoverable() {
        let spec = WorldSpec::new(6, 240, 8, 3);
        let w = generate_world(&spec).unwrap();
        for (row, &p) in w.train_features.rows().zip(&w.train_places) {
            let first = w.train_places.iter().position(|&q| q == p).unwrap();
            assert_eq!(row, w.train_features.row(first));
        }
        let km = kmeans(&w.train_features, &KMeansConfig::new(6, 1)).unwrap();
        let recovered = Partition::new(w.train.sample_ids(), km.assignments).unwrap();
        let truth = Partition::new(w.train.sample_ids(), w.train_places.clone()).unwrap();
        assert_eq!(recovered.canonical_labels(), truth.canonical_labels());
    }

    #[test]
    fn variable_speed_splits_time_from_location() {
        let spec = WorldSpec {
            speed_profile: SpeedProfile::Variable { min_speed: 0.2, max_speed: 5.0 },
            ..WorldSpec::new(4, 200, 4, 7)
        };
        let w = generate_world(&spec).unwrap();
        let by_time = partition_by_time(&w.train, 8).unwrap();
        let by_loc = partition_by_location(&w.train, 8).unwrap();
        let ari = adjusted_rand_index(by_time.labels(), by_loc.labels());
        assert!(ari < 1.0, "ari = {ari}");

        let constant = generate_world(&WorldSpec::new(4, 200, 4, 7)).unwrap();
        let ari = adjusted_rand_index(
            partition_by_time(&constant.train, 8).unwrap().labels(),
            partition_by_location(&constant.train, 8).unwrap().labels(),
        );
        assert_eq!(ari, 1.0);
    }

    #[test]
    fn deterministic() {
        let spec = WorldSpec {
            speed_profile: SpeedProfile::Variable { min_speed: 0.5, max_speed: 2.0 },
            feature_noise_sigma: 0.3,
            revisit: true,
            ..WorldSpec::new(5, 123, 6, 99)
        };
        assert_eq!(generate_world(&spec).unwrap(), generate_world(&spec).unwrap());
        let other = WorldSpec { seed: 100, ..spec };
        assert_ne!(generate_world(&spec).unwrap(), generate_world(&other).unwrap());
    }

    #[test]
    fn every_test_sample_has_a_valid_match() {
        for (seed, revisit, n) in [(1, false, 8), (2, true, 50), (3, false, 400)] {
            let spec = WorldSpec {
                speed_profile: SpeedProfile::Variable { min_speed: 0.2, max_speed: 5.0 },
                feature_noise_sigma: 1.0,
                revisit,
                ..WorldSpec::new(8, n, 4, seed)
            };
            let w = generate_world(&spec).unwrap();
            for t in w.test.samples() {
                let ok = w.train.samples().iter().any(|s| {
                    s.pose.distance_to(&t.pose) <= 18.0
                        && angular_difference(s.pose.heading, t.pose.heading) <= 20f64.to_radians()
                });
                assert!(ok, "seed {seed}: test sample {} has no match", t.sample_id);
            }
            let part = Partition::new(w.train.sample_ids(), vec![0; n]).unwrap();
            let gts = assign_ground_truth(&w.test, &w.train, &part, &GroundTruthThresholds::default()).unwrap();
            assert!(gts.iter().all(|g| g.is_valid()));
        }
    }

    #[test]
    fn noise_is_isotropic() {
        let sigma = 0.7;
        let spec = WorldSpec {
            feature_noise_sigma: sigma,
            ..WorldSpec::new(2, 1000, 5, 11)
        };
        let w = generate_world(&spec).unwrap();
        for place in 0..2 {
            let rows: Vec<&[f32]> = w
                .train_features
                .rows()
                .zip(&w.train_places)
                .filter(|(_, &p)| p == place)
                .map(|(r, _)| r)
                .collect();
            assert!(rows.len() >= 300);
            for d in 0..5 {
                let m = rows.iter().map(|r| f64::from(r[d])).sum::<f64>() / rows.len() as f64;
                let var = rows.iter().map(|r| (f64::from(r[d]) - m).powi(2)).sum::<f64>() / (rows.len() - 1) as f64;
                let rel = (var - sigma * sigma).abs() / (sigma * sigma);
                assert!(rel < 0.2, "place {place} dim {d}: var {var}");
            }
        }
    }

    #[test]
    fn arcs_and_places_are_contiguous() {
        let w = generate_world(&WorldSpec::new(5, 100, 2, 4)).unwrap();
        for pair in w.train_places.windows(2) {
            assert!(pair[1] == pair[0] || pair[1] == pair[0] + 1);
        }
        assert_eq!(w.train_places[0], 0);
        assert_eq!(*w.train_places.last().unwrap(), 4);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_world(&WorldSpec::new(4, 2, 3, 0)).is_err());
        assert!(generate_world(&WorldSpec::new(0, 2, 3, 0)).is_err());
        assert!(generate_world(&WorldSpec::new(1, 2, 0, 0)).is_err());
        let neg = WorldSpec { feature_noise_sigma: -1.0, ..WorldSpec::new(1, 2, 1, 0) };
        assert!(generate_world(&neg).is_err());
        let speeds = WorldSpec {
            speed_profile: SpeedProfile::Variable { min_speed: 2.0, max_speed: 1.0 },
            ..WorldSpec::new(1, 2, 1, 0)
        };
        assert!(generate_world(&speeds).is_err());
    }
}
