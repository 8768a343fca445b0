//! Seeded Lloyd's k-means with k-means++ initialization.
//!
//! Assignment of rows to centroids fans out over rayon; every reduction
//! (centroid sums, WCSS) runs sequentially in row order, so the result is
//! bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative WCSS improvement of an iteration drops below
    /// this value.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster id per input row, dense in `0..n_clusters()`.
    pub assignments: Vec<usize>,
    /// Row-major `n_clusters() x dim` centroids.
    pub centroids: Vec<f64>,
    pub dim: usize,
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after initialization and after every Lloyd iteration.
    pub wcss_history: Vec<f64>,
}

impl KMeansResult {
    pub fn n_clusters(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }
}

fn sq_dist(row: &[f32], centroid: &[f64]) -> f64 {
    row.iter()
        .zip(centroid)
        .map(|(&a, &b)| {
            let d = f64::from(a) - b;
            d * d
        })
        .sum()
}

fn row_f64(row: &[f32]) -> Vec<f64> {
    row.iter().map(|&v| f64::from(v)).collect()
}

/// Index and squared distance of the nearest centroid; ties go to the lower
/// index.
fn nearest(row: &[f32], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(features: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = features.n_rows();
    let dim = features.dim();
    let mut centroids = Vec::with_capacity(k * dim);
    centroids.extend(row_f64(features.row(rng.random_range(0..n))));
    let mut d2: Vec<f64> = features
        .rows()
        .map(|r| sq_dist(r, &centroids[0..dim]))
        .collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the running sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        let new = row_f64(features.row(pick));
        for (i, r) in features.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &new));
        }
        centroids.extend(new);
    }
    centroids
}

struct Lloyd<'a> {
    features: &'a FeatureMatrix,
    k: usize,
    dim: usize,
    centroids: Vec<f64>,
    assignments: Vec<usize>,
    dists: Vec<f64>,
}

impl Lloyd<'_> {
    fn assign(&mut self) {
        let centroids = &self.centroids;
        let dim = self.dim;
        let out: Vec<(usize, f64)> = (0..self.features.n_rows())
            .into_par_iter()
            .map(|i| nearest(self.features.row(i), centroids, dim))
            .collect();
        for (i, (c, d)) in out.into_iter().enumerate() {
            self.assignments[i] = c;
            self.dists[i] = d;
        }
    }

    fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &a in &self.assignments {
            counts[a] += 1;
        }
        counts
    }

    /// Moves the row farthest from its own centroid into each empty cluster,
    /// never emptying the donor cluster. Every move lowers WCSS (or leaves it
    /// unchanged).
    fn repair_empty(&mut self) {
        let mut counts = self.counts();
        for empty in 0..self.k {
            if counts[empty] > 0 {
                continue;
            }
            let donor = (0..self.assignments.len())
                .filter(|&i| counts[self.assignments[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if self.dists[b] >= self.dists[i] => Some(b),
                    _ => Some(i),
                });
            let Some(i) = donor else { continue };
            counts[self.assignments[i]] -= 1;
            counts[empty] = 1;
            self.assignments[i] = empty;
            self.dists[i] = 0.0;
            let row = row_f64(self.features.row(i));
            self.centroids[empty * self.dim..(empty + 1) * self.dim].copy_from_slice(&row);
        }
    }

    fn update_means(&mut self) {
        let mut sums = vec![0.0f64; self.k * self.dim];
        let counts = self.counts();
        for (row, &a) in self.features.rows().zip(&self.assignments) {
            for (s, &v) in sums[a * self.dim..(a + 1) * self.dim].iter_mut().zip(row) {
                *s += f64::from(v);
            }
        }
        for c in 0..self.k {
            if counts[c] == 0 {
                continue;
            }
            let n = counts[c] as f64;
            for (dst, s) in self.centroids[c * self.dim..(c + 1) * self.dim]
                .iter_mut()
                .zip(&sums[c * self.dim..(c + 1) * self.dim])
            {
                *dst = s / n;
            }
        }
    }

    fn wcss_against_centroids(&self) -> f64 {
        self.features
            .rows()
            .zip(&self.assignments)
            .map(|(r, &a)| sq_dist(r, &self.centroids[a * self.dim..(a + 1) * self.dim]))
            .sum()
    }
}

/// Lloyd's algorithm from a seeded k-means++ start.
///
/// Stops after `max_iter` iterations or once an iteration improves WCSS by
/// less than `tol` relative to the previous value. Clusters that go empty are
/// re-seeded with the row farthest from its centroid. The returned centroids
/// are the means of the final assignment and `wcss` is measured against them.
pub fn kmeans(features: &FeatureMatrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = features.n_rows();
    if cfg.k == 0 {
        return Err(Error::ZeroClasses);
    }
    if cfg.k > n {
        return Err(Error::TooManyClusters { k: cfg.k, n_rows: n });
    }
    if let Some(pos) = features.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature {
            row: pos / features.dim(),
            col: pos % features.dim(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = features.dim();
    let mut state = Lloyd {
        features,
        k: cfg.k,
        dim,
        centroids: kmeans_plus_plus(features, cfg.k, &mut rng),
        assignments: vec![0; n],
        dists: vec![0.0; n],
    };
    state.assign();
    state.repair_empty();
    let mut wcss = state.wcss_against_centroids();
    let mut history = vec![wcss];
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        state.update_means();
        state.assign();
        state.repair_empty();
        let next = state.wcss_against_centroids();
        history.push(next);
        let improvement = wcss - next;
        wcss = next;
        if wcss == 0.0 || improvement < cfg.tol * history[history.len() - 2] {
            break;
        }
    }

    state.update_means();
    let final_wcss = state.wcss_against_centroids();
    if final_wcss != wcss {
        history.push(final_wcss);
    }

    // drop clusters that could not be repaired (cannot happen while k <= n,
    // but the invariant is cheap to keep)
    let counts = state.counts();
    let mut remap = vec![usize::MAX; cfg.k];
    let mut next = 0;
    for c in 0..cfg.k {
        if counts[c] > 0 {
            remap[c] = next;
            next += 1;
        }
    }
    let assignments = state.assignments.iter().map(|&a| remap[a]).collect();
    let centroids = (0..cfg.k)
        .filter(|&c| counts[c] > 0)
        .flat_map(|c| state.centroids[c * dim..(c + 1) * dim].to_vec())
        .collect();

    Ok(KMeansResult {
        assignments,
        centroids,
        dim,
        wcss: final_wcss,
        iterations,
        wcss_history: history,
    })
}

/// Seed for restart `r` derived from a base seed (SplitMix64 step).
pub fn restart_seed(base: u64, r: u64) -> u64 {
    let mut z = base.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs [`kmeans`] `restarts` times with derived seeds and keeps the lowest
/// WCSS (earliest run on ties). Restart 0 uses `cfg.seed` itself.
pub fn kmeans_best_of(
    features: &FeatureMatrix,
    cfg: &KMeansConfig,
    restarts: usize,
) -> Result<KMeansResult> {
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts.max(1) {
        let seed = if r == 0 {
            cfg.seed
        } else {
            restart_seed(cfg.seed, r as u64)
        };
        let run = kmeans(features, &KMeansConfig { seed, ..*cfg })?;
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
