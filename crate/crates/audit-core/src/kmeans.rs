//! Seeded K-means over Lab pixels (Lloyd's algorithm, k-means++ init,
//! multiple restarts) and dominant-cluster selection by maximal L*.
//!
//! Clustering runs in Lab space because the dominant-cluster criterion is
//! lightness, which is the L* axis.

use crate::color::LabColor;
use crate::seed::{derive_seed, stream_rng};
use rand::Rng;
use thiserror::Error;

const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum KmeansError {
    #[error("empty pixel set")]
    EmptyPixelSet,
    #[error("k must be >= 1")]
    ZeroClusters,
}

fn dist_sq(a: LabColor, b: LabColor) -> f64 {
    let dl = a.l_star - b.l_star;
    let da = a.a_star - b.a_star;
    let db = a.b_star - b.b_star;
    dl * dl + da * da + db * db
}

fn mean_of(points: &[LabColor], indices: &[usize]) -> LabColor {
    let n = indices.len() as f64;
    let mut sum = [0.0f64; 3];
    for &i in indices {
        sum[0] += points[i].l_star;
        sum[1] += points[i].a_star;
        sum[2] += points[i].b_star;
    }
    LabColor {
        l_star: sum[0] / n,
        a_star: sum[1] / n,
        b_star: sum[2] / n,
    }
}

/// Result of one clustering run: centroids with their assigned point
/// indices; clusters that ended up empty are dropped.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub centroids: Vec<LabColor>,
    pub assignments: Vec<Vec<usize>>,
}

impl Clustering {
    /// Index of the centroid with maximal L*.
    pub fn dominant(&self) -> usize {
        self.centroids
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.l_star.total_cmp(&b.l_star))
            .map(|(i, _)| i)
            .expect("clustering has at least one cluster")
    }
}

fn kmeans_pp_init(points: &[LabColor], k: usize, seed: u64) -> Vec<LabColor> {
    let mut rng = stream_rng(seed, &[points.len() as u64, k as u64]);
    let mut centroids = vec![points[rng.gen_range(0..points.len())]];
    let mut dists: Vec<f64> = points.iter().map(|&p| dist_sq(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dists.iter().sum();
        if total == 0.0 {
            break; // all remaining points coincide with a centroid
        }
        let mut target = rng.gen_range(0.0..total);
        let mut chosen = points.len() - 1;
        for (i, &d) in dists.iter().enumerate() {
            if target < d {
                chosen = i;
                break;
            }
            target -= d;
        }
        let c = points[chosen];
        centroids.push(c);
        for (d, &p) in dists.iter_mut().zip(points.iter()) {
            *d = d.min(dist_sq(p, c));
        }
    }
    centroids
}

fn lloyd(points: &[LabColor], mut centroids: Vec<LabColor>, max_iters: usize) -> (Clustering, f64) {
    let k = centroids.len();
    let mut assignment = vec![0usize; points.len()];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (slot, &p) in assignment.iter_mut().zip(points.iter()) {
            let mut best = 0usize;
            let mut best_d = dist_sq(p, centroids[0]);
            for (j, &c) in centroids.iter().enumerate().skip(1) {
                let d = dist_sq(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &a) in assignment.iter().enumerate() {
            groups[a].push(i);
        }
        for (j, group) in groups.iter().enumerate() {
            if !group.is_empty() {
                centroids[j] = mean_of(points, group);
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        groups[a].push(i);
    }
    let mut inertia = 0.0;
    for (i, &a) in assignment.iter().enumerate() {
        inertia += dist_sq(points[i], centroids[a]);
    }
    let (centroids, assignments): (Vec<_>, Vec<_>) = centroids
        .into_iter()
        .zip(groups)
        .filter(|(_, g)| !g.is_empty())
        .unzip();
    (
        Clustering {
            centroids,
            assignments,
        },
        inertia,
    )
}

/// Full clustering with restarts; the lowest-inertia run wins (ties go to
/// the earliest restart). Deterministic per seed.
pub fn cluster_pixels(
    pixels: &[LabColor],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Clustering, KmeansError> {
    if pixels.is_empty() {
        return Err(KmeansError::EmptyPixelSet);
    }
    if k == 0 {
        return Err(KmeansError::ZeroClusters);
    }
    let k_eff = k.min(pixels.len());
    let mut best: Option<(Clustering, f64)> = None;
    for restart in 0..DEFAULT_RESTARTS {
        let init = kmeans_pp_init(pixels, k_eff, derive_seed(seed, &[restart as u64]));
        let (clustering, inertia) = lloyd(pixels, init, max_iters);
        if best.as_ref().is_none_or(|(_, bi)| inertia < *bi) {
            best = Some((clustering, inertia));
        }
    }
    Ok(best.expect("at least one restart ran").0)
}

/// Runs K-means and returns the centroid with maximal L*. With fewer pixels
/// than k the degenerate clusters are dropped before selection.
pub fn kmeans_dominant_cluster(
    pixels: &[LabColor],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<LabColor, KmeansError> {
    let clustering = cluster_pixels(pixels, k, seed, max_iters)?;
    Ok(clustering.centroids[clustering.dominant()])
}
