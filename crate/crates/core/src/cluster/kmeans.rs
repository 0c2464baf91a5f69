//! Lloyd's algorithm with k-means++ seeding.

use ndarray::{Array2, ArrayView1, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusterAssignment, ClusterError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KmeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the summed squared centroid shift falls below this.
    pub tol: f64,
    /// Independent restarts; the lowest final inertia wins.
    pub n_init: usize,
    /// Scale every row to unit length before clustering.
    pub normalize: bool,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            k: 8,
            seed: 0,
            max_iter: 300,
            tol: 1e-8,
            n_init: 10,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration of the winning run.
    pub history: Vec<f64>,
    pub iterations: usize,
}

impl KmeansResult {
    pub fn into_assignment(self, doc_ids: Vec<String>, model_tag: &str) -> Result<ClusterAssignment, ClusterError> {
        let k = self.centroids.nrows();
        ClusterAssignment::new(doc_ids, self.labels, k, model_tag, Some(self.centroids))
    }
}

pub fn normalize_rows(points: &Array2<f64>) -> Array2<f64> {
    let mut out = points.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.axis_iter(Axis(0)).enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every remaining point coincides with a centre
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select(Axis(0), &chosen)
}

fn lloyd(points: &Array2<f64>, cfg: &KmeansConfig, rng: &mut ChaCha8Rng) -> KmeansResult {
    let (n, dim) = points.dim();
    let k = cfg.k;
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![0usize; n];
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        let nearest_all: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| nearest(points.row(i), &centroids))
            .collect();
        let mut dists: Vec<f64> = Vec::with_capacity(n);
        for (i, (l, d)) in nearest_all.into_iter().enumerate() {
            labels[i] = l;
            dists.push(d);
        }

        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        // reseed each empty cluster at the point farthest from its centre
        for j in 0..k {
            if sizes[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                sizes[labels[i]] -= 1;
                labels[i] = j;
                sizes[j] = 1;
                dists[i] = 0.0;
            }
        }

        let mut sums = Array2::<f64>::zeros((k, dim));
        for (i, &l) in labels.iter().enumerate() {
            let mut row = sums.row_mut(l);
            row += &points.row(i);
        }
        let mut shift = 0.0;
        for j in 0..k {
            if sizes[j] == 0 {
                continue;
            }
            let mean = sums.row(j).mapv(|v| v / sizes[j] as f64);
            shift += sq_dist(mean.view(), centroids.row(j));
            centroids.row_mut(j).assign(&mean);
        }

        let inertia: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| sq_dist(points.row(i), centroids.row(l)))
            .sum();
        if let Some(&prev) = history.last() {
            assert!(
                inertia <= prev + 1e-9 * prev.abs().max(1.0),
                "k-means inertia increased from {prev} to {inertia}"
            );
        }
        history.push(inertia);
        if shift <= cfg.tol {
            break;
        }
    }

    // final labels consistent with final centroids
    for (i, l) in labels.iter_mut().enumerate() {
        let (best, d) = nearest(points.row(i), &centroids);
        if d < sq_dist(points.row(i), centroids.row(*l)) {
            *l = best;
        }
    }
    let inertia = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points.row(i), centroids.row(l)))
        .sum();
    KmeansResult {
        labels,
        centroids,
        inertia,
        history,
        iterations,
    }
}

pub fn kmeans(points: &Array2<f64>, cfg: &KmeansConfig) -> Result<KmeansResult, ClusterError> {
    let rows = points.nrows();
    if cfg.k == 0 || cfg.k > rows {
        return Err(ClusterError::InvalidK { k: cfg.k, rows });
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::InvalidParameter("points must be finite".into()));
    }
    let owned;
    let data = if cfg.normalize {
        owned = normalize_rows(points);
        &owned
    } else {
        points
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KmeansResult> = None;
    for _ in 0..cfg.n_init.max(1) {
        let run = lloyd(data, cfg, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}
