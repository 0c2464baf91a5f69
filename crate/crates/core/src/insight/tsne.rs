//! Exact t-SNE with per-point perplexity calibration.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InsightError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub doc_ids: Vec<String>,
    pub coordinates: Array2<f64>,
    /// Perplexity actually used, after any shrinking.
    pub perplexity: f64,
    pub iterations: usize,
    pub final_kl: f64,
    /// `(iteration, KL)` every 10 iterations.
    pub kl_history: Vec<(usize, f64)>,
}

const KL_EVERY: usize = 10;
const MIN_P: f64 = 1e-12;

fn squared_distances(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Conditional affinities of one point with entropy `ln(perplexity)`.
fn calibrate_row(dist: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let (mut beta, mut lo, mut hi) = (1.0f64, 0.0f64, f64::INFINITY);
    let mut p = vec![0.0; dist.len()];
    for _ in 0..100 {
        // shift by the nearest neighbour distance for numerical range
        let min_d = dist
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        let mut sum = 0.0;
        for (j, (pj, &d)) in p.iter_mut().zip(dist).enumerate() {
            *pj = if j == i { 0.0 } else { (-(d - min_d) * beta).exp() };
            sum += *pj;
        }
        let mut h = 0.0;
        for (pj, &d) in p.iter_mut().zip(dist) {
            *pj /= sum;
            h += beta * (d - min_d) * *pj;
        }
        let entropy = sum.ln() + h;
        let diff = entropy - target;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    p
}

fn joint_affinities(x: &Array2<f64>, perplexity: f64) -> Array2<f64> {
    let n = x.nrows();
    let d = squared_distances(x);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| calibrate_row(d.row(i).as_slice().expect("contiguous"), i, perplexity))
        .collect();
    let mut p = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[[i, j]] = ((rows[i][j] + rows[j][i]) / (2.0 * n as f64)).max(MIN_P);
            }
        }
    }
    p
}

fn student_kernel(y: &Array2<f64>) -> (Array2<f64>, f64) {
    let n = y.nrows();
    let mut num = Array2::zeros((n, n));
    let mut z = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = y[[i, 0]] - y[[j, 0]];
            let dy = y[[i, 1]] - y[[j, 1]];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[[i, j]] = v;
            num[[j, i]] = v;
            z += 2.0 * v;
        }
    }
    (num, z)
}

fn kl_divergence(p: &Array2<f64>, num: &Array2<f64>, z: f64) -> f64 {
    let n = p.nrows();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = (num[[i, j]] / z).max(MIN_P);
                kl += p[[i, j]] * (p[[i, j]] / q).ln();
            }
        }
    }
    kl.max(0.0)
}

pub fn tsne(vectors: &Array2<f64>, doc_ids: &[String], cfg: &TsneConfig) -> Result<Projection2D, InsightError> {
    if vectors.iter().any(|v| !v.is_finite()) {
        return Err(InsightError::NonFinite);
    }
    let n = vectors.nrows();
    if n < 2 {
        return Ok(Projection2D {
            doc_ids: doc_ids.to_vec(),
            coordinates: Array2::zeros((n, 2)),
            perplexity: cfg.perplexity,
            iterations: 0,
            final_kl: 0.0,
            kl_history: Vec::new(),
        });
    }
    let mut perplexity = cfg.perplexity;
    if (n as f64) < 3.0 * perplexity {
        perplexity = ((n - 1) as f64 / 3.0).max(1.0);
        log::warn!("{n} points are too few for perplexity {}; using {perplexity:.3}", cfg.perplexity);
    }
    let p = joint_affinities(vectors, perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y = Array2::from_shape_fn((n, 2), |_| init.sample(&mut rng));
    let mut update = Array2::<f64>::zeros((n, 2));
    let mut gains = Array2::<f64>::ones((n, 2));
    let mut grad = Array2::<f64>::zeros((n, 2));
    let mut kl_history = Vec::new();

    for it in 0..cfg.iterations {
        let exaggerating = it < cfg.exaggeration_iters;
        let exag = if exaggerating { cfg.early_exaggeration } else { 1.0 };
        let momentum = if exaggerating { 0.5 } else { 0.8 };
        let (num, z) = student_kernel(&y);

        grad.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let coeff = 4.0 * (exag * p[[i, j]] - num[[i, j]] / z) * num[[i, j]];
                grad[[i, 0]] += coeff * (y[[i, 0]] - y[[j, 0]]);
                grad[[i, 1]] += coeff * (y[[i, 1]] - y[[j, 1]]);
            }
        }
        for ((g, u), gain) in grad.iter().zip(update.iter_mut()).zip(gains.iter_mut()) {
            *gain = if (*g > 0.0) != (*u > 0.0) { *gain + 0.2 } else { *gain * 0.8 }.max(0.01);
            *u = momentum * *u - cfg.learning_rate * *gain * g;
        }
        y += &update;
        let mean = y.mean_axis(ndarray::Axis(0)).expect("nonempty");
        y -= &mean;

        if (it + 1) % KL_EVERY == 0 {
            let (num, z) = student_kernel(&y);
            kl_history.push((it + 1, kl_divergence(&p, &num, z)));
        }
    }
    let (num, z) = student_kernel(&y);
    let final_kl = kl_divergence(&p, &num, z);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(InsightError::NonFinite);
    }
    Ok(Projection2D {
        doc_ids: doc_ids.to_vec(),
        coordinates: y,
        perplexity,
        iterations: cfg.iterations,
        final_kl,
        kl_history,
    })
}
