//! Empirical quantizers on a sample: Lloyd iteration, the exact 1-D k-means
//! optimum, and Monte Carlo distortion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sampling::{SampleBatch, CHUNK};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Sorted centers.
    pub centers: Vec<f64>,
    /// Mean squared distance from each sample to its nearest center.
    pub distortion: f64,
    pub iterations: usize,
}

fn sorted_values(batch: &SampleBatch) -> Vec<f64> {
    let mut xs = batch.values.clone();
    xs.sort_unstable_by(f64::total_cmp);
    xs
}

/// Start indices of each cell when the sorted sample is split at the midpoints
/// between consecutive (sorted) centers; `bounds[i]..bounds[i+1]` is cell `i`.
fn cell_bounds(xs: &[f64], centers: &[f64]) -> Vec<usize> {
    let mut bounds = Vec::with_capacity(centers.len() + 1);
    bounds.push(0);
    for pair in centers.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        bounds.push(xs.partition_point(|&x| x < mid));
    }
    bounds.push(xs.len());
    bounds
}

fn mean_sq_distance(xs: &[f64], centers: &[f64]) -> f64 {
    let bounds = cell_bounds(xs, centers);
    let total: f64 = centers
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            xs[bounds[i]..bounds[i + 1]]
                .iter()
                .map(|x| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum();
    total / xs.len() as f64
}

/// Lloyd's algorithm from `init` until every center moves less than `tol`, or
/// `max_iters` rounds. A center whose cell is empty is moved to the sample point
/// farthest from its own center.
pub fn lloyd(batch: &SampleBatch, init: &[f64], max_iters: usize, tol: f64) -> Result<Clustering> {
    let k = init.len();
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one center".into()));
    }
    if init
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidArgument(
            "initial centers must be strictly increasing".into(),
        ));
    }
    let xs = sorted_values(batch);
    let mut prefix = Vec::with_capacity(xs.len() + 1);
    prefix.push(0.0);
    for x in &xs {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mut centers = init.to_vec();
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let bounds = cell_bounds(&xs, &centers);
        let mut next = centers.clone();
        let mut empty = Vec::new();
        for i in 0..k {
            let (lo, hi) = (bounds[i], bounds[i + 1]);
            if lo == hi {
                empty.push(i);
            } else {
                next[i] = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            }
        }
        if !empty.is_empty() {
            // candidates: the extreme points of each nonempty cell, farthest first
            let mut far: Vec<(f64, f64)> = (0..k)
                .filter(|&i| bounds[i] < bounds[i + 1])
                .flat_map(|i| [xs[bounds[i]], xs[bounds[i + 1] - 1]].map(|x| ((x - centers[i]).abs(), x)))
                .collect();
            far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
            far.dedup_by(|a, b| a.1 == b.1);
            for (slot, &i) in empty.iter().enumerate() {
                if let Some(&(_, x)) = far.get(slot) {
                    next[i] = x;
                }
            }
            next.sort_by(f64::total_cmp);
        }
        let moved = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        centers = next;
        if empty.is_empty() && moved < tol {
            break;
        }
    }
    let distortion = mean_sq_distance(&xs, &centers);
    Ok(Clustering {
        centers,
        distortion,
        iterations,
    })
}

/// Globally optimal k-clustering of the sorted sample under squared error, by
/// dynamic programming over contiguous cells. Each layer is filled with the
/// divide-and-conquer rule, valid because optimal split points are monotone.
pub fn kmeans_1d_exact(batch: &SampleBatch, k: usize) -> Result<Clustering> {
    let n = batch.count();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= {n}, got k = {k}")));
    }
    let xs = sorted_values(batch);
    let shift = batch.mean();
    let mut p1 = Vec::with_capacity(n + 1);
    let mut p2 = Vec::with_capacity(n + 1);
    p1.push(0.0);
    p2.push(0.0);
    for &x in &xs {
        let y = x - shift;
        p1.push(p1.last().unwrap() + y);
        p2.push(p2.last().unwrap() + y * y);
    }
    let cost = |i: usize, j: usize| -> f64 {
        let s = p1[j] - p1[i];
        (p2[j] - p2[i] - s * s / (j - i) as f64).max(0.0)
    };

    // best[j]: optimal cost of the first j points with the current number of cells
    let mut best: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { cost(0, j) }).collect();
    let mut splits: Vec<Vec<u32>> = Vec::with_capacity(k.saturating_sub(1));
    for m in 2..=k {
        let mut next = vec![f64::INFINITY; n + 1];
        let mut arg = vec![0u32; n + 1];
        fill_layer(&best, &cost, &mut next, &mut arg, m, n, m - 1, n - 1);
        best = next;
        splits.push(arg);
    }

    let mut bounds = vec![n];
    let mut j = n;
    for arg in splits.iter().rev() {
        j = arg[j] as usize;
        bounds.push(j);
    }
    bounds.push(0);
    bounds.reverse();
    let centers: Vec<f64> = bounds
        .windows(2)
        .map(|w| xs[w[0]..w[1]].iter().sum::<f64>() / (w[1] - w[0]) as f64)
        .collect();
    let distortion = bounds
        .windows(2)
        .zip(&centers)
        .map(|(w, &c)| xs[w[0]..w[1]].iter().map(|x| (x - c) * (x - c)).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    Ok(Clustering {
        centers,
        distortion,
        iterations: 1,
    })
}

/// Fills `next[j]` for `j in lo..=hi` knowing the optimal split lies in `opt_lo..=opt_hi`.
#[allow(clippy::too_many_arguments)]
fn fill_layer<F: Fn(usize, usize) -> f64>(
    prev: &[f64],
    cost: &F,
    next: &mut [f64],
    arg: &mut [u32],
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_i = opt_lo;
    for (i, p) in prev.iter().enumerate().take(opt_hi.min(mid - 1) + 1).skip(opt_lo) {
        let c = p + cost(i, mid);
        if c < best {
            best = c;
            best_i = i;
        }
    }
    next[mid] = best;
    arg[mid] = best_i as u32;
    if mid > lo {
        fill_layer(prev, cost, next, arg, lo, mid - 1, opt_lo, best_i);
    }
    fill_layer(prev, cost, next, arg, mid + 1, hi, best_i, opt_hi);
}

/// Monte Carlo estimate of `∫ min_a (x − a)² dP` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

pub fn mc_distortion_estimate(batch: &SampleBatch, centers: &[f64]) -> Result<McEstimate> {
    if centers.is_empty() {
        return Err(Error::InvalidArgument("need at least one center".into()));
    }
    let mut cs = centers.to_vec();
    cs.sort_by(f64::total_cmp);
    let loss = |x: f64| -> f64 {
        let i = cs.partition_point(|&c| c < x);
        let mut d = f64::INFINITY;
        if i < cs.len() {
            d = d.min((cs[i] - x) * (cs[i] - x));
        }
        if i > 0 {
            d = d.min((cs[i - 1] - x) * (cs[i - 1] - x));
        }
        d
    };
    let partials: Vec<(f64, f64)> = batch
        .values
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk.iter().fold((0.0, 0.0), |(s, s2), &x| {
                let l = loss(x);
                (s + l, s2 + l * l)
            })
        })
        .collect();
    let (sum, sum2) = partials.iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = batch.count() as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
    })
}

pub fn mc_distortion(batch: &SampleBatch, centers: &[f64]) -> Result<f64> {
    Ok(mc_distortion_estimate(batch, centers)?.mean)
}

/// k-means++ seeding: the first center uniform over the sample, each further one
/// drawn with probability proportional to the squared distance to the nearest
/// center chosen so far. Returned sorted.
pub fn kmeans_pp_init<R: Rng + ?Sized>(batch: &SampleBatch, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    let xs = &batch.values;
    if k == 0 || k > xs.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= {}, got k = {k}",
            xs.len()
        )));
    }
    let mut centers = vec![xs[rng.random_range(0..xs.len())]];
    let mut d2: Vec<f64> = xs.iter().map(|x| (x - centers[0]) * (x - centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sample has fewer than {k} distinct values"
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = xs.len() - 1;
        for (i, d) in d2.iter().enumerate() {
            acc += d;
            if acc > target && *d > 0.0 {
                pick = i;
                break;
            }
        }
        let c = xs[pick];
        if d2[pick] == 0.0 {
            continue;
        }
        centers.push(c);
        for (d, x) in d2.iter_mut().zip(xs) {
            *d = d.min((x - c) * (x - c));
        }
    }
    centers.sort_by(f64::total_cmp);
    Ok(centers)
}

/// Lloyd from `restarts` k-means++ seeds (ChaCha8 seeded with `seed`); the run of
/// least distortion wins, earlier runs on ties.
pub fn lloyd_restarts(
    batch: &SampleBatch,
    k: usize,
    restarts: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<Clustering> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let init = kmeans_pp_init(batch, k, &mut rng)?;
        let run = lloyd(batch, &init, max_iters, tol)?;
        if best.as_ref().is_none_or(|b| run.distortion < b.distortion) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(values: Vec<f64>) -> SampleBatch {
        SampleBatch {
            values,
            seed: 0,
            depth: 0,
        }
    }

    /// O(k n²) reference DP.
    fn brute_kmeans(xs: &[f64], k: usize) -> f64 {
        let mut xs = xs.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let sse = |i: usize, j: usize| {
            let s = &xs[i..j];
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        };
        let mut d = vec![vec![f64::INFINITY; n + 1]; k + 1];
        d[0][0] = 0.0;
        for m in 1..=k {
            for j in m..=n {
                for i in m - 1..j {
                    let c = d[m - 1][i] + sse(i, j);
                    if c < d[m][j] {
                        d[m][j] = c;
                    }
                }
            }
        }
        d[k][n] / n as f64
    }

    #[test]
    fn single_cluster_is_mean() {
        let b = batch(vec![0.1, 0.5, 0.2, 0.9]);
        let r = kmeans_1d_exact(&b, 1).unwrap();
        assert!((r.centers[0] - b.mean()).abs() < 1e-15);
        assert!((r.distortion - b.variance()).abs() < 1e-15);
    }

    #[test]
    fn exact_kmeans_rejects_bad_k() {
        let b = batch(vec![0.1, 0.2]);
        assert!(kmeans_1d_exact(&b, 3).is_err());
        assert!(kmeans_1d_exact(&b, 0).is_err());
        let r = kmeans_1d_exact(&b, 2).unwrap();
        assert_eq!(r.centers, vec![0.1, 0.2]);
        assert_eq!(r.distortion, 0.0);
    }

    #[test]
    fn lloyd_reseeds_empty_cells() {
        // the middle center starts with no points
        let b = batch(vec![0.0, 0.01, 0.02, 0.98, 0.99, 1.0]);
        let r = lloyd(&b, &[0.0, 0.5, 0.51], 100, 1e-12).unwrap();
        assert_eq!(r.centers.len(), 3);
        assert!(r.distortion < 0.01, "{r:?}");
        assert!(lloyd(&b, &[0.5, 0.4], 10, 1e-9).is_err());
        assert!(lloyd(&b, &[], 10, 1e-9).is_err());
    }

    #[test]
    fn mc_distortion_of_known_points() {
        let b = batch(vec![0.0, 1.0]);
        assert_eq!(mc_distortion(&b, &[0.5]).unwrap(), 0.25);
        assert_eq!(mc_distortion(&b, &[1.0, 0.0]).unwrap(), 0.0);
        assert!(mc_distortion(&b, &[]).is_err());
    }

    #[test]
    fn plus_plus_seeds_distinct_points() {
        let b = batch(vec![0.0, 0.0, 0.0, 0.5, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(kmeans_pp_init(&b, 3, &mut rng).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(kmeans_pp_init(&batch(vec![0.3, 0.3]), 2, &mut rng).is_err());
        let r = lloyd_restarts(&b, 3, 4, 9, 100, 1e-12).unwrap();
        assert_eq!(r.distortion, 0.0);
        assert!(lloyd_restarts(&b, 3, 0, 9, 100, 1e-12).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_brute_force(xs in prop::collection::vec(0.0f64..1.0, 1..40), k in 1usize..6) {
            prop_assume!(k <= xs.len());
            let fast = kmeans_1d_exact(&batch(xs.clone()), k).unwrap();
            let slow = brute_kmeans(&xs, k);
            prop_assert!((fast.distortion - slow).abs() <= 1e-12 + 1e-9 * slow, "{} vs {}", fast.distortion, slow);
        }

        #[test]
        fn exact_never_worse_than_lloyd(xs in prop::collection::vec(0.0f64..1.0, 10..200), k in 1usize..5, seed in 0u64..1000) {
            let b = batch(xs);
            let mut init: Vec<f64> = (0..k).map(|i| ((i as f64 + 0.5) / k as f64 + seed as f64 * 1e-4) % 1.0).collect();
            init.sort_by(f64::total_cmp);
            init.dedup();
            prop_assume!(init.len() == k);
            let local = lloyd(&b, &init, 500, 1e-12).unwrap();
            let global = kmeans_1d_exact(&b, k).unwrap();
            prop_assert!(global.distortion <= local.distortion + 1e-12);
        }
    }
}
