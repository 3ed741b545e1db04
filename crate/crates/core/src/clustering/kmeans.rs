use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, KMEANS_STREAM_BASE};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 300;
const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Labels in `0..k`, numbered by first appearance.
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub seed: u64,
    /// Restart that produced this assignment.
    pub restart: usize,
    pub iterations: usize,
    /// Inertia after each assignment step of the winning restart.
    pub history: Vec<f64>,
}

impl ClusterAssignment {
    /// CSV `index,label`.
    pub fn to_csv(&self) -> String {
        labels_to_csv(&self.labels)
    }
}

pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut out = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding on the rows of the row-major
/// `n × r` matrix `data`; best of [`KMEANS_RESTARTS`] by inertia.
pub fn kmeans(data: &[f64], r: usize, k: usize, seed: u64, max_iter: usize) -> Result<ClusterAssignment> {
    if r == 0 || data.len() % r != 0 {
        return Err(Error::InvalidParameter(format!(
            "embedding of length {} is not a multiple of r = {r}",
            data.len()
        )));
    }
    let n = data.len() / r;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={n}")));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("embedding has non-finite entries".into()));
    }
    let runs: Vec<Option<ClusterAssignment>> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|restart| lloyd(data, n, r, k, seed, restart, max_iter))
        .collect();
    runs.into_iter()
        .flatten()
        .min_by(|a, b| a.inertia.total_cmp(&b.inertia).then(a.restart.cmp(&b.restart)))
        .ok_or(Error::EmptyCluster)
}

fn lloyd(data: &[f64], n: usize, r: usize, k: usize, seed: u64, restart: usize, max_iter: usize) -> Option<ClusterAssignment> {
    let row = |i: usize| &data[i * r..(i + 1) * r];
    let mut rng = stream(seed, KMEANS_STREAM_BASE + restart as u64);

    // k-means++
    let mut centers: Vec<f64> = Vec::with_capacity(k * r);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq(row(i), row(first))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.extend_from_slice(row(pick));
        for i in 0..n {
            d2[i] = d2[i].min(sq(row(i), row(pick)));
        }
    }

    let mut labels = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut inertia = 0.0;
        for i in 0..n {
            let mut best = (f64::INFINITY, 0);
            for c in 0..k {
                let d = sq(row(i), &centers[c * r..(c + 1) * r]);
                if d < best.0 {
                    best = (d, c);
                }
            }
            labels[i] = best.1;
            inertia += best.0;
        }
        history.push(inertia);
        let mut sums = vec![0.0; k * r];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for t in 0..r {
                sums[labels[i] * r + t] += data[i * r + t];
            }
        }
        if counts.contains(&0) {
            return None;
        }
        let mut drift = 0.0f64;
        for c in 0..k {
            for t in 0..r {
                let v = sums[c * r + t] / counts[c] as f64;
                drift = drift.max((v - centers[c * r + t]).abs());
                centers[c * r + t] = v;
            }
        }
        if drift < DRIFT_TOL || iterations >= max_iter {
            break;
        }
    }
    // final inertia against the updated centers
    let inertia: f64 = (0..n).map(|i| sq(row(i), &centers[labels[i] * r..(labels[i] + 1) * r])).sum();
    Some(ClusterAssignment {
        labels: canonical_labels(&labels),
        inertia,
        seed,
        restart,
        iterations,
        history,
    })
}

/// Renumbers labels in order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_blobs() {
        let data: Vec<f64> = (0..20)
            .map(|i| if i < 10 { i as f64 * 0.01 } else { 5.0 + i as f64 * 0.01 })
            .collect();
        let a = kmeans(&data, 1, 2, 3, KMEANS_MAX_ITER).unwrap();
        assert!(a.labels[..10].iter().all(|&l| l == 0));
        assert!(a.labels[10..].iter().all(|&l| l == 1));
        assert!(a.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(a, kmeans(&data, 1, 2, 3, KMEANS_MAX_ITER).unwrap());
    }

    #[test]
    fn single_cluster_and_singletons() {
        let data = [0.0, 1.0, 2.0, 5.0, 3.0, -1.0];
        let one = kmeans(&data, 2, 1, 0, KMEANS_MAX_ITER).unwrap();
        assert!(one.labels.iter().all(|&l| l == 0));
        // total variance about the mean (5/3, 5/3)
        let m = 5.0 / 3.0;
        let tv: f64 = data.iter().map(|x| (x - m) * (x - m)).sum();
        assert!((one.inertia - tv).abs() < 1e-12);
        let all = kmeans(&data, 2, 3, 0, KMEANS_MAX_ITER).unwrap();
        assert_eq!(all.inertia, 0.0);
        assert_eq!(all.labels, vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_points_exhaust_restarts() {
        let data = [1.0; 8];
        assert_eq!(kmeans(&data, 1, 2, 0, KMEANS_MAX_ITER), Err(Error::EmptyCluster));
        assert!(kmeans(&data, 1, 9, 0, KMEANS_MAX_ITER).is_err());
        assert!(kmeans(&data, 3, 1, 0, KMEANS_MAX_ITER).is_err());
    }

    #[test]
    fn inertia_history_is_monotone() {
        let mut rng = crate::rng::stream(4, 0);
        let data: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
        let a = kmeans(&data, 3, 5, 9, KMEANS_MAX_ITER).unwrap();
        assert!(a.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!(a.inertia <= *a.history.last().unwrap() + 1e-12);
    }
}
