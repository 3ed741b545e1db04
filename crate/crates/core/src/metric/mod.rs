//! Discrete p-weighted Fermat distances.
//!
//! The cost of a path `x_0, …, x_K` is `Σ ‖x_{k+1} − x_k‖^p`; the Fermat
//! distance `ℓ_p^p` between two points is the least cost over all paths
//! through the cloud. Values are stored as these p-th power sums.

pub(crate) mod dijkstra;
mod grid;
mod matrix;

pub(crate) use grid::SpatialGrid;
pub use matrix::{DistanceMatrix, Storage};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SparseWeightedGraph;
use crate::sampling::PointCloud;
use dijkstra::{dijkstra_dense, dijkstra_heap};

/// Default size cap for all-pairs computations.
pub const DEFAULT_PAIRWISE_CAP: usize = 20_000;

/// Largest cloud for which a dense cost table is precomputed.
const COST_TABLE_MAX: usize = 3000;

/// How paths are restricted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FermatMode {
    /// All paths through the complete graph.
    Exact,
    /// Paths on the symmetrized k-nearest-neighbor graph.
    Knn(usize),
    /// k-NN with `k = ⌈2 ln n⌉`, doubled once if the graph is disconnected.
    KnnAuto,
    /// Exact for every pair with `ℓ_p^p ≤ cutoff`; larger values are not
    /// computed. Any path of cost at most `cutoff` only uses hops of length
    /// at most `cutoff^{1/p}`, so a radius graph loses nothing below it.
    Within(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermatParams {
    pub p: f64,
    /// Intrinsic dimension used by the normalization.
    pub m: usize,
    pub mode: FermatMode,
}

impl FermatParams {
    pub fn exact(p: f64, m: usize) -> Self {
        FermatParams {
            p,
            m,
            mode: FermatMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {}", self.p)));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("intrinsic dimension must be >= 1".into()));
        }
        match self.mode {
            FermatMode::Knn(0) => Err(Error::InvalidParameter("k must be >= 1".into())),
            FermatMode::Within(c) if !(c > 0.0) => {
                Err(Error::InvalidParameter(format!("cutoff must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

/// `‖a − b‖^p` without a square root for the common exponents.
#[inline]
pub(crate) fn hop_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if p == 2.0 {
        s
    } else if p == 1.0 {
        s.sqrt()
    } else {
        s.powf(0.5 * p)
    }
}

/// Default neighbor count `⌈2 ln n⌉`, clamped to `[1, n − 1]`.
pub fn default_k(n: usize) -> usize {
    ((2.0 * (n as f64).ln()).ceil() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Symmetrized k-NN graph: `i ~ j` when either lists the other. Weights are
/// Euclidean lengths. Brute force for `n ≤ 2000`, bucket grid above.
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Result<SparseWeightedGraph> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..{n}")));
    }
    let lists = knn_lists(cloud, k);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, list) in lists.iter().enumerate() {
        for &(j, d) in list {
            rows[i].push((j, d));
            rows[j].push((i, d));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|e| e.0);
        row.dedup_by_key(|e| e.0);
    }
    Ok(SparseWeightedGraph::from_sorted_rows(rows, false))
}

/// Per-point neighbor lists ordered by `(distance, index)`.
pub(crate) fn knn_lists(cloud: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = cloud.len();
    if n <= 2000 {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut all: Vec<(usize, f64)> =
                    (0..n).filter(|&j| j != i).map(|j| (j, cloud.dist(i, j))).collect();
                let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
                if k < all.len() {
                    all.select_nth_unstable_by(k - 1, cmp);
                    all.truncate(k);
                }
                all.sort_by(cmp);
                all
            })
            .collect()
    } else {
        let grid = SpatialGrid::new(cloud, typical_spacing(cloud, k));
        (0..n).into_par_iter().map(|i| grid.knn(i, k)).collect()
    }
}

/// Side length that puts about `k` points in a cell of the leading axes.
fn typical_spacing(cloud: &PointCloud, k: usize) -> f64 {
    let axes = cloud.dim().min(3);
    let mut vol = 1.0;
    for a in 0..axes {
        let (lo, hi) = cloud
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[a]), h.max(p[a])));
        vol *= (hi - lo).max(1e-12);
    }
    (vol * k as f64 / cloud.len() as f64).powf(1.0 / axes as f64)
}

/// Prepared search structure shared by all sources of one cloud.
enum Engine<'a> {
    /// `p = 1`: the direct hop is optimal, so `ℓ_1` is the Euclidean distance.
    Direct { cloud: &'a PointCloud, cutoff: f64 },
    Dense { cloud: &'a PointCloud, p: f64, table: Option<Vec<f64>> },
    Graph { adj: Vec<Vec<(usize, f64)>> },
    Radius { cloud: &'a PointCloud, p: f64, cutoff: f64, grid: SpatialGrid<'a> },
    /// Radius graph with its edge lists built once, for many sources.
    RadiusLists { adj: Vec<Vec<(usize, f64)>>, cutoff: f64 },
}

/// Largest number of stored radius-graph edges.
const RADIUS_LIST_MAX_EDGES: usize = 50_000_000;

impl<'a> Engine<'a> {
    fn build(cloud: &'a PointCloud, params: &FermatParams, want_table: bool) -> Result<Self> {
        let n = cloud.len();
        let p = params.p;
        match params.mode {
            FermatMode::Exact if p == 1.0 => Ok(Engine::Direct {
                cloud,
                cutoff: f64::INFINITY,
            }),
            FermatMode::Within(cutoff) if p == 1.0 => Ok(Engine::Direct { cloud, cutoff }),
            FermatMode::Exact => {
                let table = (want_table && n <= COST_TABLE_MAX).then(|| {
                    let mut t = vec![0.0; n * n];
                    for i in 0..n {
                        for j in 0..i {
                            let c = hop_cost(cloud.point(i), cloud.point(j), p);
                            t[i * n + j] = c;
                            t[j * n + i] = c;
                        }
                    }
                    t
                });
                Ok(Engine::Dense { cloud, p, table })
            }
            FermatMode::Knn(k) => {
                let engine = Self::knn_engine(cloud, k.min(n - 1), p)?;
                check_connected(&engine, n)?;
                Ok(engine)
            }
            FermatMode::KnnAuto => {
                let k = default_k(n);
                let engine = Self::knn_engine(cloud, k, p)?;
                match check_connected(&engine, n) {
                    Ok(()) => Ok(engine),
                    Err(_) => {
                        let engine = Self::knn_engine(cloud, (2 * k).min(n - 1), p)?;
                        check_connected(&engine, n)?;
                        Ok(engine)
                    }
                }
            }
            FermatMode::Within(cutoff) => {
                let r = cutoff.powf(1.0 / p);
                let grid = SpatialGrid::new(cloud, r);
                if want_table {
                    let counts: usize = (0..n.min(64))
                        .map(|i| {
                            let mut buf = Vec::new();
                            grid.within(cloud.point(i * n / n.min(64)), r, &mut buf);
                            buf.len()
                        })
                        .sum();
                    let estimate = counts * n / n.min(64);
                    if estimate <= RADIUS_LIST_MAX_EDGES {
                        let adj = (0..n)
                            .into_par_iter()
                            .map(|u| {
                                let mut buf = Vec::new();
                                grid.within(cloud.point(u), r, &mut buf);
                                buf.iter()
                                    .filter(|&&(v, _)| v != u)
                                    .map(|&(v, d)| (v, pow_len(d, p)))
                                    .collect()
                            })
                            .collect();
                        return Ok(Engine::RadiusLists { adj, cutoff });
                    }
                }
                Ok(Engine::Radius { cloud, p, cutoff, grid })
            }
        }
    }

    fn knn_engine(cloud: &PointCloud, k: usize, p: f64) -> Result<Self> {
        let g = knn_graph(cloud, k)?;
        let adj = (0..g.n())
            .map(|i| g.row(i).map(|(j, d)| (j, d.powf(p))).collect())
            .collect();
        Ok(Engine::Graph { adj })
    }

    fn sssp(&self, source: usize) -> Vec<f64> {
        match self {
            Engine::Direct { cloud, cutoff } => (0..cloud.len())
                .map(|j| {
                    let d = cloud.dist(source, j);
                    if d <= *cutoff {
                        d
                    } else {
                        f64::INFINITY
                    }
                })
                .collect(),
            Engine::Dense { cloud, p, table } => {
                let n = cloud.len();
                match table {
                    Some(t) => dijkstra_dense(n, source, |u, v| t[u * n + v]),
                    None => dijkstra_dense(n, source, |u, v| hop_cost(cloud.point(u), cloud.point(v), *p)),
                }
            }
            Engine::Graph { adj } => dijkstra_heap(adj.len(), source, f64::INFINITY, |u, push| {
                for &(v, w) in &adj[u] {
                    push(v, w);
                }
            }),
            Engine::RadiusLists { adj, cutoff } => dijkstra_heap(adj.len(), source, *cutoff, |u, push| {
                for &(v, w) in &adj[u] {
                    push(v, w);
                }
            }),
            Engine::Radius { cloud, p, cutoff, grid } => {
                let r = cutoff.powf(1.0 / p);
                let mut buf = Vec::new();
                dijkstra_heap(cloud.len(), source, *cutoff, |u, push| {
                    grid.within(cloud.point(u), r, &mut buf);
                    for &(v, d) in &buf {
                        if v != u {
                            push(v, pow_len(d, *p));
                        }
                    }
                })
            }
        }
    }
}

fn pow_len(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

fn check_connected(engine: &Engine, n: usize) -> Result<()> {
    let dist = engine.sssp(0);
    match dist.iter().position(|d| d.is_infinite()) {
        Some(u) => Err(Error::DisconnectedGraph {
            source_node: 0,
            unreachable: u,
        }),
        None => {
            debug_assert_eq!(dist.len(), n);
            Ok(())
        }
    }
}

fn check_cloud(cloud: &PointCloud, params: &FermatParams) -> Result<()> {
    params.validate()?;
    if cloud.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fermat distances need at least 2 points, got {}",
            cloud.len()
        )));
    }
    Ok(())
}

/// `ℓ_p^p` from `source` to every point.
///
/// In `Within(c)` mode targets beyond `c` are reported as infinity. In k-NN
/// modes an unreachable target is an error.
pub fn fermat_sssp(cloud: &PointCloud, params: &FermatParams, source: usize) -> Result<Vec<f64>> {
    check_cloud(cloud, params)?;
    if source >= cloud.len() {
        return Err(Error::InvalidParameter(format!("source {source} out of range")));
    }
    let engine = Engine::build(cloud, params, false)?;
    let dist = engine.sssp(source);
    if !matches!(params.mode, FermatMode::Within(_)) {
        if let Some(u) = dist.iter().position(|d| d.is_infinite()) {
            return Err(Error::DisconnectedGraph {
                source_node: source,
                unreachable: u,
            });
        }
    }
    Ok(dist)
}

/// `ℓ_p^p` from an arbitrary point `x` (not necessarily in the cloud) to every
/// cloud point, with `x` added to the vertex set.
pub fn fermat_sssp_from(cloud: &PointCloud, params: &FermatParams, x: &[f64]) -> Result<Vec<f64>> {
    let aug = cloud.with_point(x)?;
    let n = cloud.len();
    let mut d = fermat_sssp(&aug, params, n)?;
    d.truncate(n);
    Ok(d)
}

/// All-pairs `ℓ_p^p`, one Dijkstra per source (in parallel), symmetrized by
/// taking the smaller of the two directed results.
pub fn fermat_pairwise(cloud: &PointCloud, params: &FermatParams) -> Result<DistanceMatrix> {
    fermat_pairwise_capped(cloud, params, DEFAULT_PAIRWISE_CAP)
}

pub fn fermat_pairwise_capped(cloud: &PointCloud, params: &FermatParams, cap: usize) -> Result<DistanceMatrix> {
    check_cloud(cloud, params)?;
    let n = cloud.len();
    if n > cap {
        return Err(Error::SizeCapExceeded { n, cap });
    }
    let engine = Engine::build(cloud, params, true)?;
    match params.mode {
        FermatMode::Within(cutoff) => {
            let rows: Vec<Vec<(usize, f64)>> = (0..n)
                .into_par_iter()
                .map(|s| {
                    engine
                        .sssp(s)
                        .into_iter()
                        .enumerate()
                        .filter(|(_, d)| d.is_finite())
                        .collect()
                })
                .collect();
            Ok(DistanceMatrix::sparse_from_rows(rows, params.p, params.m, cutoff))
        }
        _ => {
            let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| engine.sssp(s)).collect();
            let mut values = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    let v = rows[i][j].min(rows[j][i]);
                    values[i * n + j] = v;
                    values[j * n + i] = v;
                }
            }
            Ok(DistanceMatrix::dense(n, values, params.p, params.m))
        }
    }
}

/// Multiplies `ℓ_p^p` by `n^{(p−1)/m}` so that it converges as `n → ∞`.
pub fn normalize_fermat(dm: &DistanceMatrix, n: usize, params: &FermatParams) -> Result<DistanceMatrix> {
    if dm.normalized {
        return Err(Error::DoubleNormalization);
    }
    let factor = (n as f64).powf((params.p - 1.0) / params.m as f64);
    let mut out = dm.scaled(factor);
    out.normalized = true;
    Ok(out)
}

/// The factor `n^{(p−1)/m}`.
pub fn normalization_factor(n: usize, p: f64, m: usize) -> f64 {
    (n as f64).powf((p - 1.0) / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_iid, DensityModel, Domain};

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), 1).unwrap()
    }

    fn uniform(n: usize, seed: u64) -> PointCloud {
        sample_iid(&DensityModel::uniform(Domain::unit_square()).unwrap(), n, seed).unwrap()
    }

    #[test]
    fn midpoint_halves_the_square_cost() {
        let c = line(&[0.0, 0.5, 1.0]);
        let d = fermat_sssp(&c, &FermatParams::exact(2.0, 1), 0).unwrap();
        assert!((d[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn detour_wins_for_p3() {
        let c = PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.3]], 2).unwrap();
        let d = fermat_sssp(&c, &FermatParams::exact(3.0, 2), 0).unwrap();
        let detour = 2.0 * 0.34f64.powf(1.5);
        assert!((d[1] - detour).abs() < 1e-12);
        assert!((d[1] - 0.396505).abs() < 1e-6);
    }

    #[test]
    fn p1_is_euclidean() {
        let c = uniform(60, 2);
        let dm = fermat_pairwise(&c, &FermatParams::exact(1.0, 2)).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                assert!((dm.get(i, j) - c.dist(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_points() {
        let c = line(&[0.0, 0.3]);
        let dm = fermat_pairwise(&c, &FermatParams::exact(2.5, 1)).unwrap();
        assert_eq!(dm.get(0, 1), 0.3f64.powf(2.5));
        assert_eq!(dm.get(0, 0), 0.0);
    }

    #[test]
    fn within_mode_is_exact_below_cutoff() {
        let c = uniform(300, 9);
        let exact = fermat_pairwise(&c, &FermatParams::exact(2.0, 2)).unwrap();
        let cutoff = 0.02;
        let pruned = fermat_pairwise(
            &c,
            &FermatParams {
                p: 2.0,
                m: 2,
                mode: FermatMode::Within(cutoff),
            },
        )
        .unwrap();
        for i in 0..300 {
            for j in 0..300 {
                let e = exact.get(i, j);
                let g = pruned.get(i, j);
                if e <= cutoff {
                    assert!((e - g).abs() < 1e-15, "{i},{j}: {e} vs {g}");
                } else {
                    assert!(g.is_infinite() || g > cutoff * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn knn_graph_small_cases() {
        let c = line(&[0.0, 1.0, 3.0]);
        let g = knn_graph(&c, 1).unwrap();
        assert_eq!(g.off_diagonal_nnz(), 4);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 2), 2.0);
        let full = knn_graph(&uniform(12, 1), 11).unwrap();
        assert_eq!(full.off_diagonal_nnz(), 12 * 11);
    }

    #[test]
    fn knn_auto_on_two_far_blobs_errors() {
        let mut pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.01, 0.0]).collect();
        pts.extend((0..20).map(|i| vec![100.0 + i as f64 * 0.01, 0.0]));
        let c = PointCloud::from_points(&pts, 2).unwrap();
        let params = FermatParams {
            p: 2.0,
            m: 2,
            mode: FermatMode::KnnAuto,
        };
        assert!(matches!(fermat_sssp(&c, &params, 0), Err(Error::DisconnectedGraph { .. })));
    }

    #[test]
    fn normalization_scales() {
        let c = line(&[0.0, 0.5]);
        let p = FermatParams::exact(3.0, 2);
        let dm = fermat_pairwise(&c, &p).unwrap();
        let nd = normalize_fermat(&dm, 100, &p).unwrap();
        assert!((nd.scale - 100.0).abs() < 1e-12);
        assert!(matches!(normalize_fermat(&nd, 100, &p), Err(Error::DoubleNormalization)));
        let p1 = FermatParams::exact(1.0, 2);
        let d1 = normalize_fermat(&fermat_pairwise(&c, &p1).unwrap(), 100, &p1).unwrap();
        assert_eq!(d1.scale, 1.0);
        assert!((normalization_factor(10_000, 2.0, 2) - 100.0).abs() < 1e-9);
    }
}
