use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, SpatialGrid};
use crate::sampling::PointCloud;

use super::SparseWeightedGraph;

/// Volume `ω_m` of the unit ball in `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    // ω_0 = 1, ω_1 = 2, ω_m = ω_{m−2} · 2π / m
    let mut w = if m % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if m % 2 == 0 { 2 } else { 3 };
    while k <= m {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

/// Indicator kernel `η(t) = 1/ω_m` on `[0, 1]` (closed at 1), zero beyond.
pub fn kernel_eta(t: f64, m: usize) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeArgument(t));
    }
    Ok(if t <= 1.0 { 1.0 / unit_ball_volume(m) } else { 0.0 })
}

/// Kernel graph `w_ij = η(d_ij / h) / (n h^m)`, self-loops included.
///
/// `n` is the sample size entering the weight scale, normally `dm.n()`.
pub fn build_weights(dm: &DistanceMatrix, h: f64, n: usize, m: usize) -> Result<SparseWeightedGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    if dm.cutoff() < h {
        return Err(Error::TruncatedDistances {
            cutoff: dm.cutoff(),
            h,
        });
    }
    let w = 1.0 / (unit_ball_volume(m) * n as f64 * h.powi(m as i32));
    let rows: Vec<Vec<(usize, f64)>> = (0..dm.n())
        .map(|i| {
            let mut row = Vec::new();
            dm.for_each_in_row(i, |j, d| {
                if d <= h {
                    row.push((j, w));
                }
            });
            row
        })
        .collect();
    finish(rows)
}

/// Kernel graph on Euclidean distances, found with a bucket grid.
pub fn build_weights_euclidean(cloud: &PointCloud, h: f64, m: usize) -> Result<SparseWeightedGraph> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let n = cloud.len();
    let w = 1.0 / (unit_ball_volume(m) * n as f64 * h.powi(m as i32));
    let grid = SpatialGrid::new(cloud, h);
    let mut buf = Vec::new();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            grid.within(cloud.point(i), h, &mut buf);
            buf.iter().map(|&(j, _)| (j, w)).collect()
        })
        .collect();
    finish(rows)
}

fn finish(rows: Vec<Vec<(usize, f64)>>) -> Result<SparseWeightedGraph> {
    // symmetrize defensively: keep a pair only if both rows list it
    let n = rows.len();
    let mut sym: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            if j == i || (j < i && rows[j].binary_search_by_key(&i, |e| e.0).is_ok()) {
                sym[i].push((j, w));
                if j != i {
                    sym[j].push((i, w));
                }
            }
        }
    }
    for row in &mut sym {
        row.sort_by_key(|e| e.0);
    }
    let g = SparseWeightedGraph::from_sorted_rows(sym, true);
    if g.off_diagonal_nnz() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(g)
}

/// Row sums `m_i = Σ_j w_ij`, self-loop included.
pub fn degrees(g: &SparseWeightedGraph) -> Vec<f64> {
    g.degrees().to_vec()
}

/// Default bandwidth `4 μ β^{(p−1)/m} (nβ/2)^{−(1/3 − ε)/m}`; requires `ε ∈ (0, 1/(8p+6))`.
pub fn bandwidth_rule(n: usize, m: usize, eps: f64, p: f64, beta: f64, mu: f64) -> Result<f64> {
    let upper = 1.0 / (8.0 * p + 6.0);
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::EpsOutOfRange { eps, upper });
    }
    let mf = m as f64;
    Ok(4.0 * mu * beta.powf((p - 1.0) / mf) * (n as f64 * beta / 2.0).powf(-(1.0 / 3.0 - eps) / mf))
}

/// `cut(Z, Zᶜ) / min(vol Z, vol Zᶜ)`, self-loops ignored.
pub fn ncut(g: &SparseWeightedGraph, in_z: &[bool]) -> Result<f64> {
    if in_z.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: in_z.len(),
        });
    }
    if in_z.iter().all(|&b| b) || in_z.iter().all(|&b| !b) {
        return Err(Error::EmptySide);
    }
    let (mut cut, mut vol_z, mut vol_c) = (0.0, 0.0, 0.0);
    for i in 0..g.n() {
        for (j, w) in g.row(i) {
            if j == i {
                continue;
            }
            if in_z[i] {
                vol_z += w;
                if !in_z[j] {
                    cut += w;
                }
            } else {
                vol_c += w;
            }
        }
    }
    let denom = f64::min(vol_z, vol_c);
    Ok(if denom > 0.0 { cut / denom } else { 0.0 })
}

/// `((m+2)/(n h²)) Σ_{i,j} w_ij (u_i − u_j)(v_i − v_j)`.
pub fn dirichlet_form(g: &SparseWeightedGraph, h: f64, m: usize, n: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..g.n() {
        for (j, w) in g.row(i) {
            s += w * (u[i] - u[j]) * (v[i] - v[j]);
        }
    }
    (m as f64 + 2.0) / (n as f64 * h * h) * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_values() {
        assert!((kernel_eta(0.5, 2).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((kernel_eta(1.0, 2).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(kernel_eta(1.2, 3).unwrap(), 0.0);
        assert!(matches!(kernel_eta(-0.1, 2), Err(Error::NegativeArgument(_))));
    }

    #[test]
    fn two_point_weights() {
        let h = 0.4;
        let dm = DistanceMatrix::dense(2, vec![0.0, 0.5 * h, 0.5 * h, 0.0], 2.0, 2);
        let g = build_weights(&dm, h, 2, 2).unwrap();
        let w = 1.0 / (2.0 * h * h * PI);
        assert!((g.weight(0, 1) - w).abs() < 1e-15);
        assert!((g.weight(0, 0) - w).abs() < 1e-15);
        assert_eq!(g.degrees(), &[2.0 * w, 2.0 * w]);
        let far = DistanceMatrix::dense(2, vec![0.0, 2.0 * h, 2.0 * h, 0.0], 2.0, 2);
        assert!(matches!(build_weights(&far, h, 2, 2), Err(Error::EmptyGraph)));
    }

    #[test]
    fn truncated_matrix_rejects_wide_bandwidth() {
        let dm = DistanceMatrix::sparse_from_rows(vec![vec![(1, 0.1)], vec![]], 2.0, 2, 0.2);
        assert!(matches!(build_weights(&dm, 0.3, 2, 2), Err(Error::TruncatedDistances { .. })));
        assert!(build_weights(&dm, 0.2, 2, 2).is_ok());
    }

    #[test]
    fn bandwidth_examples() {
        let h = bandwidth_rule(10_000, 2, 0.05, 1.0, 1.0, 1.0).unwrap();
        let expected = 4.0 * 5000f64.powf(-0.5 * (1.0 / 3.0 - 0.05));
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 1.196849).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for n in [10, 100, 1000, 10_000, 100_000] {
            let h = bandwidth_rule(n, 2, 0.02, 2.0, 1.5, 1.0).unwrap();
            assert!(h < last);
            last = h;
        }
        let (p, m, eps) = (2.0, 2usize, 0.02);
        let h1 = bandwidth_rule(1000, m, eps, p, 1.5, 1.0).unwrap();
        let h2 = bandwidth_rule(1000, m, eps, p, 3.0, 1.0).unwrap();
        let ratio = 2f64.powf((p - 1.0) / m as f64) * 2f64.powf(-(1.0 / 3.0 - eps) / m as f64);
        assert!((h2 / h1 - ratio).abs() < 1e-12);
        assert!(matches!(bandwidth_rule(100, 2, 0.1, 2.0, 1.0, 1.0), Err(Error::EpsOutOfRange { .. })));
    }

    #[test]
    fn ncut_examples() {
        let g = SparseWeightedGraph::from_pairs(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(ncut(&g, &[true, false]).unwrap(), 1.0);
        let path = SparseWeightedGraph::from_pairs(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 0, 5.0)]).unwrap();
        assert_eq!(ncut(&path, &[true, false, false]).unwrap(), 1.0);
        let two = SparseWeightedGraph::from_pairs(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(ncut(&two, &[true, true, false, false]).unwrap(), 0.0);
        assert!(matches!(ncut(&two, &[true; 4]), Err(Error::EmptySide)));
    }
}
