use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, Laplacian, LaplacianSpec, SparseWeightedGraph};

use super::dense::{jacobi_eigen, symmetric_eigen};
use super::lanczos::{smallest_eigenpairs, KrylovOptions};

/// Eigenvalues closer than this (relative to the operator scale) form a cluster.
pub const CLUSTER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigOptions {
    /// Solve each connected component separately instead of failing.
    pub allow_disconnected: bool,
    /// Largest size handled by the dense solver.
    pub dense_max: usize,
    /// Seed of the Krylov start vector.
    pub seed: u64,
    /// Residual tolerance relative to the operator norm (Krylov path).
    pub tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            allow_disconnected: false,
            dense_max: 700,
            seed: 0,
            tol: 1e-11,
        }
    }
}

impl EigOptions {
    pub fn with_dense_max(mut self, dense_max: usize) -> Self {
        self.dense_max = dense_max;
        self
    }

    pub fn allowing_disconnected(mut self) -> Self {
        self.allow_disconnected = true;
        self
    }
}

/// Lowest eigenpairs of a Laplacian.
///
/// Eigenvectors are orthonormal in `⟨u, v⟩ = Σ_i mass_i u_i v_i`; for the
/// random walk Laplacian `mass_i = m_i / n` with `m_i` the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// One column per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    /// Relative residual of each pair in the symmetric pencil.
    pub residuals: Vec<f64>,
    /// Cluster id of each eigenvalue; equal ids mean the values are numerically tied.
    pub clusters: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u.iter().zip(v)).map(|(m, (a, b))| m * a * b).sum()
    }

    /// Eigen-decomposition of a symmetric matrix in the Euclidean inner product.
    pub fn from_symmetric(a: &[f64], n: usize) -> Result<Self> {
        let (vals, vecs) = symmetric_eigen(a, n)?;
        let cols: Vec<Vec<f64>> = (0..n).map(|c| (0..n).map(|r| vecs[r * n + c]).collect()).collect();
        let scale = vals.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let mut dec = SpectralDecomposition {
            clusters: cluster_ids(&vals, scale),
            residuals: cols
                .iter()
                .zip(&vals)
                .map(|(v, &l)| {
                    let r: f64 = (0..n)
                        .map(|i| {
                            let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                            (av - l * v[i]).powi(2)
                        })
                        .sum();
                    r.sqrt() / scale
                })
                .collect(),
            eigenvalues: vals,
            eigenvectors: cols,
            mass: vec![1.0; n],
        };
        fix_signs(&mut dec.eigenvectors);
        Ok(dec)
    }

    /// CSV `k,lambda,residual` with `k` starting at 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,lambda,residual\n");
        for (k, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(s, "{},{l:.16e},{r:.3e}", k + 1);
        }
        s
    }

    /// Dense CSV of the eigenvectors, one row per node.
    pub fn eigenvectors_csv(&self) -> String {
        let mut s = (1..=self.len()).map(|k| format!("v{k}")).collect::<Vec<_>>().join(",");
        s.push('\n');
        for i in 0..self.n() {
            let row: Vec<String> = self.eigenvectors.iter().map(|v| format!("{:.16e}", v[i])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn cluster_ids(vals: &[f64], scale: f64) -> Vec<usize> {
    let mut ids = Vec::with_capacity(vals.len());
    let mut id = 0;
    for (i, v) in vals.iter().enumerate() {
        if i > 0 && v - vals[i - 1] >= CLUSTER_GAP * scale.max(1.0) {
            id += 1;
        }
        ids.push(id);
    }
    ids
}

/// Largest-magnitude entry positive (first such entry on ties).
fn fix_signs(vecs: &mut [Vec<f64>]) {
    for v in vecs {
        let mut best = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[best].abs() {
                best = i;
            }
        }
        if v.get(best).is_some_and(|&x| x < 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// The `k` lowest eigenpairs of the Laplacian described by `spec` on `g`.
pub fn eig_smallest(spec: &LaplacianSpec, g: &SparseWeightedGraph, k: usize, opts: &EigOptions) -> Result<SpectralDecomposition> {
    let l = build_laplacian(g, spec)?;
    eig_laplacian(&l, k, opts)
}

/// The `k` lowest eigenpairs of an assembled Laplacian.
///
/// `L = c·diag(a)(D−W)diag(b)` is similar to the symmetric
/// `c·diag(√(ab))(D−W)diag(√(ab))`; that matrix is diagonalized and the
/// eigenvectors mapped back, so the returned pairs solve `Lv = λv` exactly
/// up to rounding and are orthonormal for the weights `b/(a n)`.
pub fn eig_laplacian(l: &Laplacian, k: usize, opts: &EigOptions) -> Result<SpectralDecomposition> {
    let n = l.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("requested {k} eigenpairs of a {n}-node graph")));
    }
    if let Some(i) = (0..n).find(|&i| !(l.left[i] * l.right[i] > 0.0)) {
        return Err(Error::ZeroDegree(i));
    }
    let (count, labels) = l.graph.components();
    if count > 1 {
        if !opts.allow_disconnected {
            return Err(Error::Disconnected { components: count });
        }
        return by_components(l, k, opts, count, &labels);
    }
    solve_connected(l, k, opts)
}

fn by_components(l: &Laplacian, k: usize, opts: &EigOptions, count: usize, labels: &[usize]) -> Result<SpectralDecomposition> {
    let n = l.n();
    let mut sizes = vec![0usize; count];
    for &c in labels {
        sizes[c] += 1;
    }
    let mut pairs: Vec<(f64, f64, Vec<f64>, usize)> = Vec::new();
    for c in 0..count {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let sub = Laplacian {
            graph: l.graph.subgraph(&idx),
            left: idx.iter().map(|&i| l.left[i]).collect(),
            right: idx.iter().map(|&i| l.right[i]).collect(),
            scale: l.scale,
        };
        let kc = k.min(idx.len());
        let dec = solve_connected(&sub, kc, opts)?;
        let shrink = (idx.len() as f64 / n as f64).sqrt();
        for ((lam, res), v) in dec.eigenvalues.iter().zip(&dec.residuals).zip(dec.eigenvectors) {
            let mut full = vec![0.0; n];
            for (a, &i) in idx.iter().enumerate() {
                // sub-problem normalized with 1/|component|; rescale to 1/n
                full[i] = v[a] / shrink;
            }
            pairs.push((*lam, *res, full, c));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // within a cluster of tied eigenvalues, larger components come first
    let gap = CLUSTER_GAP * l.scale.max(1.0);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 < gap {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| (std::cmp::Reverse(sizes[p.3]), p.3));
        start = end;
    }
    pairs.truncate(k);
    let mass: Vec<f64> = (0..n).map(|i| l.right[i] / l.left[i] / n as f64).collect();
    let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    Ok(SpectralDecomposition {
        clusters: cluster_ids(&vals, l.scale),
        eigenvalues: vals,
        residuals: pairs.iter().map(|p| p.1).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.2).collect(),
        mass,
    })
}

fn solve_connected(l: &Laplacian, k: usize, opts: &EigOptions) -> Result<SpectralDecomposition> {
    let n = l.n();
    let c = l.scale;
    let t: Vec<f64> = (0..n).map(|i| (l.left[i] * l.right[i]).sqrt()).collect();
    let deg = l.graph.degrees();
    let (vals, zs): (Vec<f64>, Vec<Vec<f64>>) = if n <= opts.dense_max || k + 2 >= n {
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            s[i * n + i] += deg[i] * t[i] * t[i];
            for (j, w) in l.graph.row(i) {
                s[i * n + j] -= w * t[i] * t[j];
            }
        }
        let (vals, vecs) = symmetric_eigen(&s, n)?;
        let zs = (0..k).map(|col| (0..n).map(|r| vecs[r * n + col]).collect()).collect();
        (vals[..k].to_vec(), zs)
    } else {
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let (cols, ws) = l.graph.row_slices(i);
                let mut acc = deg[i] * t[i] * x[i];
                for (&j, &w) in cols.iter().zip(ws) {
                    acc -= w * t[j] * x[j];
                }
                y[i] = t[i] * acc;
            }
        };
        let kopts = KrylovOptions {
            tol: opts.tol,
            max_basis: (3 * k).max(k + 60),
            max_matvecs: 40 * n + 20_000,
            seed: opts.seed,
        };
        smallest_eigenpairs(n, k, apply, &kopts)?
    };
    // residual in the symmetric pencil (D−W) w = μ M w with M = 1/(ab)
    let mut residuals = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    let sqrt_n = (n as f64).sqrt();
    for (mu, z) in vals.iter().zip(&zs) {
        let w: Vec<f64> = z.iter().zip(&t).map(|(z, t)| z * t).collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let (cols, ws) = l.graph.row_slices(i);
            let mut aw = deg[i] * w[i];
            for (&j, &wt) in cols.iter().zip(ws) {
                aw -= wt * w[j];
            }
            let mw = w[i] / (t[i] * t[i]);
            num += (aw - mu * mw).powi(2);
            den += mw * mw;
        }
        residuals.push((num / den).sqrt());
        eigenvectors.push(w.iter().zip(&l.right).map(|(w, b)| w / b * sqrt_n).collect::<Vec<f64>>());
    }
    fix_signs(&mut eigenvectors);
    let eigenvalues: Vec<f64> = vals.iter().map(|v| v * c).collect();
    Ok(SpectralDecomposition {
        clusters: cluster_ids(&eigenvalues, c),
        eigenvalues,
        eigenvectors,
        mass: (0..n).map(|i| l.right[i] / l.left[i] / n as f64).collect(),
        residuals,
    })
}

/// Result of comparing the form-based and solver eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxReport {
    pub form_eigenvalues: Vec<f64>,
    pub solver_eigenvalues: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

/// Eigenvalues of the pencil (Dirichlet form, degree mass) computed densely by
/// Jacobi rotations, compared with the random walk spectrum from [`eig_laplacian`].
pub fn rayleigh_minmax_check(g: &SparseWeightedGraph, h: f64, m: usize, k: usize) -> Result<MinMaxReport> {
    let n = g.n();
    if n > 64 {
        return Err(Error::InvalidParameter(format!("min-max check is dense; n = {n} exceeds 64")));
    }
    let k = k.min(n);
    let d = g.degrees();
    if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::ZeroDegree(i));
    }
    // b(u,u) = uᵀBu with B = 2(m+2)/(n h²)(D − W); mass diag(d)/n
    let cb = 2.0 * (m as f64 + 2.0) / (n as f64 * h * h);
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        s[i * n + i] += cb * d[i];
        for (j, w) in g.row(i) {
            s[i * n + j] -= cb * w;
        }
    }
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] /= (d[i] / n as f64).sqrt() * (d[j] / n as f64).sqrt();
        }
    }
    let (form, _) = jacobi_eigen(&s, n)?;
    let lap = crate::graph::rw_laplacian(g, h, m)?;
    let opts = EigOptions {
        allow_disconnected: true,
        ..EigOptions::default()
    };
    let solver = eig_laplacian(&lap, k, &opts)?.eigenvalues;
    let top = form.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let deviations: Vec<f64> = (0..k)
        .map(|i| {
            let mag = form[i].abs().max(solver[i].abs());
            // numerically zero eigenvalues are compared on the scale of the spectrum
            let denom = if mag < 1e-8 * top { top } else { mag }.max(f64::MIN_POSITIVE);
            (form[i] - solver[i]).abs() / denom
        })
        .collect();
    Ok(MinMaxReport {
        max_deviation: deviations.iter().fold(0.0, |a: f64, &b| a.max(b)),
        form_eigenvalues: form[..k].to_vec(),
        solver_eigenvalues: solver,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_weights_euclidean, laplacian_jqr, rw_laplacian, LaplacianMode};
    use crate::sampling::{sample_iid, DensityModel, Domain};
    use nalgebra::DMatrix;

    fn rw_spec(h: f64, m: usize, n: usize) -> LaplacianSpec {
        LaplacianSpec {
            mode: LaplacianMode::RandomWalk,
            h,
            m,
            n,
        }
    }

    #[test]
    fn two_nodes() {
        let g = SparseWeightedGraph::from_pairs(2, &[(0, 1, 1.0)]).unwrap();
        let h = 0.5;
        let dec = eig_smallest(&rw_spec(h, 2, 2), &g, 2, &EigOptions::default()).unwrap();
        let scale = 2.0 * 4.0 / (h * h);
        assert!(dec.eigenvalues[0].abs() < 1e-12);
        assert!((dec.eigenvalues[1] - 2.0 * scale).abs() < 1e-10);
        let v = &dec.eigenvectors[0];
        assert!((v[0] - v[1]).abs() < 1e-12 && v[0] > 0.0);
        assert!((dec.inner(v, v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_matches_circulant() {
        let n = 24;
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        let g = SparseWeightedGraph::from_pairs(n, &pairs).unwrap();
        let l = rw_laplacian(&g, 1.0, 1).unwrap().with_scale(1.0);
        let dec = eig_laplacian(&l, n, &EigOptions::default()).unwrap();
        let mut expected: Vec<f64> = (0..n)
            .map(|k| 1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in dec.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        // doubled eigenvalues form clusters
        assert_eq!(dec.clusters[1], dec.clusters[2]);
        assert_ne!(dec.clusters[0], dec.clusters[1]);
    }

    fn random_graph(n: usize, seed: u64) -> SparseWeightedGraph {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, 5);
        let mut pairs = Vec::new();
        for i in 0..n {
            pairs.push((i, (i + 1) % n, 0.2 + rng.random::<f64>()));
            pairs.push((i, i, rng.random::<f64>() * 0.3));
            for j in i + 2..n {
                if rng.random::<f64>() < 0.3 {
                    pairs.push((i, j, rng.random::<f64>()));
                }
            }
        }
        SparseWeightedGraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn matches_dense_pencil_oracle() {
        let n = 12;
        let g = random_graph(n, 11);
        for l in [
            rw_laplacian(&g, 0.7, 2).unwrap(),
            laplacian_jqr(&g, 2.0, 3.0, 1.0).unwrap(),
            laplacian_jqr(&g, 1.5, 2.5, 0.5).unwrap(),
        ] {
            let dec = eig_laplacian(&l, n, &EigOptions::default()).unwrap();
            // oracle: eigenvalues of the (nonsymmetric) dense L through nalgebra's Schur form
            let a = DMatrix::from_row_slice(n, n, &l.to_dense());
            let mut oracle: Vec<f64> = a.complex_eigenvalues().iter().map(|c| c.re).collect();
            oracle.sort_by(f64::total_cmp);
            let top = oracle[n - 1].abs();
            for (x, y) in dec.eigenvalues.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-8 * top, "{x} vs {y}");
            }
            let mut y = vec![0.0; n];
            for (lam, v) in dec.eigenvalues.iter().zip(&dec.eigenvectors) {
                l.apply(v, &mut y);
                let r: f64 = y.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
                assert!(r < 1e-9 * top);
            }
            for (i, u) in dec.eigenvectors.iter().enumerate() {
                for (j, v) in dec.eigenvectors.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dec.inner(u, v) - e).abs() < 1e-8);
                }
            }
            assert!(dec.residuals.iter().all(|&r| r < 1e-8));
        }
    }

    #[test]
    fn krylov_path_agrees_with_dense() {
        let model = DensityModel::uniform(Domain::unit_square()).unwrap();
        let cloud = sample_iid(&model, 900, 5).unwrap();
        let h = 0.12;
        let g = build_weights_euclidean(&cloud, h, 2).unwrap();
        let l = rw_laplacian(&g, h, 2).unwrap();
        let dense = eig_laplacian(&l, 6, &EigOptions::default().with_dense_max(1000)).unwrap();
        let krylov = eig_laplacian(&l, 6, &EigOptions::default().with_dense_max(10)).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&krylov.eigenvalues) {
            assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(krylov.residuals.iter().all(|&r| r < 1e-8), "{:?}", krylov.residuals);
        assert!(dense.eigenvalues[0].abs() < 1e-8);
        let v0 = &dense.eigenvectors[0];
        assert!(v0.iter().all(|x| (x - v0[0]).abs() < 1e-8));
        assert!(dense.eigenvalues[1] > 1e-6);
    }

    #[test]
    fn disconnected_graphs() {
        let g = SparseWeightedGraph::from_pairs(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 2.0)]).unwrap();
        let l = rw_laplacian(&g, 1.0, 2).unwrap().with_scale(1.0);
        assert!(matches!(
            eig_laplacian(&l, 3, &EigOptions::default()),
            Err(Error::Disconnected { components: 2 })
        ));
        let opts = EigOptions {
            allow_disconnected: true,
            ..EigOptions::default()
        };
        let dec = eig_laplacian(&l, 5, &opts).unwrap();
        assert!(dec.eigenvalues[0].abs() < 1e-14 && dec.eigenvalues[1].abs() < 1e-14);
        for (i, u) in dec.eigenvectors.iter().enumerate() {
            for (j, v) in dec.eigenvectors.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dec.inner(u, v) - e).abs() < 1e-12);
            }
        }
        // tied zeros: the larger component's indicator comes first
        let g = SparseWeightedGraph::from_pairs(5, &[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let l = rw_laplacian(&g, 1.0, 2).unwrap().with_scale(1.0);
        let dec = eig_laplacian(&l, 2, &opts).unwrap();
        assert_eq!(dec.eigenvectors[0][..2], [0.0, 0.0]);
        assert!(dec.eigenvectors[1][2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn minmax_examples() {
        let k3 = SparseWeightedGraph::from_pairs(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = rayleigh_minmax_check(&k3, 0.5, 2, 3).unwrap();
        assert!(r.max_deviation < 1e-10, "{r:?}");
        let p4 = SparseWeightedGraph::from_pairs(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(rayleigh_minmax_check(&p4, 0.5, 2, 4).unwrap().max_deviation < 1e-10);
        let loops = SparseWeightedGraph::from_pairs(4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 2.0), (3, 3, 1.0)]).unwrap();
        let r = rayleigh_minmax_check(&loops, 0.5, 2, 4).unwrap();
        assert!(r.form_eigenvalues.iter().all(|v| v.abs() < 1e-14));
        assert!(r.solver_eigenvalues.iter().all(|v| v.abs() < 1e-14));
        let g = random_graph(30, 2);
        assert!(rayleigh_minmax_check(&g, 0.3, 2, 30).unwrap().max_deviation < 1e-10);
    }

    #[test]
    fn sign_convention_is_reproducible() {
        let g = random_graph(40, 8);
        let l = rw_laplacian(&g, 1.0, 2).unwrap();
        let a = eig_laplacian(&l, 4, &EigOptions::default()).unwrap();
        let b = eig_laplacian(&l, 4, &EigOptions::default()).unwrap();
        assert_eq!(a, b);
        for v in &a.eigenvectors {
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }
}
