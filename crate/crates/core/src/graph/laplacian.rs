use crate::error::{Error, Result};

use super::SparseWeightedGraph;

/// Normalization family of a graph Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplacianMode {
    /// `D_q^{(1−j)/(q−1)} (D_q − W_q) D_q^{−r/(q−1)}` with `(W_q)_ij = W_ij / (D_i^q D_j^q)`;
    /// plain `D − W` when `q = 1`.
    Jqr { j: f64, q: f64, r: f64 },
    /// Random walk Laplacian of `W_ij / (d_i d_j)^{1 − s/2}` built on Fermat weights.
    FermatPs { p: f64, s: f64 },
    /// `D_q^{(1−j)/(q−1)} (D_q − W_q)` with `W_q = W_ij / (d_i d_j)^{1 − q/2}`.
    DegreeNormalized { j: f64, q: f64 },
    /// `I − D⁻¹ W`.
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianSpec {
    pub mode: LaplacianMode,
    pub h: f64,
    pub m: usize,
    pub n: usize,
}

impl LaplacianSpec {
    /// `2(m+2)/h²`, the factor relating graph and continuum operators.
    pub fn continuum_scale(&self) -> f64 {
        2.0 * (self.m as f64 + 2.0) / (self.h * self.h)
    }
}

/// `L = c · diag(left) (D' − W') diag(right)` for a symmetric reweighted
/// graph `W'` with degrees `D'`.
///
/// Every normalization in this module has this shape, which keeps `L`
/// similar to a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub graph: SparseWeightedGraph,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub scale: f64,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.graph.degrees();
        for i in 0..self.n() {
            let (cols, vals) = self.graph.row_slices(i);
            let xi = self.right[i] * x[i];
            let mut acc = d[i] * xi;
            for (&j, &w) in cols.iter().zip(vals) {
                acc -= w * self.right[j] * x[j];
            }
            y[i] = self.scale * self.left[i] * acc;
        }
    }

    /// `y = Lᵀ x`.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let d = self.graph.degrees();
        for i in 0..self.n() {
            let (cols, vals) = self.graph.row_slices(i);
            let mut acc = d[i] * self.left[i] * x[i];
            for (&j, &w) in cols.iter().zip(vals) {
                acc -= w * self.left[j] * x[j];
            }
            y[i] = self.scale * self.right[i] * acc;
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let d = self.graph.degrees();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] += d[i];
            for (j, w) in self.graph.row(i) {
                a[i * n + j] -= w;
            }
            for j in 0..n {
                a[i * n + j] *= self.scale * self.left[i] * self.right[j];
            }
        }
        a
    }

    pub fn is_symmetric(&self) -> bool {
        self.left == self.right
    }

    /// Triplet CSV of the operator's nonzeros with a metadata line.
    pub fn to_triplet_csv(&self, meta: &str) -> String {
        use std::fmt::Write as _;
        let d = self.graph.degrees();
        let mut s = format!("# {meta}\ni,j,value\n");
        for i in 0..self.n() {
            let mut diag_done = false;
            let emit = |j: usize, v: f64, s: &mut String| {
                let _ = writeln!(s, "{i},{j},{:.16e}", self.scale * self.left[i] * v * self.right[j]);
            };
            for (j, w) in self.graph.row(i) {
                if j == i {
                    emit(i, d[i] - w, &mut s);
                    diag_done = true;
                } else {
                    if j > i && !diag_done {
                        emit(i, d[i], &mut s);
                        diag_done = true;
                    }
                    emit(j, -w, &mut s);
                }
            }
            if !diag_done {
                emit(i, d[i], &mut s);
            }
        }
        s
    }
}

fn check_degrees(d: &[f64]) -> Result<()> {
    match d.iter().position(|&x| !(x > 0.0)) {
        Some(i) => Err(Error::ZeroDegree(i)),
        None => Ok(()),
    }
}

fn unit(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// The `(j, q, r)` family on the base weights `w`.
pub fn laplacian_jqr(w: &SparseWeightedGraph, j: f64, q: f64, r: f64) -> Result<Laplacian> {
    let d = w.degrees();
    check_degrees(d)?;
    let n = w.n();
    if q == 1.0 {
        return Ok(Laplacian {
            graph: w.clone(),
            left: unit(n),
            right: unit(n),
            scale: 1.0,
        });
    }
    let dq: Vec<f64> = d.iter().map(|x| x.powf(q)).collect();
    let wq = w.map_weights(|a, b, x| x / (dq[a] * dq[b]));
    let degq = wq.degrees();
    check_degrees(degq)?;
    let left = degq.iter().map(|x| x.powf((1.0 - j) / (q - 1.0))).collect();
    let right = degq.iter().map(|x| x.powf(-r / (q - 1.0))).collect();
    Ok(Laplacian {
        graph: wq,
        left,
        right,
        scale: 1.0,
    })
}

/// Fermat `(p, s)` normalization: random walk Laplacian of `W_p / (d_i d_j)^{1 − s/2}`.
pub fn laplacian_ps(w: &SparseWeightedGraph, s: f64) -> Result<Laplacian> {
    let d = w.degrees();
    check_degrees(d)?;
    let e = 1.0 - s / 2.0;
    let wps = if e == 0.0 {
        w.clone()
    } else {
        w.map_weights(|a, b, x| x / (d[a] * d[b]).powf(e))
    };
    let dps = wps.degrees();
    check_degrees(dps)?;
    let left = dps.iter().map(|x| 1.0 / x).collect();
    Ok(Laplacian {
        left,
        right: unit(w.n()),
        graph: wps,
        scale: 1.0,
    })
}

/// Degree-normalized Laplacian `D_q^{(1−j)/(q−1)} (D_q − W_q)` with
/// `W_q = W / (d_i d_j)^{1 − q/2}`.
///
/// At `q = 1` the exponent is only defined along `j = q`, where it is `−1`;
/// `j = q = 1` is therefore the random walk Laplacian of `W_1`, and `q = 1`
/// with `j ≠ 1` is rejected.
pub fn laplacian_degree_normalized(w: &SparseWeightedGraph, j: f64, q: f64) -> Result<Laplacian> {
    if q == 1.0 && j != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "q = 1 requires j = 1 (the exponent (1-j)/(q-1) is undefined), got j = {j}"
        )));
    }
    let d = w.degrees();
    check_degrees(d)?;
    let e = 1.0 - q / 2.0;
    let wq = if e == 0.0 {
        w.clone()
    } else {
        w.map_weights(|a, b, x| x / (d[a] * d[b]).powf(e))
    };
    let dq = wq.degrees();
    check_degrees(dq)?;
    let expo = if q == 1.0 { -1.0 } else { (1.0 - j) / (q - 1.0) };
    let left = dq.iter().map(|x| x.powf(expo)).collect();
    Ok(Laplacian {
        left,
        right: unit(w.n()),
        graph: wq,
        scale: 1.0,
    })
}

/// `(2(m+2)/h²)(I − D⁻¹W)`.
pub fn rw_laplacian(w: &SparseWeightedGraph, h: f64, m: usize) -> Result<Laplacian> {
    let d = w.degrees();
    check_degrees(d)?;
    Ok(Laplacian {
        graph: w.clone(),
        left: d.iter().map(|x| 1.0 / x).collect(),
        right: unit(w.n()),
        scale: 2.0 * (m as f64 + 2.0) / (h * h),
    })
}

/// Unscaled operator for `spec.mode`; random walk mode carries `2(m+2)/h²`.
pub fn build_laplacian(w: &SparseWeightedGraph, spec: &LaplacianSpec) -> Result<Laplacian> {
    match spec.mode {
        LaplacianMode::Jqr { j, q, r } => laplacian_jqr(w, j, q, r),
        LaplacianMode::FermatPs { s, .. } => laplacian_ps(w, s),
        LaplacianMode::DegreeNormalized { j, q } => laplacian_degree_normalized(w, j, q),
        LaplacianMode::RandomWalk => rw_laplacian(w, spec.h, spec.m),
    }
}

/// Degree-normalization exponents `(j, q)` whose continuum limit matches the
/// Fermat operator with parameters `(p, s)` in dimension `m`:
/// `j = (s−1)p + 1`, `q = j + 2(p−1)/m`.
pub fn matching_degree_params(p: f64, s: f64, m: usize) -> (f64, f64) {
    let j = (s - 1.0) * p + 1.0;
    (j, j + 2.0 * (p - 1.0) / m as f64)
}
