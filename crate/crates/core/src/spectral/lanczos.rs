//! Restarted Krylov eigensolver for the smallest eigenpairs of a symmetric operator.
//!
//! The basis is kept fully orthogonal (two passes of classical Gram–Schmidt)
//! together with its image under the operator, so the projected matrix and
//! all Ritz residuals are formed explicitly. When the basis is full it is
//! compressed to the best Ritz vectors and expansion continues from the
//! residual of the first unconverged pair; in exact arithmetic this is
//! thick-restart Lanczos.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, SOLVER_STREAM};

use super::dense::symmetric_eigen;

pub(crate) struct KrylovOptions {
    pub tol: f64,
    pub max_basis: usize,
    pub max_matvecs: usize,
    pub seed: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Returns `(values, vectors)` for the `k` smallest eigenpairs.
pub(crate) fn smallest_eigenpairs(
    n: usize,
    k: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    assert!(k >= 1 && k < n);
    let mut rng = stream(opts.seed, SOLVER_STREAM);
    let random_vec = |rng: &mut crate::rng::StreamRng| -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    };
    let max_basis = opts.max_basis.clamp(k + 2, n);
    let keep = (k + (max_basis - k) / 3).max(k + 1).min(max_basis - 1);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut h: Vec<f64> = Vec::new(); // row-major, side v.len()
    let mut candidate = random_vec(&mut rng);
    let mut matvecs = 0;
    let mut norm_est: f64 = 0.0;
    let mut since_check = 0;
    loop {
        // orthogonalize the candidate twice; replace it on breakdown
        let mut x = candidate;
        for attempt in 0..3 {
            let before = dot(&x, &x).sqrt();
            for _ in 0..2 {
                for q in &v {
                    let c = dot(q, &x);
                    axpy(-c, q, &mut x);
                }
            }
            let after = dot(&x, &x).sqrt();
            if after > 1e-8 * before && after > 0.0 {
                break;
            }
            if attempt == 2 || v.len() >= n {
                return Err(Error::NotConverged {
                    tolerance: opts.tol,
                    iterations: matvecs,
                });
            }
            x = random_vec(&mut rng);
        }
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|e| *e /= nx);
        let mut y = vec![0.0; n];
        apply(&x, &mut y);
        matvecs += 1;
        // grow H by one row and column
        let m = v.len();
        let mut hn = vec![0.0; (m + 1) * (m + 1)];
        for i in 0..m {
            hn[i * (m + 1)..i * (m + 1) + m].copy_from_slice(&h[i * m..(i + 1) * m]);
        }
        for (i, q) in v.iter().enumerate() {
            let c = dot(q, &y);
            hn[i * (m + 1) + m] = c;
            hn[m * (m + 1) + i] = c;
        }
        hn[m * (m + 1) + m] = dot(&x, &y);
        h = hn;
        candidate = y.clone();
        v.push(x);
        w.push(y);
        since_check += 1;

        let m = v.len();
        let full = m == max_basis;
        if m > k && (full || since_check >= 8 || m == n) {
            since_check = 0;
            let (theta, s) = symmetric_eigen(&h, m)?;
            norm_est = norm_est.max(theta[0].abs()).max(theta[m - 1].abs());
            let thresh = opts.tol * norm_est.max(f64::MIN_POSITIVE);
            let mut first_bad = None;
            let mut residual_of_bad = Vec::new();
            for i in 0..k {
                let mut r = vec![0.0; n];
                for (j, (vj, wj)) in v.iter().zip(&w).enumerate() {
                    let c = s[j * m + i];
                    axpy(c, wj, &mut r);
                    axpy(-theta[i] * c, vj, &mut r);
                }
                if dot(&r, &r).sqrt() > thresh {
                    first_bad = Some(i);
                    residual_of_bad = r;
                    break;
                }
            }
            match first_bad {
                None => {
                    let vecs = (0..k)
                        .map(|i| {
                            let mut y = vec![0.0; n];
                            for (j, vj) in v.iter().enumerate() {
                                axpy(s[j * m + i], vj, &mut y);
                            }
                            y
                        })
                        .collect();
                    return Ok((theta[..k].to_vec(), vecs));
                }
                Some(_) if matvecs >= opts.max_matvecs => {
                    return Err(Error::NotConverged {
                        tolerance: opts.tol,
                        iterations: matvecs,
                    });
                }
                Some(_) if full => {
                    // compress to the `keep` lowest Ritz pairs
                    let mut nv = Vec::with_capacity(max_basis);
                    let mut nw = Vec::with_capacity(max_basis);
                    for i in 0..keep {
                        let mut a = vec![0.0; n];
                        let mut b = vec![0.0; n];
                        for j in 0..m {
                            let c = s[j * m + i];
                            axpy(c, &v[j], &mut a);
                            axpy(c, &w[j], &mut b);
                        }
                        nv.push(a);
                        nw.push(b);
                    }
                    v = nv;
                    w = nw;
                    h = vec![0.0; keep * keep];
                    for i in 0..keep {
                        for j in 0..=i {
                            let c = dot(&v[i], &w[j]);
                            h[i * keep + j] = c;
                            h[j * keep + i] = c;
                        }
                    }
                    candidate = residual_of_bad;
                }
                Some(_) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_laplacian() {
        // path Laplacian eigenvalues 2 − 2cos(πj/n)
        let n = 400;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut d = 0.0;
                let mut s = 0.0;
                if i > 0 {
                    d += 1.0;
                    s += x[i - 1];
                }
                if i + 1 < n {
                    d += 1.0;
                    s += x[i + 1];
                }
                y[i] = d * x[i] - s;
            }
        };
        let opts = KrylovOptions {
            tol: 1e-11,
            max_basis: 80,
            max_matvecs: 200_000,
            seed: 1,
        };
        let (vals, vecs) = smallest_eigenpairs(n, 5, apply, &opts).unwrap();
        for (j, lam) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / n as f64).cos();
            assert!((lam - exact).abs() < 1e-9, "{j}: {lam} vs {exact}");
        }
        let mut y = vec![0.0; n];
        apply(&vecs[3], &mut y);
        let r: f64 = y.iter().zip(&vecs[3]).map(|(a, b)| (a - vals[3] * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-9);
    }
}
