use crate::error::{Error, Result};
use crate::sampling::{circle_point, DensityModel, Domain};

use super::dense::symmetric_eigen;

/// Smallest grid accepted by [`continuum_spectrum_1d`].
pub const MIN_GRID_1D: usize = 64;

/// Reference eigenvalues of `Δ_{s,p} f = −ρ^{−j} (ρ^{j+α} f′)′` on the
/// unit-length circle, `j = p(s−1)+1`, `α = 2(p−1)`.
///
/// Discretized in flux form on a periodic grid of `grid_n` nodes with the
/// density sampled at cell faces. The resulting matrix is symmetric in the
/// `ρ^j`-weighted inner product and is diagonalized through that similarity.
/// Returns the `k` smallest eigenvalues in ascending order.
pub fn continuum_spectrum_1d(model: &DensityModel, p: f64, s: f64, grid_n: usize, k: usize) -> Result<Vec<f64>> {
    if *model.domain() != Domain::Circle {
        return Err(Error::InvalidModel("the 1-D reference operator lives on the circle".into()));
    }
    if grid_n < MIN_GRID_1D {
        return Err(Error::GridTooCoarse {
            res: grid_n,
            min: MIN_GRID_1D,
        });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let n = grid_n;
    let dx = 1.0 / n as f64;
    let j = p * (s - 1.0) + 1.0;
    let alpha = 2.0 * (p - 1.0);
    let rho = |theta: f64| model.eval_extended(&circle_point(theta));
    // face i sits between nodes i and i+1
    let face: Vec<f64> = (0..n).map(|i| rho((i as f64 + 0.5) * dx).powf(j + alpha)).collect();
    let node_w: Vec<f64> = (0..n).map(|i| rho(i as f64 * dx).powf(-0.5 * j)).collect();
    let mut a = vec![0.0; n * n];
    let inv = 1.0 / (dx * dx);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        a[i * n + i] += (face[i] + face[prev]) * inv;
        a[i * n + next] -= face[i] * inv;
        a[i * n + prev] -= face[prev] * inv;
    }
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] *= node_w[r] * node_w[c];
        }
    }
    let (vals, _) = symmetric_eigen(&a, n)?;
    Ok(vals.into_iter().take(k).collect())
}
