use crate::error::{Error, Result};
use crate::graph::Laplacian;

/// Evolves the row vector `u` under `∂_t u = u Q` with `Q = −L` by explicit
/// Euler steps no longer than `dt`, up to time `t_end`.
///
/// Requires `L·1 = 0` (so total mass is conserved) and `dt ≤ 1 / max |L_ii|`.
pub fn diffusion_evolve(l: &Laplacian, u0: &[f64], t_end: f64, dt: f64) -> Result<Vec<f64>> {
    let n = l.n();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let deg = l.graph.degrees();
    let diag: Vec<f64> = (0..n)
        .map(|i| l.scale * l.left[i] * (deg[i] - l.graph.weight(i, i)) * l.right[i])
        .collect();
    let max_diag = diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let bound = if max_diag > 0.0 { 1.0 / max_diag } else { f64::INFINITY };
    if dt > bound {
        return Err(Error::UnstableStep { dt, bound });
    }
    let mut row = vec![0.0; n];
    l.apply(&vec![1.0; n], &mut row);
    if let Some(i) = row.iter().position(|r| r.abs() > 1e-8 * max_diag.max(1.0)) {
        return Err(Error::InvalidParameter(format!(
            "row {i} of the generator sums to {}, not zero",
            row[i]
        )));
    }
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let mut u = u0.to_vec();
    let mut lu = vec![0.0; n];
    for _ in 0..steps {
        l.apply_transpose(&u, &mut lu);
        for (x, y) in u.iter_mut().zip(&lu) {
            *x -= h * y;
        }
    }
    Ok(u)
}
