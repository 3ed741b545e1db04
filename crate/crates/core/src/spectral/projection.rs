use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream;

use super::SpectralDecomposition;

/// Projection of `u` onto the span of eigenvectors with `lo < λ ≤ hi`, in the
/// decomposition's inner product.
pub fn spectral_projection(dec: &SpectralDecomposition, lo: f64, hi: f64, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for (lam, v) in dec.eigenvalues.iter().zip(&dec.eigenvectors) {
        if *lam > lo && *lam <= hi {
            let c = dec.inner(u, v);
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
    }
    out
}

/// Quadratic form `b(u) = Σ λ_k ⟨u, v_k⟩²` of a complete decomposition.
pub fn form_value(dec: &SpectralDecomposition, u: &[f64]) -> f64 {
    dec.eigenvalues
        .iter()
        .zip(&dec.eigenvectors)
        .map(|(l, v)| l * dec.inner(u, v).powi(2))
        .sum()
}

/// Parameters of the eigenvector discrepancy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyParams {
    /// Relative bound, `|b¹(u) − b²(u)| ≤ δ·b¹(u)`.
    pub delta: f64,
    /// Window constants, `α ≤ β ≤ γ ≤ 1`.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Threshold offset of the tail bounds (kept separate from `alpha`).
    pub a: f64,
    /// Random unit vectors used to audit the `delta` hypothesis.
    pub audit_samples: usize,
    pub audit_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub tail_energy: f64,
    pub tail_energy_bound: f64,
    pub tail_norm: f64,
    pub tail_norm_bound: f64,
    pub tail_holds: bool,
    /// Largest `|b¹(u) − b²(u)| / b¹(u)` seen by the audit.
    pub audit_max: f64,
}

/// Checks how close the `k`-th eigenvector (1-based) of form `b¹` is to its
/// projection on a spectral window of form `b²`.
///
/// Both decompositions must be complete and share the inner product. The
/// discrepancy hypothesis is relative, `|b¹(u) − b²(u)| ≤ δ·b¹(u)`: an absolute
/// bound cannot control the eigenvector at `λ¹_k = 0`, where the right-hand side
/// reduces to `α/γ`. It is audited on random unit vectors and the spectral gap
/// condition (no `λ²` in `(λ¹_k + α, λ¹_k + β)`) is verified; violations are
/// returned as [`Error::HypothesisViolated`] with a witness.
pub fn eigvec_discrepancy_check(
    dec1: &SpectralDecomposition,
    dec2: &SpectralDecomposition,
    k: usize,
    prm: &DiscrepancyParams,
) -> Result<DiscrepancyReport> {
    let n = dec1.n();
    if dec2.n() != n || dec1.len() != n || dec2.len() != n {
        return Err(Error::InvalidParameter("both decompositions must be complete and of equal size".into()));
    }
    if dec1.mass != dec2.mass {
        return Err(Error::InvalidParameter("decompositions use different inner products".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={n}")));
    }
    let DiscrepancyParams {
        delta,
        alpha,
        beta,
        gamma,
        a,
        ..
    } = *prm;
    if !(alpha > 0.0 && alpha <= beta && beta <= gamma && gamma <= 1.0 && a > 0.0 && delta >= 0.0) {
        return Err(Error::InvalidParameter(
            "need 0 < α ≤ β ≤ γ ≤ 1, a > 0 and δ ≥ 0".into(),
        ));
    }
    let mut rng = stream(prm.audit_seed, 0);
    let mut audit_max: f64 = 0.0;
    for _ in 0..prm.audit_samples {
        let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = dec1.inner(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        let (b1, b2) = (form_value(dec1, &u), form_value(dec2, &u));
        let gap = (b1 - b2).abs();
        if b1 > 0.0 {
            audit_max = audit_max.max(gap / b1);
        }
        if gap > delta * b1 + 1e-12 * (b1.abs() + b2.abs() + f64::MIN_POSITIVE) {
            return Err(Error::HypothesisViolated {
                reason: format!("|b1(u) - b2(u)| = {gap:e} exceeds delta * b1(u) = {:e}", delta * b1),
                witness: Some(u),
            });
        }
    }
    let lam = dec1.eigenvalues[k - 1];
    if let Some(&bad) = dec2
        .eigenvalues
        .iter()
        .find(|&&l| l > lam + alpha && l < lam + beta)
    {
        return Err(Error::HypothesisViolated {
            reason: format!("eigenvalue {bad} of the second form lies in ({}, {})", lam + alpha, lam + beta),
            witness: Some(vec![bad]),
        });
    }
    let u = &dec1.eigenvectors[k - 1];
    let rhs = delta * lam / beta + alpha / gamma + delta * lam * (lam + beta) / (gamma * beta);
    let (lhs, tail_energy, tail_norm) = if dec1 == dec2 {
        // u is an eigenvector of b² inside both windows: the residuals are
        // zero, not rounding noise
        (0.0, 0.0, 0.0)
    } else {
        let diff = |p: &[f64]| -> Vec<f64> { u.iter().zip(p).map(|(x, y)| x - y).collect() };
        let r = diff(&spectral_projection(dec2, lam - gamma, lam + alpha, u));
        let rl = diff(&spectral_projection(dec2, f64::NEG_INFINITY, lam + a, u));
        (dec1.inner(&r, &r), form_value(dec2, &rl), dec1.inner(&rl, &rl))
    };
    let tail_energy_bound = delta * lam * (lam + a) / a;
    let tail_norm_bound = delta * lam / a;
    let slack = 1e-12;
    Ok(DiscrepancyReport {
        lambda: lam,
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
        tail_energy,
        tail_energy_bound,
        tail_norm,
        tail_norm_bound,
        tail_holds: tail_energy <= tail_energy_bound + slack && tail_norm <= tail_norm_bound + slack,
        audit_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> SpectralDecomposition {
        let n = vals.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = vals[i];
        }
        SpectralDecomposition::from_symmetric(&a, n).unwrap()
    }

    fn params(delta: f64) -> DiscrepancyParams {
        DiscrepancyParams {
            delta,
            alpha: 0.1,
            beta: 0.2,
            gamma: 0.5,
            a: 0.1,
            audit_samples: 1000,
            audit_seed: 3,
        }
    }

    #[test]
    fn projection_limits() {
        let d = diag(&[1.0, 2.0, 3.0]);
        let u = [0.3, -0.2, 0.9];
        assert_eq!(spectral_projection(&d, f64::NEG_INFINITY, f64::INFINITY, &u), u.to_vec());
        assert_eq!(spectral_projection(&d, 5.0, 9.0, &u), vec![0.0; 3]);
        let p = spectral_projection(&d, 1.5, 2.0, &u);
        assert_eq!(p, vec![0.0, -0.2, 0.0]);
        let pp = spectral_projection(&d, 1.5, 2.0, &p);
        assert!(pp.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn equal_forms_have_zero_lhs() {
        let d = diag(&[1.0, 2.0, 3.0]);
        let r = eigvec_discrepancy_check(&d, &d, 1, &params(0.0)).unwrap();
        assert!(r.lhs == 0.0 && r.holds && r.tail_holds);
    }

    #[test]
    fn diagonal_perturbation() {
        let dp = 1e-3;
        let d1 = diag(&[1.0, 2.0, 3.0]);
        let d2 = diag(&[1.0 + dp, 2.0, 3.0]);
        let r = eigvec_discrepancy_check(&d1, &d2, 1, &params(dp)).unwrap();
        // same eigenvector, inside the window (λ−γ, λ+α]
        assert!(r.lhs < 1e-28);
        assert!(r.holds);
        assert!(r.audit_max <= dp);
    }

    #[test]
    fn audit_and_gap_violations_are_reported() {
        let d1 = diag(&[1.0, 2.0, 3.0]);
        let d2 = diag(&[1.0, 2.5, 3.0]);
        match eigvec_discrepancy_check(&d1, &d2, 1, &params(1e-6)) {
            Err(Error::HypothesisViolated { witness: Some(w), .. }) => assert_eq!(w.len(), 3),
            other => panic!("{other:?}"),
        }
        // rotating the null vector: any absolute δ ≥ sin 2θ would admit this pair,
        // yet lhs = sin²θ exceeds rhs = α/γ at λ¹_1 = 0
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let null = diag(&[0.0, 1.0]);
        let rot = SpectralDecomposition::from_symmetric(&[s * s, -s * c, -s * c, c * c], 2).unwrap();
        assert!(matches!(
            eigvec_discrepancy_check(&null, &rot, 1, &params(0.9)),
            Err(Error::HypothesisViolated { .. })
        ));
        let d3 = diag(&[1.0, 1.15, 3.0]);
        match eigvec_discrepancy_check(&d1, &d3, 1, &params(1.0)) {
            Err(Error::HypothesisViolated { witness: Some(w), .. }) => assert_eq!(w, vec![1.15]),
            other => panic!("{other:?}"),
        }
    }
}
