use crate::error::{Error, Result};
use crate::sampling::DensityModel;

/// Second-order Taylor data of ρ at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDensityJet {
    pub rho0: f64,
    pub grad: Vec<f64>,
    /// Row-major `m × m`.
    pub hess: Vec<f64>,
}

impl LocalDensityJet {
    pub fn new(rho0: f64, grad: Vec<f64>, hess: Vec<f64>) -> Result<Self> {
        let m = grad.len();
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho0 = {rho0} must be positive")));
        }
        if hess.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: hess.len(),
            });
        }
        for i in 0..m {
            for j in 0..i {
                let (a, b) = (hess[i * m + j], hess[j * m + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidParameter("Hessian is not symmetric".into()));
                }
            }
        }
        Ok(Self { rho0, grad, hess })
    }

    /// Jet of `model` at `x`; gradient and Hessian fall back to central
    /// differences when the model has no closed form.
    pub fn from_model(model: &DensityModel, x: &[f64]) -> Result<Self> {
        let rho0 = model.eval(x)?;
        let m = x.len();
        let grad = match model.gradient(x) {
            Some(g) => g,
            None => fd_gradient(model, x),
        };
        let hess = match model.hessian(x) {
            Some(h) => h,
            None => {
                let step = 1e-4;
                let mut h = vec![0.0; m * m];
                let mut xp = x.to_vec();
                for j in 0..m {
                    xp[j] = x[j] + step;
                    let gp = fd_gradient(model, &xp);
                    xp[j] = x[j] - step;
                    let gm = fd_gradient(model, &xp);
                    xp[j] = x[j];
                    for i in 0..m {
                        h[i * m + j] = (gp[i] - gm[i]) / (2.0 * step);
                    }
                }
                for i in 0..m {
                    for j in 0..i {
                        let s = 0.5 * (h[i * m + j] + h[j * m + i]);
                        h[i * m + j] = s;
                        h[j * m + i] = s;
                    }
                }
                h
            }
        };
        Self::new(rho0, grad, hess)
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub(crate) fn hess_apply(&self, b: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.hess[i * m + j] * b[j]).sum())
            .collect()
    }
}

pub(crate) fn fd_gradient(model: &DensityModel, x: &[f64]) -> Vec<f64> {
    let step = 1e-6;
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            xp[k] = x[k] + step;
            let fp = model.eval_extended(&xp);
            xp[k] = x[k] - step;
            let fm = model.eval_extended(&xp);
            xp[k] = x[k];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exponent α = 2(p−1)/m of the conformal factor ρ^{−α}.
pub fn alpha(p: f64, m: usize) -> f64 {
    2.0 * (p - 1.0) / m as f64
}

/// Local series relating the Euclidean separation `d = ‖y − x‖` to the
/// continuum Fermat length `L` along the direction `u = (y − x)/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermatExpansions {
    pub u: Vec<f64>,
    pub euclid: f64,
    pub alpha: f64,
    pub rho0: f64,
    /// ⟨u, ∇ρ⟩.
    pub slope: f64,
    /// Coefficient of L² in `d(L)`.
    pub second: f64,
    /// Coefficient of L³ in `d(L)`.
    pub third: f64,
}

impl FermatExpansions {
    /// `‖y − x‖` from `L`, through third order.
    pub fn euclid_from_l(&self, l: f64) -> f64 {
        self.rho0.powf(0.5 * self.alpha) * l + self.second * l * l + self.third * l * l * l
    }

    /// `L` from `‖y − x‖`, through second order.
    pub fn l_from_euclid(&self, d: f64) -> f64 {
        self.rho0.powf(-0.5 * self.alpha)
            * (d - 0.5 * (0.5 * self.alpha) * self.slope / self.rho0 * d * d)
    }

    /// The second-order estimate of `L(x, y)`.
    pub fn l_estimate(&self) -> f64 {
        self.l_from_euclid(self.euclid)
    }
}

pub fn euclid_fermat_expansions(
    jet: &LocalDensityJet,
    x: &[f64],
    y: &[f64],
    p: f64,
    m: usize,
) -> Result<FermatExpansions> {
    if x.len() != jet.dim() || y.len() != jet.dim() {
        return Err(Error::DimensionMismatch {
            expected: jet.dim(),
            got: x.len().min(y.len()),
        });
    }
    let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let d = dot(&diff, &diff).sqrt();
    if d == 0.0 {
        return Err(Error::InvalidParameter("expansion needs x != y".into()));
    }
    let u: Vec<f64> = diff.iter().map(|v| v / d).collect();
    let a = alpha(p, m);
    let r = jet.rho0;
    let slope = dot(&u, &jet.grad);
    let gg = dot(&jet.grad, &jet.grad);
    let uhu = dot(&jet.hess_apply(&u), &u);
    let second = 0.5 * (0.5 * a) * slope * r.powf(a - 1.0);
    let third = r.powf(1.5 * a - 2.0)
        * (a * a / 96.0 * gg + (7.0 * a * a / 96.0 - a / 12.0) * slope * slope + a / 12.0 * r * uhu);
    Ok(FermatExpansions {
        u,
        euclid: d,
        alpha: a,
        rho0: r,
        slope,
        second,
        third,
    })
}

/// Upper bound on the sectional curvature of the density-weighted metric
/// given a base bound `k`, density ratio `beta` and derivative bounds `l1`, `l2`.
pub fn sectional_curvature_bound(k: f64, beta: f64, l1: f64, l2: f64, p: f64, m: usize) -> f64 {
    let mf = m as f64;
    let q = p - 1.0;
    beta.powf(alpha(p, m))
        * (k + 3.0 * beta * beta * q * q * l1 * l1 / (mf * mf)
            + 2.0 * beta * beta * q * l1 * l1 / mf
            + beta * q * l2 / mf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_jet() -> LocalDensityJet {
        LocalDensityJet::new(1.0, vec![1.0, 0.0], vec![0.0; 4]).unwrap()
    }

    #[test]
    fn jet_validation() {
        assert!(LocalDensityJet::new(0.0, vec![0.0], vec![0.0]).is_err());
        assert!(LocalDensityJet::new(1.0, vec![0.0, 0.0], vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(LocalDensityJet::new(1.0, vec![0.0, 0.0], vec![0.0; 3]).is_err());
        let model = DensityModel::linear(1.0).unwrap();
        let jet = LocalDensityJet::from_model(&model, &[0.0, 0.0]).unwrap();
        assert!((jet.rho0 - 1.0).abs() < 1e-12);
        assert!((jet.grad[0] - 1.0).abs() < 1e-12 && jet.grad[1].abs() < 1e-12);
    }

    #[test]
    fn flat_density_has_no_corrections() {
        let jet = LocalDensityJet::new(2.0, vec![0.0, 0.0], vec![0.0; 4]).unwrap();
        let e = euclid_fermat_expansions(&jet, &[0.0, 0.0], &[0.03, -0.04], 3.0, 2).unwrap();
        assert_eq!(e.second, 0.0);
        assert_eq!(e.third, 0.0);
        // α = 2: d = ρ₀ L
        assert!((e.euclid_from_l(0.1) - 0.2).abs() < 1e-15);
        for d in [1e-3, 0.05, 0.3] {
            assert!((e.euclid_from_l(e.l_from_euclid(d)) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn second_order_coefficient_along_gradient() {
        let jet = linear_jet();
        for p in [2.0, 3.0] {
            let e = euclid_fermat_expansions(&jet, &[0.0, 0.0], &[0.1, 0.0], p, 2).unwrap();
            let c = e.l_from_euclid(1.0) - e.l_from_euclid(0.0) - 1.0;
            // L = d − ½((p−1)/m) d² for ρ₀ = 1, u = e₁
            assert!((c + 0.5 * (p - 1.0) / 2.0).abs() < 1e-15);
        }
        let e = euclid_fermat_expansions(&jet, &[0.0, 0.0], &[0.0, 0.1], 3.0, 2).unwrap();
        assert!((e.l_estimate() - 0.1).abs() < 1e-15);
        assert!(euclid_fermat_expansions(&jet, &[0.0, 0.0], &[0.0, 0.0], 3.0, 2).is_err());
    }

    #[test]
    fn curvature_bound_examples() {
        assert!((sectional_curvature_bound(1.0, 2.0, 1.0, 1.0, 2.0, 2) - 18.0).abs() < 1e-12);
        assert_eq!(sectional_curvature_bound(0.7, 3.0, 5.0, 2.0, 1.0, 3), 0.7);
    }

    proptest! {
        #[test]
        fn curvature_bound_is_monotone(
            k in 0.0f64..5.0, beta in 1.0f64..4.0, l1 in 0.0f64..3.0, l2 in 0.0f64..3.0,
            p in 1.0f64..6.0, m in 1usize..5, bump in 0.01f64..1.0,
        ) {
            let base = sectional_curvature_bound(k, beta, l1, l2, p, m);
            prop_assert!(sectional_curvature_bound(k + bump, beta, l1, l2, p, m) >= base);
            prop_assert!(sectional_curvature_bound(k, beta + bump, l1, l2, p, m) >= base);
            prop_assert!(sectional_curvature_bound(k, beta, l1 + bump, l2, p, m) >= base);
            prop_assert!(sectional_curvature_bound(k, beta, l1, l2 + bump, p, m) >= base);
        }

        #[test]
        fn series_compose_to_identity(
            rho0 in 0.5f64..2.0, g0 in -1.0f64..1.0, g1 in -1.0f64..1.0,
            h00 in -1.0f64..1.0, h01 in -1.0f64..1.0, h11 in -1.0f64..1.0,
            theta in 0.0f64..6.28, p in 1.0f64..4.0,
        ) {
            let jet = LocalDensityJet::new(rho0, vec![g0, g1], vec![h00, h01, h01, h11]).unwrap();
            let y = [theta.cos(), theta.sin()];
            let e = euclid_fermat_expansions(&jet, &[0.0, 0.0], &y, p, 2).unwrap();
            // L(d) = a d + b d², d(L) = A L + B L² + C L³
            let a = rho0.powf(-0.5 * e.alpha);
            let b = -a * 0.25 * e.alpha * e.slope / rho0;
            let big_a = rho0.powf(0.5 * e.alpha);
            prop_assert!((big_a * b + e.second * a * a).abs() < 1e-12);
            let (bb, cc) = (e.second, e.third);
            for d in [0.02, 0.01, 0.005] {
                let err = (e.euclid_from_l(e.l_from_euclid(d)) - d).abs();
                let bound = (2.0 * bb * a * b + cc * a.powi(3)).abs() * d.powi(3)
                    + (bb * b * b + 3.0 * cc * a * a * b).abs() * d.powi(4)
                    + (3.0 * cc * a * b * b).abs() * d.powi(5)
                    + (cc * b.powi(3)).abs() * d.powi(6);
                prop_assert!(err <= 1.0001 * bound + 1e-15, "d={d} err={err} bound={bound}");
            }
        }
    }
}
