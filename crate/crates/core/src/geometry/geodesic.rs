use rayon::prelude::*;

use super::expansion::{alpha, dot, fd_gradient, LocalDensityJet};
use crate::error::{Error, Result};
use crate::sampling::{DensityModel, Domain};

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub t: f64,
}

impl GeodesicState {
    /// Unit-speed start at `x` in Euclidean direction `b` (normalized here).
    pub fn launch(model: &DensityModel, x: &[f64], b: &[f64], p: f64) -> Result<Self> {
        check_flat(model)?;
        let m = model.intrinsic_dim();
        let rho = model.eval(x)?;
        let nb = dot(b, b).sqrt();
        if b.len() != x.len() || !(nb > 0.0) {
            return Err(Error::InvalidParameter("direction must be a nonzero vector".into()));
        }
        let s = rho.powf(0.5 * alpha(p, m)) / nb;
        Ok(Self {
            position: x.to_vec(),
            velocity: b.iter().map(|v| v * s).collect(),
            t: 0.0,
        })
    }

    /// Speed `ρ(γ)^{−α/2}‖γ'‖` measured in the density-weighted metric.
    pub fn fermat_speed(&self, model: &DensityModel, p: f64) -> f64 {
        let rho = model.eval_extended(&self.position);
        rho.powf(-0.5 * alpha(p, model.intrinsic_dim())) * dot(&self.velocity, &self.velocity).sqrt()
    }
}

fn check_flat(model: &DensityModel) -> Result<()> {
    match model.domain() {
        Domain::Circle => Err(Error::InvalidModel(
            "geodesics are only integrated on flat domains".into(),
        )),
        _ => Ok(()),
    }
}

fn rho_grad(model: &DensityModel, x: &[f64]) -> (f64, Vec<f64>) {
    let rho = model.eval_extended(x);
    let g = model.gradient(x).unwrap_or_else(|| fd_gradient(model, x));
    (rho, g)
}

/// Acceleration of the geodesic equation of `ρ^{−α}·δ`:
/// ẍ = (α/ρ)⟨ẋ,∇ρ⟩ẋ − (α/2ρ)|ẋ|²∇ρ.
fn acceleration(model: &DensityModel, a: f64, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    let (rho, g) = rho_grad(model, x);
    if !(rho > 0.0 && rho.is_finite()) {
        return None;
    }
    let vg = dot(v, &g);
    let vv = dot(v, v);
    Some(
        v.iter()
            .zip(&g)
            .map(|(vi, gi)| a / rho * vg * vi - 0.5 * a / rho * vv * gi)
            .collect(),
    )
}

/// One classical RK4 step of the first-order system `(x, v)`.
pub fn geodesic_ode_step(model: &DensityModel, state: &GeodesicState, p: f64, dt: f64) -> Result<GeodesicState> {
    let a = alpha(p, model.intrinsic_dim());
    let t1 = state.t + dt;
    let left = || Error::LeftDomain { t: t1 };
    let x0 = &state.position;
    let v0 = &state.velocity;
    let axpy = |x: &[f64], s: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + s * b).collect() };

    let k1x = v0.clone();
    let k1v = acceleration(model, a, x0, v0).ok_or_else(left)?;
    let x2 = axpy(x0, 0.5 * dt, &k1x);
    let k2x = axpy(v0, 0.5 * dt, &k1v);
    let k2v = acceleration(model, a, &x2, &k2x).ok_or_else(left)?;
    let x3 = axpy(x0, 0.5 * dt, &k2x);
    let k3x = axpy(v0, 0.5 * dt, &k2v);
    let k3v = acceleration(model, a, &x3, &k3x).ok_or_else(left)?;
    let x4 = axpy(x0, dt, &k3x);
    let k4x = axpy(v0, dt, &k3v);
    let k4v = acceleration(model, a, &x4, &k4x).ok_or_else(left)?;

    let comb = |base: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..base.len())
            .map(|i| base[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    let position = comb(x0, &k1x, &k2x, &k3x, &k4x);
    let velocity = comb(v0, &k1v, &k2v, &k3v, &k4v);
    if !model.contains(&position) {
        return Err(left());
    }
    Ok(GeodesicState { position, velocity, t: t1 })
}

/// Integrates from `start` to time `t_end` with steps of at most `dt`
/// (the last step is shortened to land on `t_end`). Returns every state.
pub fn integrate_geodesic(
    model: &DensityModel,
    start: GeodesicState,
    p: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<GeodesicState>> {
    if !(dt > 0.0) || !(t_end >= start.t) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_end >= t, got dt = {dt}")));
    }
    let steps = ((t_end - start.t) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut trace = Vec::with_capacity(steps + 1);
    let t0 = start.t;
    trace.push(start);
    for k in 1..=steps {
        let last = trace.last().unwrap();
        let target = if k == steps { t_end } else { t0 + k as f64 * dt };
        let mut next = geodesic_ode_step(model, last, p, target - last.t)?;
        next.t = target;
        trace.push(next);
    }
    Ok(trace)
}

/// CSV `t,x1,...,xm` of a geodesic trace.
pub fn trace_to_csv(trace: &[GeodesicState]) -> String {
    let m = trace.first().map_or(0, |s| s.position.len());
    let mut out = String::from("t");
    for k in 1..=m {
        out.push_str(&format!(",x{k}"));
    }
    out.push('\n');
    for s in trace {
        out.push_str(&format!("{:.16e}", s.t));
        for x in &s.position {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Third-order Taylor polynomial of the unit-speed geodesic leaving the
/// jet's base point in direction `b`; returns the displacement from it.
pub fn geodesic_taylor(jet: &LocalDensityJet, b: &[f64], t: f64, p: f64, m: usize) -> Vec<f64> {
    let a = alpha(p, m);
    let r = jet.rho0;
    let g = &jet.grad;
    let hb = jet.hess_apply(b);
    let bg = dot(b, g);
    let k = 1.5 * a;
    let c1 = (a * a / 3.0 - a / 6.0) * r.powf(k - 2.0) * bg * bg + a / 6.0 * r.powf(k - 1.0) * dot(&hb, b)
        - a * a / 12.0 * r.powf(k - 2.0) * dot(g, g);
    let c2 = -a / 12.0 * r.powf(k - 1.0);
    let c3 = (a / 12.0 - a * a / 6.0) * r.powf(k - 2.0) * bg;
    let lead = r.powf(0.5 * a);
    let quad = a * r.powf(a - 1.0);
    (0..b.len())
        .map(|i| {
            lead * b[i] * t
                + quad * (0.5 * bg * b[i] - 0.25 * g[i]) * t * t
                + (c1 * b[i] + c2 * hb[i] + c3 * g[i]) * t * t * t
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallRay {
    pub angle: f64,
    /// Final position: the endpoint at time `T`, or the last in-domain
    /// position if the ray left the domain.
    pub endpoint: Vec<f64>,
    /// Time reached; `< T` exactly when the ray was flagged.
    pub t_reached: f64,
    pub left_domain: bool,
}

/// Endpoints of unit-speed geodesics from `center` in `n_dirs` equally
/// spaced directions, ordered by launch angle.
#[derive(Debug, Clone, PartialEq)]
pub struct FermatBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub rays: Vec<BallRay>,
}

impl FermatBall {
    /// Closed polyline: the first vertex is repeated at the end.
    pub fn polyline(&self) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = self.rays.iter().map(|r| r.endpoint.clone()).collect();
        if let Some(first) = pts.first().cloned() {
            pts.push(first);
        }
        pts
    }

    pub fn flagged(&self) -> usize {
        self.rays.iter().filter(|r| r.left_domain).count()
    }

    /// CSV `t,x1,x2` of the closed polyline, `t` being the time each ray reached.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2\n");
        let n = self.rays.len();
        for k in 0..=n {
            if n == 0 {
                break;
            }
            let r = &self.rays[k % n];
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                r.t_reached, r.endpoint[0], r.endpoint[1]
            ));
        }
        out
    }
}

pub fn fermat_ball(
    model: &DensityModel,
    center: &[f64],
    radius: f64,
    n_dirs: usize,
    p: f64,
    dt: f64,
) -> Result<FermatBall> {
    check_flat(model)?;
    if model.dim() != 2 {
        return Err(Error::InvalidParameter("geodesic balls are drawn in 2-D only".into()));
    }
    if n_dirs < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 directions, got {n_dirs}")));
    }
    model.eval(center)?;
    let rays = (0..n_dirs)
        .into_par_iter()
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n_dirs as f64;
            let b = [angle.cos(), angle.sin()];
            let mut state = GeodesicState::launch(model, center, &b, p)?;
            let steps = (radius / dt - 1e-9).ceil().max(0.0) as usize;
            for s in 1..=steps {
                let target = if s == steps { radius } else { s as f64 * dt };
                match geodesic_ode_step(model, &state, p, target - state.t) {
                    Ok(mut next) => {
                        next.t = target;
                        state = next;
                    }
                    Err(Error::LeftDomain { .. }) => {
                        return Ok(BallRay {
                            angle,
                            endpoint: state.position,
                            t_reached: state.t,
                            left_domain: true,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(BallRay {
                angle,
                endpoint: state.position,
                t_reached: state.t,
                left_domain: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FermatBall {
        center: center.to_vec(),
        radius,
        rays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> DensityModel {
        DensityModel::linear(1.0).unwrap()
    }

    fn shoot(model: &DensityModel, b: &[f64], p: f64, t: f64, dt: f64) -> Vec<f64> {
        let s = GeodesicState::launch(model, &[0.0, 0.0], b, p).unwrap();
        integrate_geodesic(model, s, p, t, dt).unwrap().pop().unwrap().position
    }

    #[test]
    fn constant_density_is_a_straight_line() {
        let model = DensityModel::uniform(Domain::centered_square()).unwrap();
        let b = [0.6, 0.8];
        for p in [1.0, 2.0, 4.0] {
            let end = shoot(&model, &b, p, 0.3, 0.01);
            assert!((end[0] - 0.18).abs() < 1e-14 && (end[1] - 0.24).abs() < 1e-14);
        }
    }

    #[test]
    fn second_order_term_matches_integration() {
        let model = linear();
        let jet = LocalDensityJet::from_model(&model, &[0.0, 0.0]).unwrap();
        let t = 1e-3;
        let end = shoot(&model, &[0.0, 1.0], 3.0, t, t / 4.0);
        // (γ(t) − ρ^{α/2} b t)/t² → (−0.5, 0)
        let c = [end[0] / (t * t), (end[1] - t) / (t * t)];
        assert!((c[0] + 0.5).abs() < 1e-3 && c[1].abs() < 1e-3, "{c:?}");
        let tay = geodesic_taylor(&jet, &[1.0, 0.0], 1.0, 3.0, 2);
        let lin = geodesic_taylor(&jet, &[1.0, 0.0], 1.0, 3.0, 2);
        assert_eq!(tay, lin);
        // along e₁ the quadratic coefficient is α(½ − ¼) = +½ in x₁
        let q = geodesic_taylor(&jet, &[1.0, 0.0], 1e-4, 3.0, 2)[0] - 1e-4;
        assert!((q / 1e-8 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn taylor_is_order_four() {
        let model = linear();
        let jet = LocalDensityJet::from_model(&model, &[0.0, 0.0]).unwrap();
        for b in [[0.0, 1.0], [1.0, 0.0], [-0.6, 0.8]] {
            let mut ratios = Vec::new();
            for t in [0.05, 0.1, 0.2] {
                let ode = shoot(&model, &b, 3.0, t, 1e-4);
                let tay = geodesic_taylor(&jet, &b, t, 3.0, 2);
                let err = ((ode[0] - tay[0]).powi(2) + (ode[1] - tay[1]).powi(2)).sqrt();
                ratios.push(err / t.powi(4));
            }
            assert!(ratios.iter().all(|r| *r < 2.0), "{b:?}: {ratios:?}");
        }
        let flat = LocalDensityJet::new(1.5, vec![0.0, 0.0], vec![0.0; 4]).unwrap();
        let d = geodesic_taylor(&flat, &[0.0, 1.0], 0.2, 3.0, 2);
        assert_eq!(d, vec![0.0, 1.5 * 0.2]);
    }

    #[test]
    fn taylor_with_curvature_terms_is_order_four() {
        let model = DensityModel::gaussian_mixture_bg(0.3).unwrap();
        let x = [0.2, 0.35];
        let jet = LocalDensityJet::from_model(&model, &x).unwrap();
        let b = [0.8f64.cos(), 0.8f64.sin()];
        let mut ratios = Vec::new();
        for t in [0.02, 0.04, 0.08] {
            let s = GeodesicState::launch(&model, &x, &b, 2.0).unwrap();
            let end = integrate_geodesic(&model, s, 2.0, t, 1e-4).unwrap().pop().unwrap().position;
            let tay = geodesic_taylor(&jet, &b, t, 2.0, 2);
            let err = ((end[0] - x[0] - tay[0]).powi(2) + (end[1] - x[1] - tay[1]).powi(2)).sqrt();
            ratios.push(err / t.powi(4));
        }
        // bounded and not growing under refinement
        assert!(ratios[0] < 2.0 * ratios[2] + 1e-6 && ratios[2] < 1e3, "{ratios:?}");
    }

    #[test]
    fn euclid_series_is_third_order_along_shot_geodesics() {
        let model = DensityModel::gaussian_mixture_bg(0.3).unwrap();
        let x = [0.3, 0.4];
        let jet = LocalDensityJet::from_model(&model, &x).unwrap();
        for angle in [0.3, 2.0, 4.4] {
            let b = [f64::cos(angle), f64::sin(angle)];
            let mut ratios = Vec::new();
            for l in [0.02, 0.04, 0.08] {
                let s = GeodesicState::launch(&model, &x, &b, 2.5).unwrap();
                let end = integrate_geodesic(&model, s, 2.5, l, 1e-4).unwrap().pop().unwrap().position;
                let e = crate::geometry::euclid_fermat_expansions(&jet, &x, &end, 2.5, 2).unwrap();
                ratios.push((e.euclid_from_l(l) - e.euclid).abs() / l.powi(4));
            }
            assert!(ratios[0] < 2.0 * ratios[2] + 1e-6 && ratios[2] < 1e3, "{angle}: {ratios:?}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let model = linear();
        let b = [0.3, 0.9];
        let reference = shoot(&model, &b, 3.0, 0.3, 0.3 / 1024.0);
        let e = |dt: f64| {
            let x = shoot(&model, &b, 3.0, 0.3, dt);
            ((x[0] - reference[0]).powi(2) + (x[1] - reference[1]).powi(2)).sqrt()
        };
        let ratio = e(0.3 / 16.0) / e(0.3 / 32.0);
        assert!((ratio - 16.0).abs() < 2.5, "ratio {ratio}");
    }

    #[test]
    fn unit_speed_is_conserved() {
        let model = linear();
        let s = GeodesicState::launch(&model, &[0.0, 0.0], &[-1.0, 0.3], 3.0).unwrap();
        assert!((s.fermat_speed(&model, 3.0) - 1.0).abs() < 1e-15);
        let trace = integrate_geodesic(&model, s, 3.0, 0.5, 1e-3).unwrap();
        let drift = trace
            .iter()
            .map(|s| (s.fermat_speed(&model, 3.0) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-6, "{drift}");
        let csv = trace_to_csv(&trace[..2]);
        assert!(csv.starts_with("t,x1,x2\n0.0000000000000000e0,"));
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let model = linear();
        let s = GeodesicState::launch(&model, &[0.0, 0.0], &[1.0, 0.0], 3.0).unwrap();
        match integrate_geodesic(&model, s, 3.0, 2.0, 0.01) {
            Err(Error::LeftDomain { t }) => assert!(t > 0.2 && t < 0.5),
            other => panic!("{other:?}"),
        }
        let circle = DensityModel::circle_sine(0.5).unwrap();
        assert!(GeodesicState::launch(&circle, &[0.1, 0.0], &[0.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn uniform_ball_is_a_circle() {
        let model = DensityModel::uniform(Domain::centered_square()).unwrap();
        let ball = fermat_ball(&model, &[0.0, 0.0], 0.2, 64, 3.0, 1e-3).unwrap();
        for r in &ball.rays {
            let rad = (r.endpoint[0].powi(2) + r.endpoint[1].powi(2)).sqrt();
            assert!((rad - 0.2).abs() < 1e-8);
        }
        let poly = ball.polyline();
        assert_eq!(poly.len(), 65);
        assert_eq!(poly[0], poly[64]);
        assert_eq!(ball.to_csv().lines().count(), 66);
    }

    fn inside_polygon(poly: &[Vec<f64>], q: &[f64]) -> bool {
        let mut inside = false;
        for w in poly.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if (a[1] > q[1]) != (b[1] > q[1]) {
                let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if q[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn extent(ball: &FermatBall, sign: f64) -> f64 {
        ball.rays.iter().map(|r| sign * r.endpoint[0]).fold(f64::MIN, f64::max)
    }

    #[test]
    fn balls_lean_toward_high_density_and_nest() {
        let model = linear();
        let small = fermat_ball(&model, &[0.0, 0.0], 0.15, 90, 3.0, 1e-3).unwrap();
        let large = fermat_ball(&model, &[0.0, 0.0], 0.35, 90, 3.0, 1e-3).unwrap();
        assert_eq!(small.flagged() + large.flagged(), 0);
        assert!(extent(&small, 1.0) > extent(&small, -1.0));
        assert!(extent(&large, 1.0) > extent(&large, -1.0));
        let outer = large.polyline();
        for r in &small.rays {
            assert!(inside_polygon(&outer, &r.endpoint));
        }
        let flagged = fermat_ball(&model, &[0.0, 0.0], 1.5, 16, 3.0, 1e-2).unwrap();
        assert!(flagged.flagged() > 0);
        assert!(flagged.rays.iter().all(|r| model.contains(&r.endpoint)));
    }
}
