//! Point clouds drawn from density models.

mod cloud;
mod density;
pub mod quadrature;

pub use cloud::PointCloud;
pub(crate) use cloud::euclid;
pub use density::{
    circle_param, circle_point, DensityKind, DensityModel, Domain, Gaussian, CIRCLE_RADIUS,
    NORMALIZATION_NODES,
};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng, POISSON_COUNT_STREAM, SAMPLING_STREAM};

/// Normalized density at `x`; errors outside the domain.
pub fn eval_density(model: &DensityModel, x: &[f64]) -> Result<f64> {
    model.eval(x)
}

/// `n` i.i.d. draws by rejection against a uniform envelope on the domain.
pub fn sample_iid(model: &DensityModel, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample_iid needs n >= 1".into()));
    }
    let mut rng = stream(seed, SAMPLING_STREAM);
    draw(model, n, seed, &mut rng)
}

/// Poisson point process with intensity `intensity_n · ρ`.
pub fn sample_ppp(model: &DensityModel, intensity_n: f64, seed: u64) -> Result<PointCloud> {
    if !(intensity_n > 0.0 && intensity_n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "PPP intensity must be positive, got {intensity_n}"
        )));
    }
    let mut count_rng = stream(seed, POISSON_COUNT_STREAM);
    let poisson = Poisson::new(intensity_n)
        .map_err(|e| Error::InvalidParameter(format!("Poisson({intensity_n}): {e}")))?;
    let count = poisson.sample(&mut count_rng) as usize;
    let mut rng = stream(seed, SAMPLING_STREAM);
    let mut cloud = draw(model, count, seed, &mut rng)?;
    cloud.ppp_count = Some(count);
    Ok(cloud)
}

fn draw(model: &DensityModel, n: usize, seed: u64, rng: &mut StreamRng) -> Result<PointCloud> {
    let d = model.dim();
    let bound = model.sup();
    let mut coords = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d];
    let mut accepted = 0;
    while accepted < n {
        propose(model.domain(), rng, &mut x);
        let v = model.eval(&x)?;
        if !v.is_finite() || v <= 0.0 || v > bound * (1.0 + 1e-9) {
            return Err(Error::NonfiniteDensity {
                point: x.clone(),
                value: v,
                bound,
            });
        }
        if rng.random::<f64>() * bound < v {
            coords.extend_from_slice(&x);
            accepted += 1;
        }
    }
    let mut cloud = PointCloud::from_flat(coords, d, model.intrinsic_dim())?;
    cloud.seed = seed;
    cloud.model_tag = model.tag();
    Ok(cloud)
}

fn propose(domain: &Domain, rng: &mut StreamRng, x: &mut [f64]) {
    match domain {
        Domain::Box { lo, hi } => {
            for k in 0..x.len() {
                x[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
            }
        }
        Domain::UnitDisk => loop {
            let a = 2.0 * rng.random::<f64>() - 1.0;
            let b = 2.0 * rng.random::<f64>() - 1.0;
            if a * a + b * b <= 1.0 {
                x[0] = a;
                x[1] = b;
                break;
            }
        },
        Domain::Circle => {
            let p = circle_point(rng.random::<f64>());
            x[0] = p[0];
            x[1] = p[1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_box_mean_within_three_sigma() {
        let m = DensityModel::uniform(Domain::unit_square()).unwrap();
        let c = sample_iid(&m, 1000, 7).unwrap();
        let sigma = (1.0f64 / 12.0 / 1000.0).sqrt();
        for k in 0..2 {
            let mean = c.iter().map(|p| p[k]).sum::<f64>() / 1000.0;
            assert!((mean - 0.5).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn linear_first_moment() {
        let m = DensityModel::linear(1.0).unwrap();
        let n = 100_000;
        let c = sample_iid(&m, n, 1).unwrap();
        // E[x1] = 1/12, E[x1²] = 1/12, Var = 1/12 − 1/144
        let sigma = ((1.0 / 12.0 - 1.0 / 144.0) / n as f64).sqrt();
        let mean = c.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / 12.0).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn single_point_in_domain() {
        for m in [
            DensityModel::disk_valley(0.25).unwrap(),
            DensityModel::circle_sine(0.5).unwrap(),
            DensityModel::gaussian_mixture_bg(0.3).unwrap(),
        ] {
            let c = sample_iid(&m, 1, 99).unwrap();
            assert_eq!(c.len(), 1);
            assert!(m.contains(c.point(0)));
        }
    }

    #[test]
    fn deterministic_bytes() {
        let m = DensityModel::disk_valley(0.25).unwrap();
        let a = sample_iid(&m, 300, 5).unwrap().to_csv();
        let b = sample_iid(&m, 300, 5).unwrap().to_csv();
        assert_eq!(a, b);
        assert_ne!(a, sample_iid(&m, 300, 6).unwrap().to_csv());
    }

    #[test]
    fn ppp_counts_are_poisson() {
        let m = DensityModel::uniform(Domain::unit_square()).unwrap();
        let reps = 200;
        let total: usize = (0..reps)
            .map(|s| sample_ppp(&m, 500.0, s).unwrap().ppp_count.unwrap())
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 500.0).abs() < 3.0 * (500.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn tiny_intensity_gives_empty_clouds() {
        let m = DensityModel::uniform(Domain::unit_square()).unwrap();
        let empties = (0..50)
            .filter(|&s| sample_ppp(&m, 0.01, s).unwrap().is_empty())
            .count();
        assert!(empties > 40);
    }

    #[test]
    fn chi_square_uniform_grid() {
        let m = DensityModel::uniform(Domain::unit_square()).unwrap();
        let n = 100_000;
        let c = sample_iid(&m, n, 11).unwrap();
        let mut counts = [0usize; 100];
        for p in c.iter() {
            let i = ((p[0] * 10.0) as usize).min(9);
            let j = ((p[1] * 10.0) as usize).min(9);
            counts[i * 10 + j] += 1;
        }
        let e = n as f64 / 100.0;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // chi-square with 99 dof, upper 0.001 quantile
        assert!(chi2 < 148.23, "{chi2}");
    }
}
