//! Monte-Carlo estimates of the time constant μ of homogeneous Poisson
//! processes: `λ^{(p−1)/m} ℓ_p^p(0, r e₁) / r → μ`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{fermat_sssp, FermatMode, FermatParams};
use crate::rng::{stream, REPLICATE_STREAM_BASE};
use crate::sampling::PointCloud;

/// Smallest admissible expected point count per replicate.
pub const MIN_EXPECTED_POINTS: f64 = 100.0;
/// Default padding around the segment `[0, r e₁]`, as a fraction of `r`.
pub const DEFAULT_PADDING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MuEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√replicates`.
    pub stderr: f64,
    pub replicates: usize,
    pub r: f64,
    pub intensity: f64,
    pub p: f64,
    pub m: usize,
    pub padding: f64,
    /// Per-replicate values in replicate order.
    pub values: Vec<f64>,
    /// Empty draws that were resampled.
    pub resampled: usize,
}

impl MuEstimate {
    /// CSV `replicate,value` followed by a `#` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replicate,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v:.16e}\n"));
        }
        out.push_str(&format!(
            "# mean={:.16e},stderr={:.16e},replicates={},r={},intensity={},p={},m={},padding={},resampled={}\n",
            self.mean, self.stderr, self.replicates, self.r, self.intensity, self.p, self.m, self.padding, self.resampled
        ));
        out
    }
}

pub fn estimate_mu(p: f64, m: usize, r: f64, intensity: f64, replicates: usize, seed: u64) -> Result<MuEstimate> {
    estimate_mu_padded(p, m, r, intensity, replicates, seed, DEFAULT_PADDING)
}

/// As [`estimate_mu`] on the box `[−pad·r, (1+pad)·r] × [−pad·r, pad·r]^{m−1}`.
pub fn estimate_mu_padded(
    p: f64,
    m: usize,
    r: f64,
    intensity: f64,
    replicates: usize,
    seed: u64,
    padding: f64,
) -> Result<MuEstimate> {
    let params = FermatParams::exact(p, m);
    params.validate()?;
    if !(r > 0.0 && r.is_finite()) || !(padding > 0.0) {
        return Err(Error::InvalidParameter(format!("need r > 0 and padding > 0, got r = {r}, padding = {padding}")));
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicates, got {replicates}")));
    }
    let mut lo = vec![-padding * r; m];
    let mut hi = vec![padding * r; m];
    hi[0] = (1.0 + padding) * r;
    lo[0] = -padding * r;
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let expected = intensity * volume;
    if !(expected >= MIN_EXPECTED_POINTS) || !expected.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "intensity × box volume = {expected} is below {MIN_EXPECTED_POINTS}"
        )));
    }
    let poisson = Poisson::new(expected).map_err(|e| Error::InvalidParameter(format!("Poisson({expected}): {e}")))?;
    let scale = intensity.powf((p - 1.0) / m as f64) / r;

    let runs: Vec<(f64, usize)> = (0..replicates)
        .into_par_iter()
        .map(|i| -> Result<(f64, usize)> {
            let mut rng = stream(seed, REPLICATE_STREAM_BASE + i as u64);
            let mut resampled = 0;
            let count = loop {
                let c = poisson.sample(&mut rng) as usize;
                if c > 0 {
                    break c;
                }
                resampled += 1;
            };
            // endpoints first: index 0 is the origin, index 1 is r e₁
            let mut coords = vec![0.0; m];
            coords.extend((0..m).map(|k| if k == 0 { r } else { 0.0 }));
            for _ in 0..count {
                for k in 0..m {
                    coords.push(lo[k] + (hi[k] - lo[k]) * rng.random::<f64>());
                }
            }
            let cloud = PointCloud::from_flat(coords, m, m)?;
            Ok((scale * exact_cost(&cloud, p, m, r)?, resampled))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = runs.iter().map(|x| x.0).collect();
    let resampled = runs.iter().map(|x| x.1).sum();
    let nf = replicates as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    Ok(MuEstimate {
        mean,
        stderr: (var / nf).sqrt(),
        replicates,
        r,
        intensity,
        p,
        m,
        padding,
        values,
        resampled,
    })
}

/// Exact `ℓ_p^p` between points 0 and 1 of `cloud`. A k-NN path gives an
/// upper bound `U`; every hop of an optimal path then costs at most `U`, so
/// the radius-limited search below `U` is exact.
fn exact_cost(cloud: &PointCloud, p: f64, m: usize, r: f64) -> Result<f64> {
    let direct = r.powf(p);
    let bound = match fermat_sssp(cloud, &FermatParams { p, m, mode: FermatMode::KnnAuto }, 0) {
        Ok(d) => d[1].min(direct),
        Err(Error::DisconnectedGraph { .. }) => direct,
        Err(e) => return Err(e),
    };
    let within = FermatParams {
        p,
        m,
        mode: FermatMode::Within(bound * (1.0 + 1e-12)),
    };
    Ok(fermat_sssp(cloud, &within, 0)?[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_one_is_exactly_one() {
        for m in [1, 2, 3] {
            let est = estimate_mu(1.0, m, 1.0, 200.0, 4, 3).unwrap();
            assert!(est.values.iter().all(|v| (v - 1.0).abs() < 1e-12), "{:?}", est.values);
        }
    }

    #[test]
    fn one_dimensional_constant_is_gamma() {
        // on a line every intermediate point is used and gaps are Exp(λ):
        // μ = E[g^p] λ^p = Γ(p + 1)
        for (p, gamma) in [(2.0, 2.0), (3.0, 6.0)] {
            let est = estimate_mu(p, 1, 1.0, 400.0, 40, 11).unwrap();
            assert!((est.mean - gamma).abs() < 4.0 * est.stderr + 0.02 * gamma, "{est:?}");
        }
    }

    #[test]
    fn pruned_search_matches_complete_graph() {
        let mut rng = stream(3, 0);
        for p in [1.5, 2.0, 3.0] {
            let mut coords = vec![0.0, 0.0, 1.0, 0.0];
            for _ in 0..300 {
                coords.push(-0.5 + 2.0 * rng.random::<f64>());
                coords.push(-0.5 + rng.random::<f64>());
            }
            let cloud = PointCloud::from_flat(coords, 2, 2).unwrap();
            let full = fermat_sssp(&cloud, &FermatParams::exact(p, 2), 0).unwrap()[1];
            assert!((exact_cost(&cloud, p, 2, 1.0).unwrap() - full).abs() <= 1e-14 * full);
        }
    }

    #[test]
    fn summary_and_validation() {
        let est = estimate_mu(2.0, 2, 1.0, 60.0, 8, 5).unwrap();
        assert_eq!(est.values.len(), 8);
        let sd = (est.values.iter().map(|v| (v - est.mean).powi(2)).sum::<f64>() / 7.0).sqrt();
        assert!((est.stderr - sd / 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(est, estimate_mu(2.0, 2, 1.0, 60.0, 8, 5).unwrap());
        assert!(est.to_csv().lines().last().unwrap().starts_with("# mean="));
        assert!(estimate_mu(2.0, 2, 1.0, 10.0, 8, 5).is_err());
        assert!(estimate_mu(2.0, 2, 1.0, 60.0, 1, 5).is_err());
        assert!(estimate_mu(0.5, 2, 1.0, 60.0, 4, 5).is_err());
    }

    #[test]
    fn scale_free_under_intensity_change() {
        // (λ, r) and (4λ, r/2) in 2-D: same expected count and same limit
        let a = estimate_mu(2.0, 2, 1.0, 300.0, 60, 1).unwrap();
        let b = estimate_mu(2.0, 2, 0.5, 1200.0, 60, 2).unwrap();
        let z = (a.mean - b.mean).abs() / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!(z < 4.0, "{} vs {}", a.mean, b.mean);
    }
}
