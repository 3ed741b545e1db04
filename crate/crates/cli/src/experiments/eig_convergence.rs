//! Fermat Laplacian spectra against their degree-normalized Euclidean
//! counterparts across sample sizes.
//!
//! Three operators share one bandwidth `h` per draw:
//! the Fermat `(p, s)` Laplacian on `ℓ̃_p^p / μ`, the Euclidean
//! degree-normalized Laplacian with `j = (s−1)p + 1`, `q = j + 2(p−1)/m`,
//! and the plain Euclidean random walk. Both rescaled operators approximate
//! the same continuum operator with the same constant, so their unscaled
//! spectra are compared directly.

use std::time::Instant;

use fermat_core::graph::{
    bandwidth_rule, build_weights, build_weights_euclidean, laplacian_degree_normalized, laplacian_ps,
    matching_degree_params, rw_laplacian,
};
use fermat_core::kv::fmt_f64;
use fermat_core::metric::{fermat_pairwise, normalization_factor, normalize_fermat};
use fermat_core::spectral::eig_laplacian;
use fermat_core::{estimate_mu, sample_iid, DensityModel, EigOptions, FermatMode, FermatParams, KeyValues, PointCloud};

use super::{rel_gap, replicate_seed};
use crate::commands::write_sidecars;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};
use crate::output::{median, num, Csv, OutDir};
use crate::svg;

pub fn model(cfg: &ExperimentConfig) -> Result<DensityModel, CliError> {
    let tau = cfg.f64("tau")?;
    match cfg.str("model")? {
        "disk_valley" => DensityModel::disk_valley(tau),
        "gaussian_mixture_bg" => DensityModel::gaussian_mixture_bg(tau),
        other => return Err(CliError::Config(format!("unknown model `{other}`"))),
    }
    .context(|| "model".into())
}

/// Bottom spectra of the three operators on one cloud, with wall times in seconds.
pub struct Spectra {
    pub fermat: Vec<f64>,
    pub dn: Vec<f64>,
    pub plain: Vec<f64>,
    pub seconds: [f64; 3],
}

pub fn spectra(cloud: &PointCloud, p: f64, s: f64, h: f64, mu: f64, k: usize, seed: u64) -> Result<Spectra, CliError> {
    let n = cloud.len();
    let m = cloud.intrinsic_dim;
    let opts = EigOptions {
        seed,
        ..EigOptions::default().allowing_disconnected()
    };
    let at = |what: &'static str| move || format!("n = {n}: {what}");

    let t0 = Instant::now();
    let fp = FermatParams {
        p,
        m,
        mode: FermatMode::Within(mu * h / normalization_factor(n, p, m) * (1.0 + 1e-9)),
    };
    let dm = fermat_pairwise(cloud, &fp).context(at("Fermat distances"))?;
    let nd = normalize_fermat(&dm, n, &fp).context(at("normalization"))?.scaled(1.0 / mu);
    let g = build_weights(&nd, h, n, m).context(at("Fermat weights"))?;
    let lap = laplacian_ps(&g, s).context(at("Fermat Laplacian"))?;
    let fermat = eig_laplacian(&lap, k, &opts).context(at("Fermat eigensolver"))?.eigenvalues;
    let t_fermat = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (j, q) = matching_degree_params(p, s, m);
    let ge = build_weights_euclidean(cloud, h, m).context(at("Euclidean weights"))?;
    let lap = laplacian_degree_normalized(&ge, j, q).context(at("degree-normalized Laplacian"))?;
    let dn = eig_laplacian(&lap, k, &opts).context(at("degree-normalized eigensolver"))?.eigenvalues;
    let t_dn = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let ge = build_weights_euclidean(cloud, h, m).context(at("Euclidean weights"))?;
    let lap = rw_laplacian(&ge, h, m).context(at("random walk Laplacian"))?.with_scale(1.0);
    let plain = eig_laplacian(&lap, k, &opts).context(at("random walk eigensolver"))?.eigenvalues;
    let t_plain = t0.elapsed().as_secs_f64();

    Ok(Spectra {
        fermat,
        dn,
        plain,
        seconds: [t_fermat, t_dn, t_plain],
    })
}

/// Median over `k ≥ 2` of the relative gap between two spectra; `k = 1` is
/// the zero eigenvalue of both.
pub fn median_gap(a: &[f64], b: &[f64]) -> f64 {
    let gaps: Vec<f64> = a.iter().zip(b).skip(1).map(|(x, y)| rel_gap(*x, *y)).collect();
    median(&gaps)
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let model = model(cfg)?;
    let seed = cfg.u64("seed")?;
    let p = cfg.f64("p")?;
    let s = cfg.f64("s")?;
    let k = cfg.usize("k_eig")?;
    let m = model.intrinsic_dim();
    let mut prov = KeyValues::new();
    let mu = match cfg.opt_f64("mu")? {
        Some(mu) => mu,
        None => {
            let est = estimate_mu(p, m, 1.0, cfg.f64("mu_intensity")?, cfg.usize("mu_replicates")?, seed)
                .context(|| "time constant".into())?;
            prov.set("mu_stderr", fmt_f64(est.stderr));
            est.mean
        }
    };
    prov.set("mu", fmt_f64(mu));
    prov.set("model", model.tag());

    let mut rows = Csv::new(&["replicate", "n", "k", "lambda_fermat", "lambda_dn_euclid", "lambda_plain_euclid"]);
    let mut timings = Csv::new(&["replicate", "n", "seconds_fermat", "seconds_dn_euclid", "seconds_plain_euclid"]);
    let mut summary = Csv::new(&["n", "h", "median_rel_gap_dn", "median_rel_gap_plain"]);
    for &n in &cfg.usize_list("n_grid")? {
        let h = cfg.f64("h_scale")?
            * bandwidth_rule(n, m, cfg.f64("eps")?, p, model.beta(), 1.0).context(|| "bandwidth rule".into())?;
        let (mut gd, mut gp) = (Vec::new(), Vec::new());
        for rep in 0..cfg.usize("replicates")? {
            let cloud = sample_iid(&model, n, replicate_seed(seed, rep)).context(|| "sampling".into())?;
            let sp = spectra(&cloud, p, s, h, mu, k, seed)?;
            for (i, ((f, d), r)) in sp.fermat.iter().zip(&sp.dn).zip(&sp.plain).enumerate() {
                rows.row(&[rep.to_string(), n.to_string(), (i + 1).to_string(), num(*f), num(*d), num(*r)]);
            }
            timings.row(&[
                rep.to_string(),
                n.to_string(),
                format!("{:.3}", sp.seconds[0]),
                format!("{:.3}", sp.seconds[1]),
                format!("{:.3}", sp.seconds[2]),
            ]);
            gd.push(median_gap(&sp.fermat, &sp.dn));
            gp.push(median_gap(&sp.fermat, &sp.plain));
        }
        summary.row(&[n.to_string(), num(h), num(median(&gd)), num(median(&gp))]);
    }
    let summary = summary.finish();
    out.write("eig_convergence.csv", &rows.finish())?;
    out.write("eig_convergence_summary.csv", &summary)?;
    out.write("timings.csv", &timings.finish())?;
    out.write(
        "eig_convergence.svg",
        &svg::line_chart(
            &summary,
            "n",
            &["median_rel_gap_dn", "median_rel_gap_plain"],
            None,
            "Median relative eigenvalue gap to the Fermat Laplacian",
            "relative gap",
            true,
        )?,
    )?;
    write_sidecars(out, cfg, &prov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_one_spectra_coincide() {
        let model = DensityModel::disk_valley(0.25).unwrap();
        let cloud = sample_iid(&model, 300, 4).unwrap();
        let sp = spectra(&cloud, 1.0, 1.0, 0.5, 1.0, 6, 0).unwrap();
        for (a, b) in sp.fermat.iter().zip(&sp.dn) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-3), "{a} vs {b}");
        }
        assert!(sp.plain[1] > 0.0);
    }

    #[test]
    fn median_gap_skips_the_zero_mode() {
        assert_eq!(median_gap(&[0.0, 1.0, 2.0, 3.0], &[1e-17, 1.0, 2.2, 3.0]), 0.0);
    }
}
