//! Single-stage subcommands: sampling, distances, Laplacians, spectra,
//! clustering, geodesic balls and the time constant.

use fermat_core::graph::{
    bandwidth_rule, build_weights, build_weights_euclidean, laplacian_degree_normalized, laplacian_jqr, laplacian_ps,
    rw_laplacian,
};
use fermat_core::kv::fmt_f64;
use fermat_core::metric::{fermat_pairwise, normalization_factor, normalize_fermat};
use fermat_core::percolation::estimate_mu_padded;
use fermat_core::spectral::eig_laplacian;
use fermat_core::{
    geometry, sample_iid, sample_ppp, spectral_cluster_dn, spectral_cluster_fd, DnParams, EigOptions, FdParams,
    FermatMode, FermatParams, KeyValues, Laplacian, PointCloud,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Context};
use crate::output::{num, Csv, OutDir};
use crate::svg;

/// Loads `input` if set, otherwise samples from the configured density.
pub fn load_cloud(cfg: &ExperimentConfig) -> Result<PointCloud, CliError> {
    let m = cfg.opt_usize("m")?;
    if let Some(path) = cfg.raw("input") {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        return PointCloud::from_csv(&text, m).context(|| format!("reading {path}"));
    }
    let model = cfg.density()?;
    let seed = cfg.u64("seed")?;
    let n = cfg.usize("n")?;
    let mut cloud = if cfg.bool("ppp")? {
        sample_ppp(&model, n as f64, seed)
    } else {
        sample_iid(&model, n, seed)
    }
    .context(|| "sampling".into())?;
    if let Some(m) = m {
        cloud.intrinsic_dim = m;
    }
    Ok(cloud)
}

fn fermat_mode(cfg: &ExperimentConfig, key: &str, knn_key: &str) -> Result<Option<FermatMode>, CliError> {
    Ok(Some(match cfg.str(key)? {
        "auto" => return Ok(None),
        "exact" => FermatMode::Exact,
        "knn" => FermatMode::Knn(cfg.usize(knn_key)?),
        "knn_auto" => FermatMode::KnnAuto,
        "within" => FermatMode::Within(cfg.f64("cutoff")?),
        other => return Err(CliError::Config(format!("unknown distance mode `{other}`"))),
    }))
}

/// `h`, or the bandwidth rule when unset.
fn resolve_h(cfg: &ExperimentConfig, cloud: &PointCloud, p: f64, m: usize) -> Result<f64, CliError> {
    if let Some(h) = cfg.bandwidth()? {
        return Ok(h);
    }
    let beta = if cfg.raw("input").is_some() { 1.0 } else { cfg.density()?.beta() };
    bandwidth_rule(cloud.len(), m, cfg.f64("eps")?, p, beta, 1.0).context(|| "bandwidth rule".into())
}

/// Kernel graph and Laplacian described by the `laplacian`/`spectra` keys.
pub fn build_operator(cfg: &ExperimentConfig, cloud: &PointCloud) -> Result<(Laplacian, f64), CliError> {
    let n = cloud.len();
    let m = cloud.intrinsic_dim;
    let p = cfg.f64("p")?;
    let h = resolve_h(cfg, cloud, p, m)?;
    let g = match cfg.str("metric")? {
        "euclidean" => build_weights_euclidean(cloud, h, m).context(|| "kernel weights".into())?,
        "fermat" => {
            let mu = cfg.f64("mu")?;
            let raw = cfg.bool("raw_lp")?;
            let support = if raw { h.powf(p) } else { mu * h / normalization_factor(n, p, m) };
            let fp = FermatParams {
                p,
                m,
                mode: FermatMode::Within(support * (1.0 + 1e-9)),
            };
            let dm = fermat_pairwise(cloud, &fp).context(|| "Fermat distances".into())?;
            let d = if raw {
                dm.map_increasing(|v| v.powf(1.0 / p))
            } else {
                normalize_fermat(&dm, n, &fp).context(|| "normalization".into())?.scaled(1.0 / mu)
            };
            build_weights(&d, h, n, m).context(|| "kernel weights".into())?
        }
        other => return Err(CliError::Config(format!("unknown metric `{other}`"))),
    };
    let lap = match cfg.str("laplacian")? {
        "ps" => laplacian_ps(&g, cfg.f64("s")?),
        "rw" => rw_laplacian(&g, h, m).map(|l| l.with_scale(1.0)),
        "jqr" => laplacian_jqr(&g, cfg.f64("j")?, cfg.f64("q")?, cfg.f64("r_exp")?),
        "dn" => laplacian_degree_normalized(&g, cfg.f64("j")?, cfg.f64("q")?),
        other => return Err(CliError::Config(format!("unknown Laplacian `{other}`"))),
    }
    .context(|| "Laplacian".into())?;
    let lap = if cfg.bool("continuum_scale")? {
        lap.with_scale(2.0 * (m as f64 + 2.0) / (h * h))
    } else {
        lap
    };
    Ok((lap, h))
}

fn eig_options(cfg: &ExperimentConfig) -> Result<EigOptions, CliError> {
    let mut opts = EigOptions {
        seed: cfg.u64("seed")?,
        ..EigOptions::default().with_dense_max(cfg.usize("dense_max")?)
    };
    opts.allow_disconnected = cfg.bool("allow_disconnected")?;
    Ok(opts)
}

fn provenance_text(cfg: &ExperimentConfig, extra: &KeyValues) -> String {
    let mut kv = KeyValues::new();
    kv.set("tool", concat!("fermat ", env!("CARGO_PKG_VERSION")));
    kv.set("command", cfg.experiment.command());
    for (k, v) in extra.iter() {
        kv.set(k, v);
    }
    kv.to_text()
}

/// Writes the resolved configuration and provenance next to the outputs.
pub fn write_sidecars(out: &mut OutDir, cfg: &ExperimentConfig, extra: &KeyValues) -> Result<(), CliError> {
    let name = cfg.experiment.name();
    out.write(&format!("{name}.config"), &cfg.to_text())?;
    out.write(&format!("{name}.provenance"), &provenance_text(cfg, extra))?;
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let mut prov = KeyValues::new();
    match cfg.experiment {
        Experiment::Sample => {
            let cloud = load_cloud(cfg)?;
            prov.set("model", cloud.model_tag.clone());
            if let Some(c) = cloud.ppp_count {
                prov.set("ppp_count", c.to_string());
            }
            out.write("points.csv", &cloud.to_csv())?;
        }
        Experiment::FermatDist => {
            let cloud = load_cloud(cfg)?;
            let fp = FermatParams {
                p: cfg.f64("p")?,
                m: cloud.intrinsic_dim,
                mode: fermat_mode(cfg, "mode", "k")?.unwrap_or(FermatMode::Exact),
            };
            let mut dm = fermat_pairwise(&cloud, &fp).context(|| "Fermat distances".into())?;
            if cfg.bool("normalize")? {
                dm = normalize_fermat(&dm, cloud.len(), &fp).context(|| "normalization".into())?;
            }
            out.write("points.csv", &cloud.to_csv())?;
            out.write("distances.csv", &dm.to_csv())?;
        }
        Experiment::Laplacian | Experiment::Spectra => {
            let cloud = load_cloud(cfg)?;
            let (lap, h) = build_operator(cfg, &cloud)?;
            prov.set("h", fmt_f64(h));
            prov.set("edges", lap.graph.off_diagonal_nnz().to_string());
            out.write("points.csv", &cloud.to_csv())?;
            if cfg.experiment == Experiment::Laplacian {
                out.write("laplacian.csv", &lap.to_triplet_csv(&format!("h={}", fmt_f64(h))))?;
            } else {
                let dec = eig_laplacian(&lap, cfg.usize("k_eig")?, &eig_options(cfg)?)
                    .context(|| "eigensolver".into())?;
                out.write("eigenvalues.csv", &dec.to_csv())?;
                out.write("eigenvectors.csv", &dec.eigenvectors_csv())?;
            }
        }
        Experiment::ClusterFd | Experiment::ClusterDn => {
            let cloud = load_cloud(cfg)?;
            let m = cloud.intrinsic_dim;
            let seed = cfg.u64("seed")?;
            let (r, k) = (cfg.usize("r")?, cfg.usize("k")?);
            let res = if cfg.experiment == Experiment::ClusterFd {
                let p = cfg.f64("p")?;
                let h = resolve_h(cfg, &cloud, p, m)?;
                let mut fp = FdParams::new(p, cfg.f64("s")?, h, r, k, seed);
                fp.mode = fermat_mode(cfg, "mode", "knn_k")?;
                fp.raw_lp = cfg.bool("raw_lp")?;
                fp.row_normalize = cfg.bool("row_normalize")?;
                fp.min_component = cfg.usize("min_component")?;
                spectral_cluster_fd(&cloud, &fp)
            } else {
                let q = cfg.f64("q")?;
                let h = resolve_h(cfg, &cloud, 1.0, m)?;
                let mut dp = DnParams::new(q, cfg.f64("j")?, h, r, k, seed);
                dp.row_normalize = cfg.bool("row_normalize")?;
                dp.min_component = cfg.usize("min_component")?;
                spectral_cluster_dn(&cloud, &dp)
            }
            .context(|| "clustering".into())?;
            prov = res.provenance.clone();
            let points = cloud.to_csv();
            let mut labels = Csv::new(&["label"]);
            for l in &res.labels {
                labels.row(&[l.to_string()]);
            }
            let labels = labels.finish();
            let mut emb_header: Vec<String> = (1..=res.r).map(|c| format!("u{c}")).collect();
            emb_header.insert(0, "label".into());
            let mut emb = Csv::new(&emb_header.iter().map(String::as_str).collect::<Vec<_>>());
            for (i, l) in res.labels.iter().enumerate() {
                let mut row = vec![l.to_string()];
                row.extend(res.embedding[i * res.r..(i + 1) * res.r].iter().map(|&x| num(x)));
                emb.row(&row);
            }
            out.write("points.csv", &points)?;
            out.write("labels.csv", &labels)?;
            out.write("embedding.csv", &emb.finish())?;
            out.write("eigenvalues.csv", &res.spectrum.to_csv())?;
            if cloud.dim() == 2 {
                let title = format!("{} clusters", cfg.experiment.command());
                out.write("labels.svg", &svg::labeled_scatter(&points, &labels, "label", &title)?)?;
            }
        }
        Experiment::FermatBall => {
            let model = cfg.density()?;
            let p = cfg.f64("p")?;
            let center = cfg.f64_list("center")?;
            let mut text = String::from("T,t,x1,x2\n");
            let mut flagged = Vec::new();
            for t in cfg.f64_list("radii")? {
                let ball = geometry::fermat_ball(&model, &center, t, cfg.usize("n_dirs")?, p, cfg.f64("dt")?)
                    .context(|| format!("geodesic ball T = {t}"))?;
                flagged.push(ball.flagged().to_string());
                for line in ball.to_csv().lines().skip(1) {
                    text.push_str(&format!("{},{line}\n", num(t)));
                }
            }
            prov.set("model", model.tag());
            prov.set("flagged_rays", flagged.join(","));
            out.write("fermat_ball.csv", &text)?;
            out.write("fermat_ball.svg", &svg::polylines(&text, &format!("Fermat balls, p = {p}"))?)?;
        }
        Experiment::Mu => {
            let est = estimate_mu_padded(
                cfg.f64("p")?,
                cfg.usize("m")?,
                cfg.f64("r")?,
                cfg.f64("intensity")?,
                cfg.usize("replicates")?,
                cfg.u64("seed")?,
                cfg.f64("padding")?,
            )
            .context(|| "time constant".into())?;
            prov.set("mean", fmt_f64(est.mean));
            prov.set("stderr", fmt_f64(est.stderr));
            out.write("mu.csv", &est.to_csv())?;
        }
        e => return Err(CliError::Config(format!("{} is an experiment; run it with `exp`", e.command()))),
    }
    write_sidecars(out, cfg, &prov)
}
