//! Geometric-versus-density partition of an elongated box with a sparse strip.
//!
//! The box is `[−½, ½] × [−L/2, L/2]`. A strip `|x₁| < width/2` carries density
//! `ratio`, the rest density 1. Cutting across the long axis (`x₂ = 0`) is the
//! short geometric cut; cutting along the strip (`x₁ = 0`) is the density cut.
//! Small `p` sees the geometry, large `p` the density.

use fermat_core::kv::fmt_f64;
use fermat_core::metric::{fermat_sssp, normalization_factor};
use fermat_core::sampling::DensityKind;
use fermat_core::{accuracy, sample_iid, spectral_cluster_fd, DensityModel, Domain, FdParams, FermatMode, FermatParams, KeyValues, PointCloud};

use super::crossings;
use crate::commands::write_sidecars;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};
use crate::output::{num, Csv, OutDir, Table};
use crate::svg;

pub fn model(ratio: f64, width: f64, length: f64) -> Result<DensityModel, CliError> {
    DensityModel::new(
        DensityKind::StripGap {
            ratio,
            width,
            center: 0.0,
        },
        Domain::Box {
            lo: vec![-0.5, -0.5 * length],
            hi: vec![0.5, 0.5 * length],
        },
    )
    .context(|| "strip model".into())
}

/// Median over `sources` evenly spaced points of the normalized Fermat
/// distance to their `rank`-th nearest neighbor.
pub fn neighbor_bandwidth(cloud: &PointCloud, p: f64, rank: usize, sources: usize) -> Result<f64, CliError> {
    let n = cloud.len();
    if rank == 0 || rank >= n || sources == 0 {
        return Err(CliError::Config(format!(
            "need 0 < h_neighbors < n and h_sources > 0, got {rank} and {sources}"
        )));
    }
    let m = cloud.intrinsic_dim;
    let fp = FermatParams {
        p,
        m,
        mode: FermatMode::KnnAuto,
    };
    let f = normalization_factor(n, p, m);
    let step = (n / sources).max(1);
    let mut ks = Vec::new();
    for src in (0..n).step_by(step) {
        let mut d = fermat_sssp(cloud, &fp, src).context(|| format!("p = {p}: neighbor bandwidth"))?;
        d.sort_by(f64::total_cmp);
        ks.push(d[rank] * f);
    }
    ks.sort_by(f64::total_cmp);
    Ok(ks[ks.len() / 2])
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    let n = cfg.usize("n")?;
    let seed = cfg.u64("seed")?;
    let model = model(cfg.f64("ratio")?, cfg.f64("width")?, cfg.f64("length")?)?;
    let cloud = sample_iid(&model, n, seed).context(|| "sampling".into())?;
    let geometric: Vec<usize> = cloud.iter().map(|x| usize::from(x[1] > 0.0)).collect();
    let density: Vec<usize> = cloud.iter().map(|x| usize::from(x[0] > 0.0)).collect();
    let min_component = ((cfg.f64("min_component_fraction")? * n as f64).ceil() as usize).max(1);

    let ps = cfg.f64_list("p_grid")?;
    let mut summary = Csv::new(&["p", "accuracy_vs_geometric", "accuracy_vs_density", "h", "retained"]);
    let mut label_cols: Vec<Vec<usize>> = Vec::new();
    let (mut acc_g, mut acc_d) = (Vec::new(), Vec::new());
    for &p in &ps {
        let h = match cfg.bandwidth()? {
            Some(h) => h,
            None => neighbor_bandwidth(&cloud, p, cfg.usize("h_neighbors")?, cfg.usize("h_sources")?)?,
        };
        let mut fp = FdParams::new(p, cfg.f64("s")?, h, cfg.usize("r")?, cfg.usize("k")?, seed);
        fp.min_component = min_component;
        let res = spectral_cluster_fd(&cloud, &fp).context(|| format!("p = {p}"))?;
        let ag = accuracy(&res.labels, &geometric).context(|| format!("p = {p}: scoring"))?;
        let ad = accuracy(&res.labels, &density).context(|| format!("p = {p}: scoring"))?;
        summary.row(&[num(p), num(ag), num(ad), num(h), res.retained.len().to_string()]);
        acc_g.push(ag);
        acc_d.push(ad);
        label_cols.push(res.labels);
    }

    let points = cloud.to_csv();
    let names: Vec<String> = ps.iter().map(|p| format!("p_{}", fmt_f64(*p))).collect();
    let mut labels = Csv::new(&names.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..n {
        labels.row(&label_cols.iter().map(|c| c[i].to_string()).collect::<Vec<_>>());
    }
    let labels = labels.finish();
    let summary = summary.finish();
    out.write("two_partitions.csv", &summary)?;
    out.write("two_partitions_points.csv", &points)?;
    out.write("two_partitions_labels.csv", &labels)?;
    write_figures(out, &summary, &points, &labels)?;

    let mut prov = KeyValues::new();
    prov.set("model", model.tag());
    prov.set("min_component", min_component.to_string());
    prov.set("crossings", crossings(&acc_g, &acc_d).to_string());
    write_sidecars(out, cfg, &prov)
}

fn write_figures(out: &mut OutDir, summary: &str, points: &str, labels: &str) -> Result<(), CliError> {
    out.write(
        "two_partitions.svg",
        &svg::line_chart(
            summary,
            "p",
            &["accuracy_vs_geometric", "accuracy_vs_density"],
            None,
            "Partition accuracy against p",
            "accuracy",
            false,
        )?,
    )?;
    for name in Table::parse(labels)?.header {
        let title = format!("Fermat spectral clusters, {}", name.replace('_', " = "));
        out.write(
            &format!("two_partitions_{name}.svg"),
            &svg::labeled_scatter(points, labels, &name, &title)?,
        )?;
    }
    Ok(())
}
