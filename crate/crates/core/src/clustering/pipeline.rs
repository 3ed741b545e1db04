use super::kmeans::{canonical_labels, kmeans, ClusterAssignment, KMEANS_MAX_ITER};
use crate::error::{Error, Result, StageExt};
use crate::graph::{build_weights, build_weights_euclidean, laplacian_degree_normalized, laplacian_ps, Laplacian};
use crate::kv::{fmt_f64, KeyValues};
use crate::metric::{fermat_pairwise, normalization_factor, normalize_fermat, FermatMode, FermatParams};
use crate::sampling::PointCloud;
use crate::spectral::{eig_laplacian, EigOptions, SpectralDecomposition};

/// Parameters of Fermat-distance spectral clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct FdParams {
    pub p: f64,
    pub s: f64,
    /// Kernel bandwidth, called ε in the algorithm listing.
    pub h: f64,
    /// Number of eigenvectors in the embedding.
    pub r: usize,
    pub k: usize,
    pub seed: u64,
    /// Intrinsic dimension; defaults to the cloud's.
    pub m: Option<usize>,
    /// Path restriction; `None` picks an exact radius-limited search just
    /// large enough for the kernel support.
    pub mode: Option<FermatMode>,
    /// Use `η(ℓ_p/ε)` on raw distances instead of `η(ℓ̃_p^p/h)`.
    pub raw_lp: bool,
    pub row_normalize: bool,
    /// Kernel-graph components with fewer points are left out of the
    /// spectral step; their points take the label of the nearest retained
    /// point. `1` keeps everything.
    pub min_component: usize,
    pub eig: EigOptions,
}

impl FdParams {
    pub fn new(p: f64, s: f64, h: f64, r: usize, k: usize, seed: u64) -> Self {
        FdParams {
            p,
            s,
            h,
            r,
            k,
            seed,
            m: None,
            mode: None,
            raw_lp: false,
            row_normalize: false,
            min_component: 1,
            eig: pipeline_eig_options(seed),
        }
    }
}

/// Parameters of degree-normalized spectral clustering on Euclidean weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DnParams {
    pub q: f64,
    pub j: f64,
    pub h: f64,
    pub r: usize,
    pub k: usize,
    pub seed: u64,
    pub m: Option<usize>,
    pub row_normalize: bool,
    /// As in [`FdParams::min_component`].
    pub min_component: usize,
    pub eig: EigOptions,
}

impl DnParams {
    pub fn new(q: f64, j: f64, h: f64, r: usize, k: usize, seed: u64) -> Self {
        DnParams {
            q,
            j,
            h,
            r,
            k,
            seed,
            m: None,
            row_normalize: false,
            min_component: 1,
            eig: pipeline_eig_options(seed),
        }
    }
}

/// Kernel graphs of well-separated clusters are disconnected, so the
/// pipelines solve per component.
fn pipeline_eig_options(seed: u64) -> EigOptions {
    EigOptions {
        seed,
        ..EigOptions::default().allowing_disconnected()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringOutput {
    pub labels: Vec<usize>,
    pub assignment: ClusterAssignment,
    pub spectrum: SpectralDecomposition,
    pub laplacian: Laplacian,
    /// Row-major `n × r`; a pruned point copies the row of its nearest retained point.
    pub embedding: Vec<f64>,
    /// Points that entered the spectral step, ascending. `spectrum` is indexed by position in this list.
    pub retained: Vec<usize>,
    pub r: usize,
    pub provenance: KeyValues,
}

fn check_common(cloud: &PointCloud, h: f64, r: usize, k: usize) -> Result<()> {
    let n = cloud.len();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("embedding dimension r = {r} must lie in 1..={n}")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

struct EmbedOpts<'a> {
    r: usize,
    k: usize,
    seed: u64,
    row_normalize: bool,
    min_component: usize,
    eig: &'a EigOptions,
}

/// Nodes of components with at least `min_size` nodes, ascending.
fn large_components(lap: &Laplacian, min_size: usize) -> Vec<usize> {
    let n = lap.n();
    if min_size <= 1 {
        return (0..n).collect();
    }
    let (count, labels) = lap.graph.components();
    let mut sizes = vec![0usize; count];
    for &c in &labels {
        sizes[c] += 1;
    }
    (0..n).filter(|&i| sizes[labels[i]] >= min_size).collect()
}

fn embed_and_cluster(cloud: &PointCloud, lap: Laplacian, o: &EmbedOpts, provenance: KeyValues) -> Result<ClusteringOutput> {
    let n = lap.n();
    let r = o.r;
    let retained = large_components(&lap, o.min_component);
    if retained.len() < o.k.max(r) {
        return Err(Error::InvalidParameter(format!(
            "only {} points lie in components of size >= {}",
            retained.len(),
            o.min_component
        )))
        .stage("eigensolver");
    }
    let spectrum = if retained.len() == n {
        eig_laplacian(&lap, r, o.eig)
    } else {
        // components are closed under the graph, so restriction is exact
        let sub = Laplacian {
            graph: lap.graph.subgraph(&retained),
            left: retained.iter().map(|&i| lap.left[i]).collect(),
            right: retained.iter().map(|&i| lap.right[i]).collect(),
            scale: lap.scale,
        };
        eig_laplacian(&sub, r, o.eig)
    }
    .stage("eigensolver")?;
    let nr = retained.len();
    let mut sub_embedding = vec![0.0; nr * r];
    for (c, v) in spectrum.eigenvectors.iter().enumerate() {
        for i in 0..nr {
            sub_embedding[i * r + c] = v[i];
        }
    }
    if o.row_normalize {
        for row in sub_embedding.chunks_mut(r) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
    let mut assignment = kmeans(&sub_embedding, r, o.k, o.seed, KMEANS_MAX_ITER).stage("kmeans")?;
    let (labels, embedding) = if nr == n {
        (assignment.labels.clone(), sub_embedding)
    } else {
        let mut slot = vec![usize::MAX; n];
        for (a, &i) in retained.iter().enumerate() {
            slot[i] = a;
        }
        let mut labels = vec![0; n];
        let mut embedding = vec![0.0; n * r];
        for i in 0..n {
            let a = if slot[i] != usize::MAX {
                slot[i]
            } else {
                let mut best = 0;
                for (b, &j) in retained.iter().enumerate() {
                    if cloud.dist(i, j) < cloud.dist(i, retained[best]) {
                        best = b;
                    }
                }
                best
            };
            labels[i] = assignment.labels[a];
            embedding[i * r..(i + 1) * r].copy_from_slice(&sub_embedding[a * r..(a + 1) * r]);
        }
        let labels = canonical_labels(&labels);
        assignment.labels = labels.clone();
        (labels, embedding)
    };
    let mut provenance = provenance;
    provenance.set("min_component", o.min_component.to_string());
    provenance.set("retained", nr.to_string());
    Ok(ClusteringOutput {
        labels,
        assignment,
        spectrum,
        laplacian: lap,
        embedding,
        retained,
        r,
        provenance,
    })
}

fn mode_text(mode: &FermatMode) -> String {
    match mode {
        FermatMode::Exact => "exact".into(),
        FermatMode::Knn(k) => format!("knn:{k}"),
        FermatMode::KnnAuto => "knn:auto".into(),
        FermatMode::Within(c) => format!("within:{}", fmt_f64(*c)),
    }
}

/// Fermat-distance spectral clustering: `ℓ_p^p` → kernel graph → `(p, s)`
/// random-walk Laplacian → bottom `r` eigenvectors (constant one
/// included) → k-means.
pub fn spectral_cluster_fd(cloud: &PointCloud, params: &FdParams) -> Result<ClusteringOutput> {
    check_common(cloud, params.h, params.r, params.k)?;
    if !(params.s >= 0.0) {
        return Err(Error::InvalidParameter(format!("s must be >= 0, got {}", params.s)));
    }
    let n = cloud.len();
    let m = params.m.unwrap_or(cloud.intrinsic_dim);
    let p = params.p;
    let factor = normalization_factor(n, p, m);
    // largest ℓ_p^p the kernel can see
    let support = if params.raw_lp { params.h.powf(p) } else { params.h / factor };
    let mode = params.mode.unwrap_or(FermatMode::Within(support * (1.0 + 1e-9)));
    let fp = FermatParams { p, m, mode };
    fp.validate()?;
    let dm = fermat_pairwise(cloud, &fp).stage("fermat_distances")?;
    let g = if params.raw_lp {
        let lp = dm.map_increasing(|v| v.powf(1.0 / p));
        build_weights(&lp, params.h, n, m)
    } else {
        let norm = normalize_fermat(&dm, n, &fp).stage("normalization")?;
        build_weights(&norm, params.h, n, m)
    }
    .stage("kernel_weights")?;
    let lap = laplacian_ps(&g, params.s).stage("laplacian")?;

    let mut prov = KeyValues::new();
    prov.set("pipeline", "fermat_distance");
    prov.set("n", n.to_string());
    prov.set("m", m.to_string());
    prov.set("p", fmt_f64(p));
    prov.set("s", fmt_f64(params.s));
    prov.set("h", fmt_f64(params.h));
    prov.set("epsilon", fmt_f64(params.h));
    prov.set(
        "kernel_argument",
        if params.raw_lp { "lp_over_epsilon" } else { "normalized_lpp_over_h" },
    );
    prov.set("normalization_factor", fmt_f64(factor));
    prov.set("distance_mode", mode_text(&mode));
    prov.set("r", params.r.to_string());
    prov.set("k", params.k.to_string());
    prov.set("seed", params.seed.to_string());
    prov.set("row_normalize", params.row_normalize.to_string());
    prov.set("edges", g.off_diagonal_nnz().to_string());
    prov.set("cloud_seed", cloud.seed.to_string());
    prov.set("cloud_model", cloud.model_tag.clone());
    let opts = EmbedOpts {
        r: params.r,
        k: params.k,
        seed: params.seed,
        row_normalize: params.row_normalize,
        min_component: params.min_component,
        eig: &params.eig,
    };
    embed_and_cluster(cloud, lap, &opts, prov)
}

/// Degree-normalized spectral clustering on Euclidean kernel weights.
pub fn spectral_cluster_dn(cloud: &PointCloud, params: &DnParams) -> Result<ClusteringOutput> {
    check_common(cloud, params.h, params.r, params.k)?;
    let n = cloud.len();
    let m = params.m.unwrap_or(cloud.intrinsic_dim);
    let g = build_weights_euclidean(cloud, params.h, m).stage("kernel_weights")?;
    let lap = laplacian_degree_normalized(&g, params.j, params.q).stage("laplacian")?;
    let mut prov = KeyValues::new();
    prov.set("pipeline", "degree_normalized");
    prov.set("n", n.to_string());
    prov.set("m", m.to_string());
    prov.set("q", fmt_f64(params.q));
    prov.set("j", fmt_f64(params.j));
    prov.set("h", fmt_f64(params.h));
    prov.set("epsilon", fmt_f64(params.h));
    prov.set("r", params.r.to_string());
    prov.set("k", params.k.to_string());
    prov.set("seed", params.seed.to_string());
    prov.set("row_normalize", params.row_normalize.to_string());
    prov.set("edges", g.off_diagonal_nnz().to_string());
    prov.set("cloud_seed", cloud.seed.to_string());
    prov.set("cloud_model", cloud.model_tag.clone());
    let opts = EmbedOpts {
        r: params.r,
        k: params.k,
        seed: params.seed,
        row_normalize: params.row_normalize,
        min_component: params.min_component,
        eig: &params.eig,
    };
    embed_and_cluster(cloud, lap, &opts, prov)
}
