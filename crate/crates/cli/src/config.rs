//! Flat `key = value` configuration shared by every subcommand.
//!
//! Values are layered: built-in defaults, then `--config FILE`, then
//! command-line flags. The resolved set is written next to the outputs and
//! can be fed back with `--config` to rerun the same computation.

use std::fmt;

use fermat_core::kv::KeyValues;
use fermat_core::sampling::DensityModel;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    FermatDist,
    Laplacian,
    Spectra,
    ClusterFd,
    ClusterDn,
    FermatBall,
    Mu,
    TwoPartitions,
    EigConvergence,
    CircleConvergence,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::Sample,
        Experiment::FermatDist,
        Experiment::Laplacian,
        Experiment::Spectra,
        Experiment::ClusterFd,
        Experiment::ClusterDn,
        Experiment::FermatBall,
        Experiment::Mu,
        Experiment::TwoPartitions,
        Experiment::EigConvergence,
        Experiment::CircleConvergence,
    ];

    /// Name used in config files and output file names.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::FermatDist => "fermat_dist",
            Experiment::Laplacian => "laplacian",
            Experiment::Spectra => "spectra",
            Experiment::ClusterFd => "cluster",
            Experiment::ClusterDn => "cluster_dn",
            Experiment::FermatBall => "fermat_ball",
            Experiment::Mu => "mu",
            Experiment::TwoPartitions => "two_partitions",
            Experiment::EigConvergence => "eig_convergence",
            Experiment::CircleConvergence => "circle_convergence",
        }
    }

    /// Subcommand spelling.
    pub fn command(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::FermatDist => "fermat-dist",
            Experiment::Laplacian => "laplacian",
            Experiment::Spectra => "spectra",
            Experiment::ClusterFd => "cluster-fd",
            Experiment::ClusterDn => "cluster-dn",
            Experiment::FermatBall => "geodesic-ball",
            Experiment::Mu => "estimate-mu",
            Experiment::TwoPartitions => "two-partitions",
            Experiment::EigConvergence => "eig-convergence",
            Experiment::CircleConvergence => "circle-convergence",
        }
    }

    pub fn is_exp(self) -> bool {
        matches!(
            self,
            Experiment::TwoPartitions | Experiment::EigConvergence | Experiment::CircleConvergence
        )
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn keys(self) -> Vec<KeySpec> {
        let mut keys = vec![KeySpec::new("seed", "0", "master random seed")];
        let cloud = || {
            let mut v = vec![
                KeySpec::new("input", "", "points CSV to load instead of sampling"),
                KeySpec::new("n", "500", "number of sampled points"),
                KeySpec::new("ppp", "false", "sample a Poisson process with intensity n"),
                KeySpec::new("m", "", "intrinsic dimension (default: from the domain)"),
            ];
            v.extend(density_keys("uniform"));
            v
        };
        let graph = || {
            vec![
                KeySpec::new("metric", "fermat", "fermat or euclidean"),
                KeySpec::new("p", "2", "path exponent"),
                KeySpec::new("h", "", "kernel bandwidth (default: bandwidth rule)"),
                KeySpec::new("epsilon", "", "alias of h"),
                KeySpec::new("eps", "0.04", "exponent slack of the bandwidth rule"),
                KeySpec::new("mu", "1", "divide normalized distances by this time constant"),
                KeySpec::new("raw_lp", "false", "kernel on raw l_p instead of normalized l_p^p"),
                KeySpec::new("laplacian", "ps", "ps, rw, jqr or dn"),
                KeySpec::new("s", "1", "normalization parameter of ps"),
                KeySpec::new("j", "2", "degree exponent j of jqr and dn"),
                KeySpec::new("q", "2", "degree exponent q of jqr and dn"),
                KeySpec::new("r_exp", "0", "right exponent r of jqr"),
                KeySpec::new("continuum_scale", "false", "multiply by 2(m+2)/h^2"),
            ]
        };
        match self {
            Experiment::Sample => keys.extend(cloud()),
            Experiment::FermatDist => {
                keys.extend(cloud());
                keys.extend([
                    KeySpec::new("p", "2", "path exponent"),
                    KeySpec::new("mode", "exact", "exact, knn, knn_auto or within"),
                    KeySpec::new("k", "10", "neighbors for mode = knn"),
                    KeySpec::new("cutoff", "", "largest l_p^p kept for mode = within"),
                    KeySpec::new("normalize", "false", "multiply by n^((p-1)/m)"),
                ]);
            }
            Experiment::Laplacian => {
                keys.extend(cloud());
                keys.extend(graph());
            }
            Experiment::Spectra => {
                keys.extend(cloud());
                keys.extend(graph());
                keys.extend([
                    KeySpec::new("k_eig", "10", "number of eigenpairs"),
                    KeySpec::new("dense_max", "700", "largest size for the dense solver"),
                    KeySpec::new("allow_disconnected", "false", "solve components separately"),
                ]);
            }
            Experiment::ClusterFd => {
                keys.extend(cloud());
                keys.extend([
                    KeySpec::new("p", "2", "path exponent"),
                    KeySpec::new("s", "1", "normalization parameter"),
                    KeySpec::new("h", "", "kernel bandwidth (default: bandwidth rule)"),
                    KeySpec::new("epsilon", "", "alias of h"),
                    KeySpec::new("eps", "0.04", "exponent slack of the bandwidth rule"),
                    KeySpec::new("r", "2", "embedding dimension"),
                    KeySpec::new("k", "2", "number of clusters"),
                    KeySpec::new("raw_lp", "false", "kernel on raw l_p instead of normalized l_p^p"),
                    KeySpec::new("row_normalize", "false", "normalize embedding rows"),
                    KeySpec::new("min_component", "1", "smallest kernel-graph component kept"),
                    KeySpec::new("mode", "auto", "auto, exact, knn, knn_auto or within"),
                    KeySpec::new("knn_k", "10", "neighbors for mode = knn"),
                    KeySpec::new("cutoff", "", "largest l_p^p kept for mode = within"),
                ]);
            }
            Experiment::ClusterDn => {
                keys.extend(cloud());
                keys.extend([
                    KeySpec::new("q", "2", "degree exponent q"),
                    KeySpec::new("j", "2", "degree exponent j"),
                    KeySpec::new("h", "", "kernel bandwidth (default: bandwidth rule)"),
                    KeySpec::new("epsilon", "", "alias of h"),
                    KeySpec::new("eps", "0.04", "exponent slack of the bandwidth rule"),
                    KeySpec::new("r", "2", "embedding dimension"),
                    KeySpec::new("k", "2", "number of clusters"),
                    KeySpec::new("row_normalize", "false", "normalize embedding rows"),
                    KeySpec::new("min_component", "1", "smallest kernel-graph component kept"),
                ]);
            }
            Experiment::FermatBall => {
                let mut d = density_keys("linear");
                for k in &mut d {
                    if k.key == "density_slope" {
                        k.default = "1";
                    }
                }
                keys.extend(d);
                keys.extend([
                    KeySpec::new("p", "3", "path exponent"),
                    KeySpec::new("center", "0,0", "ball center"),
                    KeySpec::new("radii", "0.15,0.35", "Fermat radii T"),
                    KeySpec::new("n_dirs", "64", "number of rays"),
                    KeySpec::new("dt", "0.001", "integrator step"),
                ]);
            }
            Experiment::Mu => keys.extend([
                KeySpec::new("p", "2", "path exponent"),
                KeySpec::new("m", "2", "dimension"),
                KeySpec::new("r", "1", "endpoint separation"),
                KeySpec::new("intensity", "2000", "Poisson intensity"),
                KeySpec::new("replicates", "200", "number of replicates"),
                KeySpec::new("padding", "0.5", "box padding in units of r"),
            ]),
            Experiment::TwoPartitions => keys.extend([
                KeySpec::new("n", "3000", "number of points"),
                KeySpec::new("p_grid", "1,1.5,2,2.5,3,4", "values of p"),
                KeySpec::new("ratio", "0.2", "density ratio inside the strip"),
                KeySpec::new("width", "0.2", "strip width"),
                KeySpec::new("length", "4", "long side of the box (short side is 1)"),
                KeySpec::new("s", "1", "normalization parameter"),
                KeySpec::new("r", "2", "embedding dimension"),
                KeySpec::new("k", "2", "number of clusters"),
                KeySpec::new("h", "", "fixed bandwidth for every p (default: neighbor rule)"),
                KeySpec::new("h_neighbors", "100", "rank of the Fermat neighbor setting h"),
                KeySpec::new("h_sources", "100", "sources used by the neighbor rule"),
                KeySpec::new("min_component_fraction", "0.01", "smallest kept component, as a fraction of n"),
            ]),
            Experiment::EigConvergence => keys.extend([
                KeySpec::new("model", "disk_valley", "disk_valley or gaussian_mixture_bg"),
                KeySpec::new("tau", "0.25", "model parameter"),
                KeySpec::new("p", "1.2", "path exponent"),
                KeySpec::new("s", "1", "normalization parameter"),
                KeySpec::new("n_grid", "500,1000,2000,4000", "sample sizes"),
                KeySpec::new("k_eig", "10", "eigenvalues compared"),
                KeySpec::new("replicates", "1", "draws per sample size"),
                KeySpec::new("eps", "0.05", "exponent slack of the bandwidth rule"),
                KeySpec::new("h_scale", "0.25", "multiplier on the bandwidth rule"),
                KeySpec::new("mu", "", "time constant (default: estimated)"),
                KeySpec::new("mu_replicates", "20", "replicates of the time-constant estimate"),
                KeySpec::new("mu_intensity", "1000", "intensity of the time-constant estimate"),
            ]),
            Experiment::CircleConvergence => keys.extend([
                KeySpec::new("amplitude", "0.5", "density 1 + amplitude sin(theta)"),
                KeySpec::new("p_grid", "1,2", "values of p"),
                KeySpec::new("s", "2", "normalization parameter"),
                KeySpec::new("n_grid", "500,1000,2000,4000", "sample sizes"),
                KeySpec::new("seeds", "10", "draws per sample size"),
                KeySpec::new("k_eig", "5", "eigenvalues compared"),
                KeySpec::new("eps", "0.04", "exponent slack of the bandwidth rule"),
                KeySpec::new("h_scale", "0.4", "multiplier on the bandwidth rule"),
                KeySpec::new("grid_n", "2000", "finite-difference reference grid"),
            ]),
        }
        keys
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

impl KeySpec {
    const fn new(key: &'static str, default: &'static str, help: &'static str) -> Self {
        KeySpec { key, default, help }
    }
}

fn density_keys(kind: &'static str) -> Vec<KeySpec> {
    let mut v = vec![KeySpec::new("density_kind", kind, "density family")];
    for &k in DensityModel::CONFIG_KEYS.iter().filter(|&&k| k != "kind") {
        v.push(KeySpec::new(density_key(k), "", "density parameter"));
    }
    v
}

fn density_key(k: &str) -> &'static str {
    match k {
        "domain" => "density_domain",
        "lo" => "density_lo",
        "hi" => "density_hi",
        "slope" => "density_slope",
        "tau" => "density_tau",
        "means" => "density_means",
        "sigmas" => "density_sigmas",
        "weights" => "density_weights",
        "ratio" => "density_ratio",
        "width" => "density_width",
        "center" => "density_center",
        "amplitude" => "density_amplitude",
        "grid_shape" => "density_grid_shape",
        "grid_values" => "density_grid_values",
        other => panic!("no config key for density field `{other}`"),
    }
}

/// Every parameter of one run. Empty values mean "use the automatic choice".
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    values: KeyValues,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut values = KeyValues::new();
        for k in experiment.keys() {
            values.set(k.key, k.default);
        }
        ExperimentConfig { experiment, values }
    }

    /// Defaults, overlaid with `text` (a config file), then `overrides`.
    pub fn resolve(experiment: Experiment, text: Option<&str>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(experiment);
        if let Some(text) = text {
            let kv = KeyValues::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
            for (k, v) in kv.iter() {
                if k == "experiment" {
                    if v != experiment.name() {
                        return Err(CliError::Config(format!(
                            "config file is for `{v}`, not `{}`",
                            experiment.name()
                        )));
                    }
                    continue;
                }
                cfg.set(k, v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let kv = KeyValues::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        let name = kv
            .get("experiment")
            .ok_or_else(|| CliError::Config("missing key `experiment`".into()))?;
        let exp = Experiment::from_name(name).ok_or_else(|| CliError::Config(format!("unknown experiment `{name}`")))?;
        Self::resolve(exp, Some(text), &[])
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if self.values.get(key).is_none() {
            return Err(CliError::Config(format!(
                "unknown key `{key}` for {}",
                self.experiment.command()
            )));
        }
        self.values.set(key, value.trim());
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!("experiment = {}\n{}", self.experiment.name(), self.values.to_text())
    }

    pub fn values(&self) -> &KeyValues {
        &self.values
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).filter(|v| !v.is_empty())
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("`{key}`: expected {what}, got `{v}`")))
            })
            .transpose()
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.typed(key, "a number")
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?.ok_or_else(|| missing(key))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.typed(key, "a nonnegative integer")
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.opt_usize(key)?.ok_or_else(|| missing(key))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.typed(key, "a nonnegative integer")?.ok_or_else(|| missing(key))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            Some("true") => Ok(true),
            Some("false") | None => Ok(false),
            Some(v) => Err(CliError::Config(format!("`{key}`: expected true or false, got `{v}`"))),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| missing(key))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("`{key}`: expected a list of numbers, got `{s}`")))
            })
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        self.str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("`{key}`: expected a list of integers, got `{s}`")))
            })
            .collect()
    }

    /// `h`, or its alias `epsilon`; both at once is an error.
    pub fn bandwidth(&self) -> Result<Option<f64>, CliError> {
        match (self.opt_f64("h")?, self.opt_f64("epsilon")?) {
            (Some(_), Some(_)) => Err(CliError::Config("give either `h` or `epsilon`, not both".into())),
            (h, e) => Ok(h.or(e)),
        }
    }

    /// The density model described by the `density_*` keys.
    pub fn density(&self) -> Result<DensityModel, CliError> {
        let mut kv = KeyValues::new();
        for (k, v) in self.values.iter() {
            if let Some(field) = k.strip_prefix("density_") {
                if !v.is_empty() {
                    kv.set(field, v);
                }
            }
        }
        DensityModel::from_config(&kv).map_err(|e| CliError::Config(format!("density: {e}")))
    }
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing value for `{key}`"))
}
