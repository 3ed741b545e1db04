//! Density-weighted shortest-path metrics, graph Laplacians and spectral clustering.

pub mod clustering;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod kv;
pub mod metric;
pub mod percolation;
pub mod rng;
pub mod sampling;
pub mod spectral;

pub use clustering::{accuracy, kmeans, spectral_cluster_dn, spectral_cluster_fd, ClusterAssignment, ClusteringOutput, DnParams, FdParams};
pub use error::{Error, Result};
pub use geometry::{FermatBall, GeodesicState, LocalDensityJet};
pub use graph::{Laplacian, LaplacianMode, LaplacianSpec, SparseWeightedGraph};
pub use kv::KeyValues;
pub use metric::{DistanceMatrix, FermatMode, FermatParams};
pub use percolation::{estimate_mu, MuEstimate};
pub use sampling::{eval_density, sample_iid, sample_ppp, DensityKind, DensityModel, Domain, PointCloud};
pub use spectral::{EigOptions, SpectralDecomposition};
