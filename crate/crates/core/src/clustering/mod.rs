//! Spectral embeddings, k-means and the two clustering pipelines.

mod accuracy;
mod kmeans;
mod pipeline;

pub use accuracy::{accuracy, MAX_ACCURACY_CLUSTERS};
pub use kmeans::{canonical_labels, kmeans, labels_to_csv, ClusterAssignment, KMEANS_MAX_ITER, KMEANS_RESTARTS};
pub use pipeline::{spectral_cluster_dn, spectral_cluster_fd, ClusteringOutput, DnParams, FdParams};
