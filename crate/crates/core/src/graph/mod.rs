//! Kernel graphs and Laplacians.

mod laplacian;
mod sparse;
mod weights;

pub use laplacian::{
    build_laplacian, laplacian_degree_normalized, laplacian_jqr, laplacian_ps, matching_degree_params,
    rw_laplacian, Laplacian, LaplacianMode, LaplacianSpec,
};
pub use sparse::SparseWeightedGraph;
pub use weights::{
    bandwidth_rule, build_weights, build_weights_euclidean, degrees, dirichlet_form, kernel_eta, ncut,
    unit_ball_volume,
};
