//! Eigenpairs of graph Laplacians, reference spectra and spectral bounds.

mod continuum;
mod decomposition;
pub mod dense;
mod diffusion;
mod lanczos;
mod projection;

pub use continuum::{continuum_spectrum_1d, MIN_GRID_1D};
pub use decomposition::{
    eig_laplacian, eig_smallest, rayleigh_minmax_check, EigOptions, MinMaxReport, SpectralDecomposition,
    CLUSTER_GAP,
};
pub use diffusion::diffusion_evolve;
pub use projection::{
    eigvec_discrepancy_check, form_value, spectral_projection, DiscrepancyParams, DiscrepancyReport,
};
