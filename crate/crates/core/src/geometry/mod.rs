//! Continuum geometry of the metric `ρ^{−2(p−1)/m} δ` on flat domains.

mod expansion;
mod geodesic;
mod grid;

pub use expansion::{alpha, euclid_fermat_expansions, sectional_curvature_bound, FermatExpansions, LocalDensityJet};
pub use geodesic::{
    fermat_ball, geodesic_ode_step, geodesic_taylor, integrate_geodesic, trace_to_csv, BallRay, FermatBall,
    GeodesicState,
};
pub use grid::{continuum_fermat_grid, MIN_GRID_RES};
