//! Linear-inversion tomography of mixed states.

mod basis;
mod design;
mod map;
mod recon;

pub use basis::HermitianBasis;
pub use design::{
    cone_grid, default_cone, design_axes, minimal_injective_axes, Design, DesignStrategy, CONE_GRID_POINTS,
    DEFAULT_CONE_THETA,
};
pub use map::{
    build_map, certify_quorum, counting_rank_bound, multipole_rank_bound, MeasurementMap, QuorumReport, RANK_TOL,
};
pub use recon::{reconstruct_mixed, MapDiagnostics, MixedOptions, MixedReconstructor, ReconMethod, ReconResult};
