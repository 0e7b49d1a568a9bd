//! Oriented planes, layer decompositions over a base plane and the
//! cylindrical excess with its multiplicity statistics.

mod domain;
mod excess;
mod layers;
mod plane;

pub use domain::{BaseRegion, Domain};
pub use excess::{
    cylindrical_excess, excess_in_ball, excess_in_polygon, height_sup, multiplicity_stats,
    ExcessReport, MultiplicityReport,
};
pub use layers::{boundary_clearance, decompose_layers, Layer, LayerDecomposition, LayerOptions};
pub use plane::{
    fit_plane, flatness, perp_after_projection_norm, plane_ball_grid, plane_coherence_same_center,
    plane_distance, CoherenceCheck, OrientedPlane,
};
