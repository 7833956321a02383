//! Interior components of the filled Julia set and their local geometry.

pub mod atlas;
pub mod basin;
pub mod classify;
pub mod coords;
pub mod curve;
pub mod tower;

pub use atlas::{
    component_map, interior_components, interior_components_with, AtlasOptions, CellLabel,
    ComponentAtlas, ComponentRecord, ComponentTarget, Grid,
};
pub use basin::ImmediateBasin;
pub use classify::{classify_point, OrbitClass, Verdict};
pub use coords::LocalCoordinate;
pub use curve::ClosedCurve;
pub use tower::{
    boundary_parametrization, boundary_parametrization_to, default_level, equipotential,
    functional_residual, BoundaryParametrization, Equipotential, LevelEvent, PullbackTower,
    GAMMA_TOLERANCE, MAX_TOWER_LEVELS,
};
