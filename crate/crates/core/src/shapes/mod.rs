//! Parametric design families and shape representations.

mod database;
mod family;
mod geometry;
mod mapping;
mod naca;
mod spline;

pub use database::{build_database, Sampler, ShapeDatabase};
pub use family::{
    catenoid_in_envelope, catenoid_profile, over_circle_params, rectangle_nodes, Family,
    CATENOID_END_RADIUS, CATENOID_ENVELOPE,
};
pub use geometry::{ContourShape, Curve, Point};
pub use mapping::{
    map_characteristic, map_contour, map_signed_distance, GridSpec, MappingKind, MappingSpec,
    ShapeRepresentation, DEFAULT_GRID,
};
pub use naca::{bump as hicks_henne_bump, camber as naca_camber, thickness as naca_thickness};
pub use spline::NaturalSpline;
