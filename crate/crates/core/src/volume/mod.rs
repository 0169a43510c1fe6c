//! Exact volumes of search spaces and their intersections with pyramids.
//!
//! Two exact routes are provided. [`arrangement`] builds the cube-clipped
//! arrangement of every bounding hyperplane and classifies cells by a witness
//! point; it is the reference. [`engine`] maintains the search space as convex
//! pieces and is what the solver uses. [`monte_carlo`] is a floating-point
//! sampling estimate for cross-checks.

pub mod arrangement;
pub mod engine;
pub mod monte_carlo;
pub mod parallel;
pub mod polytope;

pub use arrangement::{
    build_arrangement, build_arrangement_bruteforce, pyramid_bounding_hyperplanes, pyramid_inequalities,
    pyramid_intersection_volume, pyramid_intersection_volumes, search_space_volume, ArrangementCell,
    CellDecomposition, Hyperplane,
};
pub use engine::VolumeEngine;
pub use monte_carlo::{monte_carlo_pyramid, monte_carlo_volume, McEstimate, McTarget};
pub use polytope::{polytope_volume, ConvexCell, HPolytope, LinIneq, VolumeError};
