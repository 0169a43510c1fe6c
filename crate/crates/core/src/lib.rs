//! Query-efficient approximate fixed points of ℓ∞-contracting maps on `[0,1]^d`.
//!
//! The main solver repeatedly queries an approximate centerpoint of the current
//! search space and cuts away the ℓ∞-halfspace that cannot contain the fixed
//! point. Centerpoints are found by pulling and balancing pyramids around a
//! candidate point, driven by exact rational volume computations.
//!
//! Module map:
//! - [`geometry`]: points, pyramids, halfspaces, search spaces
//! - [`volume`]: exact and sampled volumes
//! - [`centerpoint`]: finding and verifying approximate centerpoints
//! - [`solver`]: the centerpoint method, Banach iteration, query accounting
//! - [`decompose`]: class reductions and block composition
//! - [`instances`]: affine and game test instances, JSON loading
//! - [`io`], [`bench`]: file formats and the benchmark matrix

pub mod bench;
pub mod centerpoint;
pub mod decompose;
pub mod geometry;
pub mod instances;
pub mod io;
pub mod rat;
pub mod solver;
pub mod volume;

pub use geometry::{HalfspaceDir, Pyramid, RatVec, SearchSpace, Sign};
pub use rat::Rat;
