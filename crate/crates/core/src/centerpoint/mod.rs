//! Approximate ℓ∞-centerpoints of pyramid-cut search spaces.
//!
//! Starting from the all-ones corner (where every positive pyramid is empty),
//! the negative pyramids are balanced by repeated pulls toward the light ones,
//! then the point slides along `-1` until the positive pyramids hold about half
//! of a negative pyramid's mass, and finally it is clamped into the cube.

mod balance;
mod pulling;
mod search;

use thiserror::Error;

use crate::geometry::{GeometryError, Pyramid, RatVec, SearchSpace};
use crate::rat::Rat;
use crate::volume::{pyramid_intersection_volume, search_space_volume, VolumeEngine};

pub use balance::{balance_negative_pyramids, BalanceState, BalanceStep};
pub use pulling::{pull, pulled_mass, PullOutcome, PullRequest};
pub use search::{
    find_centerpoint, halfspace_volume, project_to_cube, shift_to_diagonal, verify_centerpoint, CenterpointCertificate,
    CenterpointConfig, Verification, MAX_VERIFY_DIM,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CenterpointError {
    #[error("search space has zero volume")]
    ZeroVolume,
    #[error("pull target {target} exceeds the total volume {total}")]
    TargetAboveTotal { target: String, total: String },
    #[error("pull target {target} is below the current mass {current}")]
    TargetBelowCurrent { target: String, current: String },
    #[error("pull direction has no nonzero entry")]
    ZeroDirection,
    #[error("pull ended at mass {mass}, below target minus slack {floor}")]
    PrecisionViolated { mass: String, floor: String },
    #[error("balancing exceeded its iteration cap of {0}")]
    BalanceCapExceeded(u64),
    #[error("balancing invariant violated: {0}")]
    InvariantViolated(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("verification limited to d <= {max}, got {got}")]
    DimensionGuard { max: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Exact volumes of one fixed search space `X`.
pub trait VolumeOracle: Sync {
    fn dim(&self) -> usize;
    fn total_volume(&self) -> Rat;
    fn pyramid_volume(&self, p: &Pyramid) -> Rat;
}

impl VolumeOracle for VolumeEngine {
    fn dim(&self) -> usize {
        VolumeEngine::dim(self)
    }
    fn total_volume(&self) -> Rat {
        VolumeEngine::total_volume(self)
    }
    fn pyramid_volume(&self, p: &Pyramid) -> Rat {
        VolumeEngine::pyramid_volume(self, p)
    }
}

/// Oracle backed by the arrangement route; slow but independent of the pieces engine.
pub struct ArrangementOracle<'a> {
    space: &'a SearchSpace,
    total: std::sync::OnceLock<Rat>,
}

impl<'a> ArrangementOracle<'a> {
    pub fn new(space: &'a SearchSpace) -> Self {
        ArrangementOracle { space, total: std::sync::OnceLock::new() }
    }
}

impl VolumeOracle for ArrangementOracle<'_> {
    fn dim(&self) -> usize {
        self.space.dim()
    }
    fn total_volume(&self) -> Rat {
        self.total.get_or_init(|| search_space_volume(self.space)).clone()
    }
    fn pyramid_volume(&self, p: &Pyramid) -> Rat {
        pyramid_intersection_volume(self.space, p)
    }
}

/// Volumes of the `2d` pyramids around `c`, indexed `[axis][0 = neg, 1 = pos]`.
pub fn pyramid_masses<O: VolumeOracle + ?Sized>(oracle: &O, c: &RatVec) -> Vec<[Rat; 2]> {
    (0..oracle.dim())
        .map(|i| {
            let neg = oracle.pyramid_volume(&Pyramid { axis: i, sign: crate::geometry::Sign::Neg, apex: c.clone() });
            let pos = oracle.pyramid_volume(&Pyramid { axis: i, sign: crate::geometry::Sign::Pos, apex: c.clone() });
            [neg, pos]
        })
        .collect()
}
