//! Fixed-point solvers for ℓ∞-contracting maps on the unit cube.
//!
//! [`centerpoint_solve`] repeatedly queries an approximate centerpoint of the
//! search space and removes the halfspace around it that points along
//! `c - f(c)`. [`banach_solve`] is plain iteration. Both count every
//! evaluation of `f` through [`ContractionInstance`].

mod banach;
mod centerpoint_method;
mod instance;
mod reduction;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centerpoint::{CenterpointConfig, CenterpointError};
use crate::geometry::{GeometryError, HalfspaceDir, RatVec};
use crate::rat::{self, Rat};

pub use banach::{banach_iteration_bound, banach_solve};
pub use centerpoint_method::{ball_radius, centerpoint_query_bound, centerpoint_solve, coarse_query_bound};
pub use instance::{check_range, ContractionInstance, EvalError, FnMap, Map};
pub use reduction::{lambda_cap_reduction, needs_lambda_cap, ScaledMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(String),
    #[error("contraction factor must lie in [0, 1], got {0}")]
    InvalidLambda(String),
    #[error("start point lies outside the unit cube")]
    StartOutsideCube,
    #[error("iteration cap of {cap} reached without an approximate fixed point")]
    IterationCap { cap: u64 },
    #[error("search space volume reached zero after {iterations} cuts; the map is not contracting as declared")]
    VolumeExhausted { iterations: u64 },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("solver invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Centerpoint(#[from] CenterpointError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Banach,
    Centerpoint,
    Decomposed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Banach, Method::Centerpoint, Method::Decomposed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Banach => "banach",
            Method::Centerpoint => "centerpoint",
            Method::Decomposed => "decomposed",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected banach, centerpoint or decomposed)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    None,
    /// Query index, volume and residual per iteration.
    #[default]
    Summary,
    /// Also the query point, the cut direction and centerpoint details.
    Full,
}

impl std::str::FromStr for TraceLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(TraceLevel::None),
            "summary" => Ok(TraceLevel::Summary),
            "full" => Ok(TraceLevel::Full),
            _ => Err(format!("unknown trace level '{s}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub trace: TraceLevel,
    /// Memoise pyramid volumes within one search space.
    pub caching: bool,
    pub centerpoint: CenterpointConfig,
    /// Check the per-iteration volume decrease and, when the fixed point is
    /// known, that a grid of the safe ball around it survives every cut.
    pub check_invariants: bool,
    /// Banach cap used when no contraction bound is available (`λ = 1`).
    pub max_banach_iterations: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            trace: TraceLevel::Summary,
            caching: true,
            centerpoint: CenterpointConfig::default(),
            check_invariants: true,
            max_banach_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based index of the query made in this iteration.
    pub query: u64,
    #[serde(with = "rat::serde_rat")]
    pub residual: Rat,
    /// `vol(X)` before the cut (centerpoint method only).
    #[serde(with = "rat::serde_rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<RatVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<HalfspaceDir>,
    #[serde(with = "rat::serde_rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<usize>,
}

impl TraceEntry {
    pub(crate) fn summary(query: u64, residual: Rat, volume: Option<Rat>) -> Self {
        TraceEntry {
            query,
            residual,
            volume,
            point: None,
            direction: None,
            quality: None,
            balance_steps: None,
            pieces: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub d: usize,
    #[serde(with = "rat::serde_rat")]
    pub epsilon: Rat,
    #[serde(with = "rat::serde_rat")]
    pub lambda: Rat,
    pub answer: RatVec,
    /// `f(answer)` for the instance that was passed in.
    pub image: RatVec,
    #[serde(with = "rat::serde_rat")]
    pub residual: Rat,
    pub queries: u64,
    pub iterations: u64,
    /// Theoretical query bound for this run, when one applies.
    pub bound: Option<u64>,
    /// Whether the map was first scaled by `1 - ε/2`.
    pub reduced: bool,
    pub trace: Vec<TraceEntry>,
}

impl SolveReport {
    pub fn succeeded(&self) -> bool {
        self.residual <= self.epsilon
    }
}

pub(crate) fn check_epsilon(eps: &Rat) -> Result<(), SolverError> {
    if rat::is_positive(eps) {
        Ok(())
    } else {
        Err(SolverError::InvalidEpsilon(rat::format_rat(eps)))
    }
}
