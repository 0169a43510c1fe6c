//! Reductions between the contraction, non-expansion and relaxed
//! non-expansion problems, and block composition built on them.
//!
//! A relaxed instance is a non-expansive `f : [0,1]^d -> [-ε, 1+ε]^d`
//! ([`DaggerInstance`]). [`dagger_to_plain`] clamps its range, [`plain_to_contraction`]
//! scales it into a strict contraction, and [`compose`] solves a `d1 + d2`
//! instance by nesting a `d1` solve inside every query of a `d2` solve.

mod compose;
mod reductions;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::geometry::RatVec;
use crate::rat::{self, Rat};
use crate::solver::{check_range, ContractionInstance, EvalError, Map, SolverError};

pub use compose::{
    compose, sqrt_block_bound, sqrt_block_solve, sqrt_block_solver, BlockSolver, ComposedSolver, DaggerSolver,
    EmptyBlock,
};
pub use reductions::{box_projection, dagger_to_plain, plain_to_contraction, rebox_to_unit_cube, ClampMap, ReboxMap};

/// The box `[a_1, b_1] × … × [a_d, b_d]` inside the unit cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxDomain {
    lower: RatVec,
    upper: RatVec,
}

impl BoxDomain {
    pub fn new(lower: RatVec, upper: RatVec) -> Result<Self, SolverError> {
        if lower.dim() != upper.dim() {
            return Err(SolverError::InvalidBox("corner dimensions differ".into()));
        }
        if !lower.in_unit_cube() || !upper.in_unit_cube() {
            return Err(SolverError::InvalidBox("corners must lie in the unit cube".into()));
        }
        if lower.iter().zip(upper.iter()).any(|(a, b)| a > b) {
            return Err(SolverError::InvalidBox("lower corner exceeds upper corner".into()));
        }
        Ok(BoxDomain { lower, upper })
    }

    pub fn unit(d: usize) -> Self {
        BoxDomain { lower: RatVec::zeros(d), upper: RatVec::filled(d, rat::one()) }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &RatVec {
        &self.lower
    }

    pub fn upper(&self) -> &RatVec {
        &self.upper
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        x.dim() == self.dim() && x.iter().zip(self.lower.iter().zip(self.upper.iter())).all(|(v, (a, b))| v >= a && v <= b)
    }
}

struct DaggerInner {
    map: Arc<dyn Map>,
    eps: Rat,
    queries: AtomicU64,
    last: Mutex<Option<(RatVec, RatVec)>>,
}

/// A non-expansive map `[0,1]^d -> [-ε, 1+ε]^d`. Clones share the counter.
#[derive(Clone)]
pub struct DaggerInstance {
    inner: Arc<DaggerInner>,
}

impl fmt::Debug for DaggerInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DaggerInstance")
            .field("dim", &self.dim())
            .field("eps", &rat::format_rat(&self.inner.eps))
            .field("queries", &self.queries())
            .finish()
    }
}

impl DaggerInstance {
    pub fn new(map: Arc<dyn Map>, eps: Rat) -> Result<Self, SolverError> {
        if !rat::is_positive(&eps) {
            return Err(SolverError::InvalidEpsilon(rat::format_rat(&eps)));
        }
        Ok(DaggerInstance {
            inner: Arc::new(DaggerInner { map, eps, queries: AtomicU64::new(0), last: Mutex::new(None) }),
        })
    }

    /// A contraction instance viewed as a relaxed one; queries go through its counter too.
    pub fn from_contraction(inst: &ContractionInstance, eps: Rat) -> Result<Self, SolverError> {
        DaggerInstance::new(Arc::new(inst.clone()), eps)
    }

    pub fn dim(&self) -> usize {
        self.inner.map.dim()
    }

    pub fn epsilon(&self) -> &Rat {
        &self.inner.eps
    }

    pub fn queries(&self) -> u64 {
        self.inner.queries.load(Ordering::SeqCst)
    }

    /// The most recent query point and its image.
    pub fn last_query(&self) -> Option<(RatVec, RatVec)> {
        self.inner.last.lock().expect("query log poisoned").clone()
    }

    pub fn query(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        let d = self.dim();
        if x.dim() != d {
            return Err(EvalError::DimensionMismatch { expected: d, got: x.dim() });
        }
        self.inner.queries.fetch_add(1, Ordering::SeqCst);
        let y = self.inner.map.eval(x)?;
        if y.dim() != d {
            return Err(EvalError::DimensionMismatch { expected: d, got: y.dim() });
        }
        let eps = &self.inner.eps;
        check_range(&y, &-eps.clone(), &(rat::one() + eps))?;
        *self.inner.last.lock().expect("query log poisoned") = Some((x.clone(), y.clone()));
        Ok(y)
    }
}

impl Map for DaggerInstance {
    fn dim(&self) -> usize {
        DaggerInstance::dim(self)
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        self.query(x)
    }
}
