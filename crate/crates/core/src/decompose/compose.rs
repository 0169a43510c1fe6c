//! Nested block solving.
//!
//! The composed solver runs the outer solver on the trailing `d2` coordinates
//! `y`. Each outer query at `y` triggers one full inner solve of
//! `x -> f(x, y)[..d1]`, and the outer map's value is `f(x, y)[d1..]` at the
//! inner answer `x`, so every outer query costs at most `q1` queries of `f`.
//! This is the nesting used for the query bound; the pairing of inner answers
//! is only guaranteed to give an `ε`-approximate fixed point when the blocks do
//! not interact (product maps), so the final residual is always measured and a
//! violation is reported as an error.

use std::sync::{Arc, Mutex};

use super::reductions::{dagger_to_plain, plain_to_contraction};
use super::DaggerInstance;
use crate::geometry::{linf_distance, RatVec};
use crate::rat::{self, Rat};
use crate::solver::{centerpoint_query_bound, centerpoint_solve, EvalError, Map, Method, SolveReport, SolverConfig, SolverError};

/// A solver for relaxed non-expansive instances of a fixed dimension.
pub trait DaggerSolver: Send + Sync {
    fn dim(&self) -> usize;
    /// Worst-case number of queries on an instance with the given `ε`.
    fn query_bound(&self, eps: &Rat) -> u64;
    fn solve(&self, inst: &DaggerInstance) -> Result<SolveReport, SolverError>;
}

/// Clamp, then scale, then the centerpoint method: `ε -> ε/2 -> ε/4` with
/// contraction factor `1 - ε/4`.
pub struct BlockSolver {
    dim: usize,
    config: SolverConfig,
}

impl BlockSolver {
    pub fn new(dim: usize, config: SolverConfig) -> Self {
        BlockSolver { dim, config }
    }
}

impl DaggerSolver for BlockSolver {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query_bound(&self, eps: &Rat) -> u64 {
        let quarter = eps / Rat::from(4u32);
        let lambda = rat::one() - &quarter;
        centerpoint_query_bound(self.dim, &quarter, &lambda, &self.config.centerpoint.quality(self.dim)) + 1
    }

    fn solve(&self, inst: &DaggerInstance) -> Result<SolveReport, SolverError> {
        if inst.dim() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, got: inst.dim() }.into());
        }
        let cfg = &self.config;
        let mut report = dagger_to_plain(inst, |g, e| plain_to_contraction(g, e, |h, e2| centerpoint_solve(h, e2, cfg)))?;
        report.method = Method::Decomposed;
        report.bound = Some(self.query_bound(inst.epsilon()));
        Ok(report)
    }
}

/// The zero-dimensional block; composing with it changes nothing.
pub struct EmptyBlock;

impl DaggerSolver for EmptyBlock {
    fn dim(&self) -> usize {
        0
    }
    fn query_bound(&self, _eps: &Rat) -> u64 {
        1
    }
    fn solve(&self, _inst: &DaggerInstance) -> Result<SolveReport, SolverError> {
        Err(SolverError::InvariantViolated("the empty block has nothing to solve".into()))
    }
}

pub struct ComposedSolver {
    inner: Arc<dyn DaggerSolver>,
    outer: Arc<dyn DaggerSolver>,
}

/// Solver for dimension `inner.dim() + outer.dim()`; the inner block owns the
/// leading coordinates.
pub fn compose(inner: Arc<dyn DaggerSolver>, outer: Arc<dyn DaggerSolver>) -> Arc<dyn DaggerSolver> {
    if outer.dim() == 0 {
        return inner;
    }
    if inner.dim() == 0 {
        return outer;
    }
    Arc::new(ComposedSolver { inner, outer })
}

/// `x -> f(x, y)[..d1]` for a fixed `y`.
struct SliceMap {
    f: DaggerInstance,
    y: RatVec,
    d1: usize,
}

impl Map for SliceMap {
    fn dim(&self) -> usize {
        self.d1
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        Ok(self.f.query(&x.concat(&self.y))?.slice(0..self.d1))
    }
}

struct InnerSolve {
    x: RatVec,
    y: RatVec,
    full_image: RatVec,
}

/// `y -> f(x(y), y)[d1..]` where `x(y)` is the inner solver's answer.
struct OuterMap {
    f: DaggerInstance,
    inner: Arc<dyn DaggerSolver>,
    d1: usize,
    d2: usize,
    last: Mutex<Option<InnerSolve>>,
}

impl Map for OuterMap {
    fn dim(&self) -> usize {
        self.d2
    }
    fn eval(&self, y: &RatVec) -> Result<RatVec, EvalError> {
        if y.dim() != self.d2 {
            return Err(EvalError::DimensionMismatch { expected: self.d2, got: y.dim() });
        }
        let slice = SliceMap { f: self.f.clone(), y: y.clone(), d1: self.d1 };
        let sub = DaggerInstance::new(Arc::new(slice), self.f.epsilon().clone())
            .map_err(|e| EvalError::Custom(e.to_string()))?;
        let rep = self.inner.solve(&sub).map_err(|e| EvalError::Custom(format!("inner solve failed: {e}")))?;
        let point = rep.answer.concat(y);
        let full_image = match self.f.last_query() {
            Some((p, image)) if p == point => image,
            _ => return Err(EvalError::Custom("inner solve did not end at its answer".into())),
        };
        let out = full_image.slice(self.d1..self.d1 + self.d2);
        *self.last.lock().expect("inner log poisoned") = Some(InnerSolve { x: rep.answer, y: y.clone(), full_image });
        Ok(out)
    }
}

impl DaggerSolver for ComposedSolver {
    fn dim(&self) -> usize {
        self.inner.dim() + self.outer.dim()
    }

    fn query_bound(&self, eps: &Rat) -> u64 {
        self.inner.query_bound(eps).saturating_mul(self.outer.query_bound(eps))
    }

    fn solve(&self, inst: &DaggerInstance) -> Result<SolveReport, SolverError> {
        let (d1, d2) = (self.inner.dim(), self.outer.dim());
        if inst.dim() != d1 + d2 {
            return Err(EvalError::DimensionMismatch { expected: d1 + d2, got: inst.dim() }.into());
        }
        let eps = inst.epsilon().clone();
        let before = inst.queries();
        let outer_map = Arc::new(OuterMap { f: inst.clone(), inner: self.inner.clone(), d1, d2, last: Mutex::new(None) });
        let outer_inst = DaggerInstance::new(outer_map.clone(), eps.clone())?;
        let rep = self.outer.solve(&outer_inst)?;
        let last = outer_map.last.lock().expect("inner log poisoned").take();
        let solved = match last {
            Some(s) if s.y == rep.answer => s,
            _ => return Err(SolverError::InvariantViolated("outer solve did not end at its answer".into())),
        };
        let answer = solved.x.concat(&solved.y);
        let residual = linf_distance(&answer, &solved.full_image);
        if residual > eps {
            return Err(SolverError::InvariantViolated(format!(
                "composed answer has residual {} above {}; the blocks interact",
                rat::format_rat(&residual),
                rat::format_rat(&eps)
            )));
        }
        Ok(SolveReport {
            method: Method::Decomposed,
            d: d1 + d2,
            epsilon: eps.clone(),
            lambda: rat::one(),
            answer,
            image: solved.full_image,
            residual,
            queries: inst.queries() - before,
            iterations: rep.iterations,
            bound: Some(self.query_bound(&eps)),
            reduced: true,
            trace: rep.trace,
        })
    }
}

/// Block size `⌈√d⌉`; the instance is padded to `k^2` coordinates.
fn block_size(d: usize) -> usize {
    let mut k = (d as f64).sqrt() as usize;
    while k * k < d {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= d {
        k -= 1;
    }
    k.max(1)
}

/// `k` blocks of size `k`, nested right to left.
pub fn sqrt_block_solver(d: usize, config: &SolverConfig) -> Arc<dyn DaggerSolver> {
    let k = block_size(d);
    let mut solver: Arc<dyn DaggerSolver> = Arc::new(EmptyBlock);
    for _ in 0..k {
        solver = compose(Arc::new(BlockSolver::new(k, config.clone())), solver);
    }
    solver
}

pub fn sqrt_block_bound(d: usize, eps: &Rat, config: &SolverConfig) -> u64 {
    sqrt_block_solver(d, config).query_bound(eps)
}

/// Extra coordinates that always map to 0, so the padded map stays non-expansive.
struct PadMap {
    f: DaggerInstance,
    padded: usize,
}

impl Map for PadMap {
    fn dim(&self) -> usize {
        self.padded
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        let d = self.f.dim();
        let image = self.f.query(&x.slice(0..d))?;
        Ok(image.concat(&RatVec::zeros(self.padded - d)))
    }
}

pub fn sqrt_block_solve(inst: &DaggerInstance, config: &SolverConfig) -> Result<SolveReport, SolverError> {
    let d = inst.dim();
    let k = block_size(d);
    let before = inst.queries();
    let solver = sqrt_block_solver(d, config);
    let padded = if k * k == d {
        inst.clone()
    } else {
        DaggerInstance::new(Arc::new(PadMap { f: inst.clone(), padded: k * k }), inst.epsilon().clone())?
    };
    let rep = solver.solve(&padded)?;
    let answer = rep.answer.slice(0..d);
    let image = rep.image.slice(0..d);
    let residual = linf_distance(&answer, &image);
    Ok(SolveReport {
        d,
        answer,
        image,
        residual,
        queries: inst.queries() - before,
        bound: Some(solver.query_bound(inst.epsilon())),
        ..rep
    })
}
