use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use super::SolverError;
use crate::geometry::RatVec;
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("map expects dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {coord} of the image is {value}, outside [{lo}, {hi}]")]
    OutOfRange { coord: usize, value: String, lo: String, hi: String },
    #[error("{0}")]
    Custom(String),
}

/// A map `R^d -> R^d` evaluated exactly.
pub trait Map: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError>;
}

/// A [`Map`] from a closure.
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&RatVec) -> RatVec + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnMap { dim, f }
    }
}

impl<F> Map for FnMap<F>
where
    F: Fn(&RatVec) -> RatVec + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        Ok((self.f)(x))
    }
}

struct Inner {
    map: Arc<dyn Map>,
    lambda: Rat,
    fixed_point: Option<RatVec>,
    queries: AtomicU64,
    label: String,
}

/// A map `[0,1]^d -> [0,1]^d` with a declared contraction factor and a query
/// counter. Clones share the counter.
#[derive(Clone)]
pub struct ContractionInstance {
    inner: Arc<Inner>,
}

impl fmt::Debug for ContractionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContractionInstance")
            .field("label", &self.inner.label)
            .field("dim", &self.dim())
            .field("lambda", &rat::format_rat(&self.inner.lambda))
            .field("queries", &self.queries())
            .finish()
    }
}

impl ContractionInstance {
    /// `lambda = 1` declares a non-expansive map.
    pub fn new(map: Arc<dyn Map>, lambda: Rat) -> Result<Self, SolverError> {
        if rat::is_negative(&lambda) || lambda > 1u32 {
            return Err(SolverError::InvalidLambda(rat::format_rat(&lambda)));
        }
        Ok(ContractionInstance {
            inner: Arc::new(Inner {
                map,
                lambda,
                fixed_point: None,
                queries: AtomicU64::new(0),
                label: String::new(),
            }),
        })
    }

    pub fn from_fn<F>(dim: usize, lambda: Rat, f: F) -> Result<Self, SolverError>
    where
        F: Fn(&RatVec) -> RatVec + Send + Sync + 'static,
    {
        ContractionInstance::new(Arc::new(FnMap::new(dim, f)), lambda)
    }

    /// Attaches the known fixed point; it must be in the cube and have the right dimension.
    pub fn with_fixed_point(self, x: RatVec) -> Result<Self, SolverError> {
        if x.dim() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), got: x.dim() }.into());
        }
        if !x.in_unit_cube() {
            return Err(SolverError::InvariantViolated("fixed point lies outside the unit cube".into()));
        }
        Ok(self.rebuild(|i| i.fixed_point = Some(x)))
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        let label = label.into();
        self.rebuild(|i| i.label = label)
    }

    fn rebuild(self, edit: impl FnOnce(&mut Inner)) -> Self {
        let inner = match Arc::try_unwrap(self.inner) {
            Ok(inner) => inner,
            Err(shared) => Inner {
                map: shared.map.clone(),
                lambda: shared.lambda.clone(),
                fixed_point: shared.fixed_point.clone(),
                queries: AtomicU64::new(shared.queries.load(Ordering::SeqCst)),
                label: shared.label.clone(),
            },
        };
        let mut inner = inner;
        edit(&mut inner);
        ContractionInstance { inner: Arc::new(inner) }
    }

    pub fn dim(&self) -> usize {
        self.inner.map.dim()
    }

    pub fn lambda(&self) -> &Rat {
        &self.inner.lambda
    }

    pub fn fixed_point(&self) -> Option<&RatVec> {
        self.inner.fixed_point.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn map(&self) -> &Arc<dyn Map> {
        &self.inner.map
    }

    pub fn queries(&self) -> u64 {
        self.inner.queries.load(Ordering::SeqCst)
    }

    pub fn reset_queries(&self) {
        self.inner.queries.store(0, Ordering::SeqCst);
    }

    /// Evaluates `f(x)`, counting one query, and checks the image is in the cube.
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
        check_range(&y, &rat::zero(), &rat::one())?;
        Ok(y)
    }
}

/// Counted evaluation of the instance as a map, so instances can be wrapped.
impl Map for ContractionInstance {
    fn dim(&self) -> usize {
        ContractionInstance::dim(self)
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        self.query(x)
    }
}

pub fn check_range(y: &RatVec, lo: &Rat, hi: &Rat) -> Result<(), EvalError> {
    for (i, v) in y.iter().enumerate() {
        if v < lo || v > hi {
            return Err(EvalError::OutOfRange {
                coord: i,
                value: rat::format_rat(v),
                lo: rat::format_rat(lo),
                hi: rat::format_rat(hi),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn halving() -> ContractionInstance {
        ContractionInstance::from_fn(1, frac(1, 2), |x| x.scale(&frac(1, 2))).unwrap()
    }

    #[test]
    fn counts_every_query_and_shares_counter() {
        let inst = halving();
        let other = inst.clone();
        inst.query(&RatVec::from_ints(&[1])).unwrap();
        other.query(&RatVec::from_ints(&[0])).unwrap();
        assert_eq!(inst.queries(), 2);
        inst.reset_queries();
        assert_eq!(other.queries(), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ContractionInstance::from_fn(1, frac(3, 2), |x| x.clone()).is_err());
        assert!(ContractionInstance::from_fn(1, frac(-1, 2), |x| x.clone()).is_err());
        let inst = halving();
        assert!(matches!(
            inst.query(&RatVec::from_ints(&[1, 1])),
            Err(EvalError::DimensionMismatch { expected: 1, got: 2 })
        ));
        let escaping = ContractionInstance::from_fn(1, rat::one(), |x| x.add(&RatVec::from_ints(&[1]))).unwrap();
        assert!(matches!(escaping.query(&RatVec::from_ints(&[1])), Err(EvalError::OutOfRange { .. })));
        assert!(halving().with_fixed_point(RatVec::from_ints(&[2])).is_err());
    }

    #[test]
    fn metadata_survives_rebuild() {
        let inst = halving().with_fixed_point(RatVec::from_ints(&[0])).unwrap().with_label("half");
        assert_eq!(inst.label(), "half");
        assert_eq!(inst.fixed_point(), Some(&RatVec::from_ints(&[0])));
        assert_eq!(inst.lambda(), &frac(1, 2));
    }
}
