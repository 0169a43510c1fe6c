use std::sync::Arc;

use super::{BoxDomain, DaggerInstance};
use crate::geometry::{linf_distance, RatVec};
use crate::rat::{self, Rat};
use crate::solver::{lambda_cap_reduction, ContractionInstance, EvalError, Map, SolveReport, SolverError};

/// Coordinatewise clamp into the box.
pub fn box_projection(x: &RatVec, domain: &BoxDomain) -> RatVec {
    RatVec::new(
        x.iter()
            .zip(domain.lower().iter().zip(domain.upper().iter()))
            .map(|(v, (a, b))| rat::min_of(rat::max_of(v, a), b).clone())
            .collect(),
    )
}

/// `g(x) = f(proj_box(x))`, so a map on a box becomes a map on the cube.
pub struct ReboxMap {
    inner: Arc<dyn Map>,
    domain: BoxDomain,
}

impl ReboxMap {
    pub fn new(inner: Arc<dyn Map>, domain: BoxDomain) -> Result<Self, SolverError> {
        if inner.dim() != domain.dim() {
            return Err(SolverError::InvalidBox(format!(
                "box has dimension {}, map has {}",
                domain.dim(),
                inner.dim()
            )));
        }
        Ok(ReboxMap { inner, domain })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }
}

impl Map for ReboxMap {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        self.inner.eval(&box_projection(x, &self.domain))
    }
}

/// The projection of any `ε`-approximate fixed point of the result onto the
/// box is an `ε`-approximate fixed point of `f`.
pub fn rebox_to_unit_cube(f: Arc<dyn Map>, domain: BoxDomain, eps: Rat) -> Result<DaggerInstance, SolverError> {
    DaggerInstance::new(Arc::new(ReboxMap::new(f, domain)?), eps)
}

/// `proj_{[0,1]^d} ∘ f`, one query of `f` per evaluation.
pub struct ClampMap {
    inner: DaggerInstance,
}

impl ClampMap {
    pub fn new(inner: DaggerInstance) -> Self {
        ClampMap { inner }
    }
}

impl Map for ClampMap {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        let zero = rat::zero();
        let one = rat::one();
        let y = self.inner.query(x)?;
        Ok(RatVec::new(y.iter().map(|v| rat::min_of(rat::max_of(v, &zero), &one).clone()).collect()))
    }
}

/// Solves the clamped map to `ε/2` with `plain`, then snaps each coordinate
/// whose raw image left `[0,1]` to the violated face. Exactly one query beyond
/// the sub-solver's, spent on the residual of the snapped point.
pub fn dagger_to_plain<F>(inst: &DaggerInstance, plain: F) -> Result<SolveReport, SolverError>
where
    F: FnOnce(&ContractionInstance, &Rat) -> Result<SolveReport, SolverError>,
{
    let eps = inst.epsilon().clone();
    let before = inst.queries();
    let g = ContractionInstance::new(Arc::new(ClampMap::new(inst.clone())), rat::one())?;
    let half = &eps / Rat::from(2u32);
    let sub = plain(&g, &half)?;
    let x = sub.answer.clone();
    let fx = match inst.last_query() {
        Some((p, image)) if p == x => image,
        _ => {
            return Err(SolverError::InvariantViolated(
                "sub-solver did not end with a query at its answer".into(),
            ))
        }
    };
    let zero = rat::zero();
    let one = rat::one();
    let y = RatVec::new(
        x.iter()
            .zip(fx.iter())
            .map(|(xi, fi)| {
                if *fi < zero {
                    zero.clone()
                } else if *fi > one {
                    one.clone()
                } else {
                    xi.clone()
                }
            })
            .collect(),
    );
    let fy = inst.query(&y)?;
    let residual = linf_distance(&y, &fy);
    if residual > eps {
        return Err(SolverError::InvariantViolated(format!(
            "snapped point has residual {} above {}",
            rat::format_rat(&residual),
            rat::format_rat(&eps)
        )));
    }
    Ok(SolveReport {
        d: inst.dim(),
        epsilon: eps,
        answer: y,
        image: fy,
        residual,
        queries: inst.queries() - before,
        iterations: sub.iterations,
        bound: sub.bound.map(|q| q + 1),
        ..sub
    })
}

/// Solves `(1 - ε/2) f` to `ε/2` with `contr`; the answer is `ε`-approximate for `f`.
pub fn plain_to_contraction<F>(inst: &ContractionInstance, eps: &Rat, contr: F) -> Result<SolveReport, SolverError>
where
    F: FnOnce(&ContractionInstance, &Rat) -> Result<SolveReport, SolverError>,
{
    let before = inst.queries();
    let g = lambda_cap_reduction(inst, eps);
    let half = eps / Rat::from(2u32);
    let sub = contr(&g, &half)?;
    let factor = rat::one() - &half;
    let image = sub.image.scale(&(rat::one() / factor));
    let residual = linf_distance(&sub.answer, &image);
    if residual > *eps {
        return Err(SolverError::InvariantViolated(format!(
            "transferred residual {} above {}",
            rat::format_rat(&residual),
            rat::format_rat(eps)
        )));
    }
    Ok(SolveReport {
        epsilon: eps.clone(),
        lambda: inst.lambda().clone(),
        image,
        residual,
        queries: inst.queries() - before,
        reduced: true,
        ..sub
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;
    use crate::solver::{banach_solve, centerpoint_solve, FnMap, SolverConfig};

    fn constant(d: usize, v: Rat) -> Arc<dyn Map> {
        Arc::new(FnMap::new(d, move |_: &RatVec| RatVec::filled(d, v.clone())))
    }

    #[test]
    fn projection_examples() {
        let unit = BoxDomain::unit(3);
        let x = RatVec::from_fracs(&[(13, 10), (3, 5), (-1, 5)]);
        assert_eq!(box_projection(&x, &unit), RatVec::from_fracs(&[(1, 1), (3, 5), (0, 1)]));
        let inside = RatVec::from_fracs(&[(1, 2), (1, 3), (0, 1)]);
        assert_eq!(box_projection(&inside, &unit), inside);
    }

    #[test]
    fn rebox_constant_map() {
        let domain = BoxDomain::new(RatVec::from_fracs(&[(1, 4)]), RatVec::from_fracs(&[(3, 4)])).unwrap();
        let f = constant(1, frac(4, 5));
        let g = rebox_to_unit_cube(f.clone(), domain.clone(), frac(1, 10)).unwrap();
        let x = RatVec::from_fracs(&[(4, 5)]);
        assert_eq!(g.query(&x).unwrap(), x);
        let p = box_projection(&x, &domain);
        assert_eq!(p, RatVec::from_fracs(&[(3, 4)]));
        assert_eq!(linf_distance(&f.eval(&p).unwrap(), &p), frac(1, 20));
        assert_eq!(g.queries(), 1);
    }

    #[test]
    fn rebox_on_unit_cube_is_identity_wrapper() {
        let f: Arc<dyn Map> = Arc::new(FnMap::new(2, |x: &RatVec| x.scale(&frac(1, 2))));
        let g = rebox_to_unit_cube(f.clone(), BoxDomain::unit(2), frac(1, 10)).unwrap();
        let x = RatVec::from_fracs(&[(1, 3), (1, 7)]);
        assert_eq!(g.query(&x).unwrap(), f.eval(&x).unwrap());
    }

    #[test]
    fn shift_up_snaps_to_top() {
        let eps = frac(1, 10);
        let e2 = eps.clone();
        let f = DaggerInstance::new(Arc::new(FnMap::new(1, move |x: &RatVec| x.add(&RatVec::new(vec![e2.clone()])))), eps.clone())
            .unwrap();
        let cfg = SolverConfig::default();
        let r = dagger_to_plain(&f, |g, e| plain_to_contraction(g, e, |h, e2| centerpoint_solve(h, e2, &cfg))).unwrap();
        assert_eq!(r.answer, RatVec::from_ints(&[1]));
        assert_eq!(r.residual, eps);
        assert_eq!(r.queries, f.queries());
    }

    #[test]
    fn in_range_map_keeps_answer() {
        let eps = frac(1, 20);
        let f = DaggerInstance::new(Arc::new(FnMap::new(1, |x: &RatVec| {
            RatVec::new(vec![frac(1, 2) * &x[0] + frac(1, 4)])
        })), eps.clone())
        .unwrap();
        let cfg = SolverConfig::default();
        let mut sub = None;
        let r = dagger_to_plain(&f, |g, e| {
            let rep = banach_solve(g, e, &RatVec::zeros(1), &cfg)?;
            sub = Some(rep.clone());
            Ok(rep)
        })
        .unwrap();
        let sub = sub.unwrap();
        assert_eq!(r.answer, sub.answer);
        assert!(r.residual <= &eps / Rat::from(2u32));
        assert_eq!(r.queries, sub.queries + 1);
    }

    #[test]
    fn plain_transfer_on_affine() {
        let eps = frac(1, 10);
        let f = ContractionInstance::from_fn(1, rat::one(), |x| RatVec::new(vec![rat::one() - &x[0]])).unwrap();
        let cfg = SolverConfig::default();
        let r = plain_to_contraction(&f, &eps, |g, e| {
            assert_eq!(g.lambda(), &frac(19, 20));
            assert_eq!(e, &frac(1, 20));
            centerpoint_solve(g, e, &cfg)
        })
        .unwrap();
        assert!(r.residual <= eps);
        assert_eq!(f.map().eval(&r.answer).unwrap(), r.image);
        assert_eq!(r.queries, f.queries());
    }
}
