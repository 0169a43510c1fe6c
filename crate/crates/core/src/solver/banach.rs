use super::{check_epsilon, ContractionInstance, Method, SolveReport, SolverConfig, SolverError, TraceEntry, TraceLevel};
use crate::geometry::{linf_distance, RatVec};
use crate::rat::{self, Rat};

/// `⌈ln(1/ε)/ln(1/λ)⌉ + 2`, or `None` for `λ = 1`.
pub fn banach_iteration_bound(eps: &Rat, lambda: &Rat) -> Option<u64> {
    if *lambda >= 1u32 {
        return None;
    }
    if rat::is_zero(lambda) || *eps >= 1u32 {
        return Some(2);
    }
    let ratio = rat::ln(eps) / rat::ln(lambda);
    Some(ratio.ceil().max(0.0) as u64 + 2)
}

/// Iterates `x <- f(x)` from `start` until `‖x - f(x)‖∞ <= ε`.
pub fn banach_solve(
    inst: &ContractionInstance,
    eps: &Rat,
    start: &RatVec,
    config: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    check_epsilon(eps)?;
    if start.dim() != inst.dim() || !start.in_unit_cube() {
        return Err(SolverError::StartOutsideCube);
    }
    let bound = banach_iteration_bound(eps, inst.lambda());
    let cap = bound.map_or(config.max_banach_iterations, |b| 2 * b);
    let before = inst.queries();
    let mut trace = Vec::new();
    let mut x = start.clone();
    let mut fx = inst.query(&x)?;
    let mut residual = linf_distance(&x, &fx);
    let mut iterations = 0u64;
    loop {
        if config.trace != TraceLevel::None {
            let mut entry = TraceEntry::summary(inst.queries() - before, residual.clone(), None);
            if config.trace == TraceLevel::Full {
                entry.point = Some(x.clone());
            }
            trace.push(entry);
        }
        if residual <= *eps {
            break;
        }
        if iterations >= cap {
            return Err(SolverError::IterationCap { cap });
        }
        x = fx;
        fx = inst.query(&x)?;
        residual = linf_distance(&x, &fx);
        iterations += 1;
    }
    Ok(SolveReport {
        method: Method::Banach,
        d: inst.dim(),
        epsilon: eps.clone(),
        lambda: inst.lambda().clone(),
        answer: x,
        image: fx,
        residual,
        queries: inst.queries() - before,
        iterations,
        bound: bound.map(|b| b + 1),
        reduced: false,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn halving() -> ContractionInstance {
        ContractionInstance::from_fn(1, frac(1, 2), |x| x.scale(&frac(1, 2))).unwrap()
    }

    #[test]
    fn hand_iteration() {
        let inst = halving();
        let r = banach_solve(&inst, &frac(1, 10), &RatVec::from_ints(&[1]), &SolverConfig::default()).unwrap();
        assert_eq!(r.answer, RatVec::from_fracs(&[(1, 8)]));
        assert_eq!(r.residual, frac(1, 16));
        assert_eq!(r.iterations, 3);
        assert_eq!(r.queries, 4);
        assert_eq!(r.trace.len(), 4);
    }

    #[test]
    fn starting_at_fixed_point_returns_at_once() {
        let inst = halving();
        let r = banach_solve(&inst, &frac(1, 10), &RatVec::from_ints(&[0]), &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.queries, 1);
        assert_eq!(r.residual, rat::zero());
    }

    #[test]
    fn slow_contraction_takes_thousands() {
        // Reflection through 1/2 scaled by λ: the residual shrinks by exactly λ per step.
        let lambda = frac(999, 1000);
        let l2 = lambda.clone();
        let inst = ContractionInstance::from_fn(1, lambda.clone(), move |x| {
            let half = frac(1, 2);
            RatVec::new(vec![&half - &l2 * (&x[0] - &half)])
        })
        .unwrap();
        let mut cfg = SolverConfig::default();
        cfg.trace = TraceLevel::None;
        let eps = frac(1, 1000);
        let r = banach_solve(&inst, &eps, &RatVec::from_ints(&[0]), &cfg).unwrap();
        let closed = (0.001f64).ln() / (0.999f64).ln();
        assert!(r.iterations as f64 >= closed / 2.0 && r.iterations as f64 <= closed * 2.0);
        assert!(r.residual <= eps);
        assert!(r.iterations <= banach_iteration_bound(&eps, &lambda).unwrap());
    }

    #[test]
    fn bound_formula() {
        assert_eq!(banach_iteration_bound(&frac(1, 10), &frac(1, 2)), Some(6));
        assert_eq!(banach_iteration_bound(&frac(1, 10), &rat::zero()), Some(2));
        assert_eq!(banach_iteration_bound(&frac(1, 10), &rat::one()), None);
    }

    #[test]
    fn flip_hits_cap() {
        let inst = ContractionInstance::from_fn(1, rat::one(), |x| {
            RatVec::new(vec![rat::one() - &x[0]])
        })
        .unwrap();
        let mut cfg = SolverConfig::default();
        cfg.max_banach_iterations = 50;
        let err = banach_solve(&inst, &frac(1, 10), &RatVec::from_ints(&[0]), &cfg).unwrap_err();
        assert_eq!(err, SolverError::IterationCap { cap: 50 });
        assert!(matches!(
            banach_solve(&inst, &rat::zero(), &RatVec::from_ints(&[0]), &cfg),
            Err(SolverError::InvalidEpsilon(_))
        ));
    }
}
