use super::reduction::{lambda_cap_reduction, needs_lambda_cap};
use super::{check_epsilon, ContractionInstance, Method, SolveReport, SolverConfig, SolverError, TraceEntry, TraceLevel};
use crate::centerpoint::find_centerpoint;
use crate::geometry::{direction_from_displacement, linf_distance, search_space_cut, RatVec, SearchSpace};
use crate::rat::{self, Rat};
use crate::volume::VolumeEngine;

/// Largest dimension for which the safe-ball grid (`3^d` points) is checked.
const BALL_CHECK_MAX_DIM: usize = 6;

/// `r = ε(1 - λ) / (2 + 2λ)`: the ball around `x*` no cut can touch.
pub fn ball_radius(eps: &Rat, lambda: &Rat) -> Rat {
    eps * (rat::one() - lambda) / (Rat::from(2u32) + Rat::from(2u32) * lambda)
}

/// `⌈d ln(1/r) / ln(1/(1-α))⌉ + 1` for centerpoints of quality `α`.
pub fn centerpoint_query_bound(d: usize, eps: &Rat, lambda: &Rat, quality: &Rat) -> u64 {
    let r = ball_radius(eps, lambda);
    let shrink = -(1.0 - rat::to_f64(quality)).ln();
    (d as f64 * -rat::ln(&r) / shrink).ceil().max(0.0) as u64 + 1
}

/// `⌈4 d^2 ln(1/r)⌉ + 1`, the looser form using `ln(1/(1-α)) >= α = 1/(4d)`.
pub fn coarse_query_bound(d: usize, eps: &Rat, lambda: &Rat) -> u64 {
    let r = ball_radius(eps, lambda);
    (4.0 * (d * d) as f64 * -rat::ln(&r)).ceil().max(0.0) as u64 + 1
}

struct Outcome {
    answer: RatVec,
    image: RatVec,
    residual: Rat,
    iterations: u64,
    bound: u64,
    trace: Vec<TraceEntry>,
}

/// Queries approximate centerpoints and cuts away `H_{c - f(c)}(c)` until a
/// query lands within `ε` of its image.
///
/// When `λ > 1 - ε` the map is first replaced by `(1 - ε/2) f` and solved to
/// `ε/2`; the returned residual is always measured against `f` itself, from
/// the image already queried.
pub fn centerpoint_solve(
    inst: &ContractionInstance,
    eps: &Rat,
    config: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    check_epsilon(eps)?;
    let before = inst.queries();
    let reduced = needs_lambda_cap(inst, eps);
    let out = if reduced {
        let g = lambda_cap_reduction(inst, eps);
        let half = eps / Rat::from(2u32);
        let mut out = run(&g, &half, config)?;
        let factor = rat::one() - &half;
        out.image = out.image.scale(&(rat::one() / factor));
        out.residual = linf_distance(&out.answer, &out.image);
        out
    } else {
        run(inst, eps, config)?
    };
    if out.residual > *eps {
        return Err(SolverError::InvariantViolated(format!(
            "returned residual {} exceeds epsilon",
            rat::format_rat(&out.residual)
        )));
    }
    Ok(SolveReport {
        method: Method::Centerpoint,
        d: inst.dim(),
        epsilon: eps.clone(),
        lambda: inst.lambda().clone(),
        answer: out.answer,
        image: out.image,
        residual: out.residual,
        queries: inst.queries() - before,
        iterations: out.iterations,
        bound: Some(out.bound),
        reduced,
        trace: out.trace,
    })
}

fn run(inst: &ContractionInstance, eps: &Rat, config: &SolverConfig) -> Result<Outcome, SolverError> {
    let d = inst.dim();
    let lambda = inst.lambda();
    if *lambda >= 1u32 {
        return Err(SolverError::InvalidLambda(rat::format_rat(lambda)));
    }
    let quality = config.centerpoint.quality(d);
    let bound = centerpoint_query_bound(d, eps, lambda, &quality);
    let cap = 2 * bound;
    let ball = if config.check_invariants && d <= BALL_CHECK_MAX_DIM {
        inst.fixed_point().map(|x| ball_grid(x, &ball_radius(eps, lambda)))
    } else {
        None
    };
    let mut engine = VolumeEngine::unit_cube(d, config.caching);
    let mut space = SearchSpace::new(d)?;
    let mut trace = Vec::new();
    let mut iterations = 0u64;
    loop {
        if iterations >= cap {
            return Err(SolverError::IterationCap { cap });
        }
        let volume = engine.total_volume();
        if !rat::is_positive(&volume) {
            return Err(SolverError::VolumeExhausted { iterations });
        }
        let cert = find_centerpoint(&engine, &config.centerpoint)?;
        let c = cert.point;
        let fc = inst.query(&c)?;
        let residual = linf_distance(&c, &fc);
        let done = residual <= *eps;
        let direction = if done { None } else { Some(direction_from_displacement(&c, &fc)?) };
        if config.trace != TraceLevel::None {
            let mut entry = TraceEntry::summary(iterations + 1, residual.clone(), Some(volume.clone()));
            if config.trace == TraceLevel::Full {
                entry.point = Some(c.clone());
                entry.direction = direction.clone();
                entry.quality = Some(cert.quality.clone());
                entry.balance_steps = Some(cert.balance_steps);
                entry.pieces = Some(engine.piece_count());
            }
            trace.push(entry);
        }
        iterations += 1;
        if done {
            return Ok(Outcome { answer: c, image: fc, residual, iterations, bound, trace });
        }
        let v = direction.expect("set when not done");
        let next = engine.without_halfspace(&v, &c)?;
        space = search_space_cut(&space, &v, &c)?;
        if config.check_invariants {
            let after = next.total_volume();
            if after > (rat::one() - &quality) * &volume {
                return Err(SolverError::InvariantViolated(format!(
                    "volume fell only from {} to {}",
                    rat::format_rat(&volume),
                    rat::format_rat(&after)
                )));
            }
            if let Some(points) = &ball {
                for p in points {
                    if !space.contains(p)? {
                        return Err(SolverError::InvariantViolated(format!("safe-ball point {p} was cut")));
                    }
                }
            }
        }
        engine = next;
    }
}

/// `x* + r·t` for `t ∈ {-1,0,1}^d`, clamped to the cube.
fn ball_grid(center: &RatVec, r: &Rat) -> Vec<RatVec> {
    let d = center.dim();
    let mut out = Vec::with_capacity(3usize.pow(d as u32));
    for code in 0..3usize.pow(d as u32) {
        let mut rest = code;
        let coords = center
            .iter()
            .map(|xi| {
                let t = (rest % 3) as i64 - 1;
                rest /= 3;
                let y = xi + Rat::from(t) * r;
                rat::min_of(rat::max_of(&y, &rat::zero()), &rat::one()).clone()
            })
            .collect();
        out.push(RatVec::new(coords));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn affine_1d(a: Rat, b: Rat) -> ContractionInstance {
        let lambda = rat::abs(&a);
        let x_star = &b / (rat::one() - &a);
        ContractionInstance::from_fn(1, lambda, move |x| RatVec::new(vec![&a * &x[0] + &b]))
            .unwrap()
            .with_fixed_point(RatVec::new(vec![x_star]))
            .unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(ball_radius(&frac(1, 100), &frac(9, 10)), frac(1, 3800));
        let q = frac(1, 4);
        let b = centerpoint_query_bound(1, &frac(1, 100), &frac(9, 10), &q);
        // ln(3800) / ln(4/3) = 28.67
        assert_eq!(b, 30);
        assert!(b <= coarse_query_bound(1, &frac(1, 100), &frac(9, 10)));
    }

    #[test]
    fn one_dimensional_affine() {
        let inst = affine_1d(frac(9, 10), frac(1, 20));
        let eps = frac(1, 100);
        let r = centerpoint_solve(&inst, &eps, &SolverConfig::default()).unwrap();
        assert!(r.residual <= eps);
        assert!(!r.reduced);
        assert!(r.queries <= r.bound.unwrap());
        assert_eq!(r.queries, r.iterations);
        let volumes: Vec<_> = r.trace.iter().map(|t| t.volume.clone().unwrap()).collect();
        assert!(volumes.windows(2).all(|w| w[1] < w[0]));
        let banach = super::super::banach_solve(&inst, &eps, &RatVec::zeros(1), &SolverConfig::default()).unwrap();
        assert!(linf_distance(&r.answer, &banach.answer) <= frac(2, 10));
    }

    #[test]
    fn corner_fixed_point() {
        let inst = affine_1d(frac(1, 2), rat::zero());
        let r = centerpoint_solve(&inst, &frac(1, 100), &SolverConfig::default()).unwrap();
        assert!(r.residual <= frac(1, 100));
        let d2 = ContractionInstance::from_fn(2, frac(1, 2), |x| {
            RatVec::new(vec![x[1].clone() / Rat::from(2u32) + frac(1, 2), x[0].clone() / Rat::from(2u32) + frac(1, 2)])
        })
        .unwrap()
        .with_fixed_point(RatVec::from_ints(&[1, 1]))
        .unwrap();
        let r = centerpoint_solve(&d2, &frac(1, 20), &SolverConfig::default()).unwrap();
        assert!(r.residual <= frac(1, 20));
        assert!(r.queries <= r.bound.unwrap());
    }

    #[test]
    fn near_one_lambda_goes_through_reduction() {
        let inst = affine_1d(frac(-999, 1000), frac(1999, 2000));
        let eps = frac(1, 100);
        let r = centerpoint_solve(&inst, &eps, &SolverConfig::default()).unwrap();
        assert!(r.reduced);
        assert!(r.residual <= eps);
        let direct = inst.map().eval(&r.answer).unwrap();
        assert_eq!(direct, r.image);
    }

    #[test]
    fn full_trace_records_directions() {
        let inst = affine_1d(frac(1, 2), frac(1, 4));
        let cfg = SolverConfig { trace: TraceLevel::Full, ..Default::default() };
        let r = centerpoint_solve(&inst, &frac(1, 1000), &cfg).unwrap();
        let last = r.trace.last().unwrap();
        assert!(last.direction.is_none());
        assert!(r.trace[..r.trace.len() - 1].iter().all(|t| t.direction.is_some() && t.point.is_some()));
        let quiet = SolverConfig { trace: TraceLevel::None, ..Default::default() };
        assert!(centerpoint_solve(&inst, &frac(1, 1000), &quiet).unwrap().trace.is_empty());
    }

    #[test]
    fn lying_instances_are_caught() {
        // A step map has no approximate fixed point at all.
        let step = ContractionInstance::from_fn(1, frac(1, 2), |x| {
            RatVec::new(vec![if x[0] < frac(2, 5) { rat::one() } else { rat::zero() }])
        })
        .unwrap();
        assert!(centerpoint_solve(&step, &frac(1, 100), &SolverConfig::default()).is_err());
        // A wrong declared fixed point is cut on the first iteration.
        let wrong = ContractionInstance::from_fn(1, frac(1, 2), |x| x.scale(&frac(1, 2)))
            .unwrap()
            .with_fixed_point(RatVec::from_ints(&[1]))
            .unwrap();
        assert!(matches!(
            centerpoint_solve(&wrong, &frac(1, 100), &SolverConfig::default()),
            Err(SolverError::InvariantViolated(_))
        ));
    }

    #[test]
    fn ball_grid_clamps() {
        let g = ball_grid(&RatVec::from_ints(&[0, 1]), &frac(1, 10));
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|p| p.in_unit_cube()));
    }
}
