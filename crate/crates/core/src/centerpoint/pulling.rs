//! Pulling a candidate point along a sign direction until the pyramids it
//! moves away from hold a target mass.

use super::{CenterpointError, VolumeOracle};
use crate::geometry::{linf_norm, Pyramid, RatVec, Sign};
use crate::rat::{self, Rat};

#[derive(Debug, Clone)]
pub struct PullRequest {
    pub start: RatVec,
    pub direction: Vec<i8>,
    pub target: Rat,
    pub slack: Rat,
}

#[derive(Debug, Clone)]
pub struct PullOutcome {
    pub point: RatVec,
    pub alpha: Rat,
    /// Pulled mass at `point`, in `[target - slack, target]`.
    pub mass: Rat,
    pub bisection_steps: u32,
}

/// `F(α) = Σ_{u_i ≠ 0} vol(P^{-u_i}_i(c + αu) ∩ X)`.
pub fn pulled_mass<O: VolumeOracle + ?Sized>(oracle: &O, c: &RatVec, u: &[i8], alpha: &Rat) -> Rat {
    let point = c.add_signed(u, alpha);
    let mut total = rat::zero();
    for (i, &s) in u.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let sign = if s > 0 { Sign::Neg } else { Sign::Pos };
        total += oracle.pyramid_volume(&Pyramid { axis: i, sign, apex: point.clone() });
    }
    total
}

/// Bisection on `α ∈ [0, 2‖c‖∞ + 2]` keeping `F(lo) <= m <= F(hi)`.
///
/// Stops as soon as a midpoint lands in `[m - slack, m]`, or when the bracket is
/// narrower than `slack / sqrt(8 d^5)` (compared squared, exactly), in which
/// case the mass bound at `lo` follows from the perturbation bound and is
/// checked anyway.
pub fn pull<O: VolumeOracle + ?Sized>(oracle: &O, req: &PullRequest) -> Result<PullOutcome, CenterpointError> {
    let d = oracle.dim();
    let c = &req.start;
    let u = &req.direction;
    if u.len() != d || c.dim() != d {
        return Err(crate::geometry::GeometryError::DimensionMismatch { expected: d, got: u.len().min(c.dim()) }.into());
    }
    if u.iter().all(|&s| s == 0) {
        return Err(CenterpointError::ZeroDirection);
    }
    if !rat::is_positive(&req.slack) {
        return Err(CenterpointError::Precondition("pull slack must be positive".into()));
    }
    let m = &req.target;
    let total = oracle.total_volume();
    if *m > total {
        return Err(CenterpointError::TargetAboveTotal { target: m.to_string(), total: total.to_string() });
    }
    let floor = m - &req.slack;
    let f0 = pulled_mass(oracle, c, u, &rat::zero());
    if f0 > *m {
        return Err(CenterpointError::TargetBelowCurrent { target: m.to_string(), current: f0.to_string() });
    }
    if f0 >= floor {
        return Ok(PullOutcome { point: c.clone(), alpha: rat::zero(), mass: f0, bisection_steps: 0 });
    }
    let two = Rat::from(2u32);
    let mut lo = rat::zero();
    let mut f_lo = f0;
    let mut hi = linf_norm(c) * &two + &two;
    let width_factor = Rat::from(8u64 * (d as u64).pow(5));
    let slack_sq = &req.slack * &req.slack;
    let mut steps = 0u32;
    loop {
        let width = &hi - &lo;
        if &width * &width * &width_factor < slack_sq {
            break;
        }
        let mid = (&lo + &hi) / &two;
        let f_mid = pulled_mass(oracle, c, u, &mid);
        steps += 1;
        if f_mid <= *m {
            lo = mid;
            f_lo = f_mid;
            if f_lo >= floor {
                break;
            }
        } else {
            hi = mid;
        }
    }
    if f_lo < floor {
        return Err(CenterpointError::PrecisionViolated { mass: f_lo.to_string(), floor: floor.to_string() });
    }
    Ok(PullOutcome { point: c.add_signed(u, &lo), alpha: lo, mass: f_lo, bisection_steps: steps })
}
