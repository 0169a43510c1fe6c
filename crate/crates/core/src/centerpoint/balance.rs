//! Balancing the negative pyramids around a point that dominates the cube.

use super::pulling::{pull, PullRequest};
use super::{CenterpointError, VolumeOracle};
use crate::geometry::{Pyramid, RatVec, Sign};
use crate::rat::{self, Rat};

#[derive(Debug, Clone)]
pub struct BalanceStep {
    /// Largest gap in the descending sort of the masses.
    pub gamma: Rat,
    /// Number of heavy indices (the sorted prefix left in place).
    pub k: usize,
    pub direction: Vec<i8>,
    pub alpha: Rat,
    pub potential_before: Rat,
    pub potential_after: Rat,
}

#[derive(Debug, Clone)]
pub struct BalanceState {
    pub c: RatVec,
    /// `π_i = vol(P^-_i(c) ∩ X)`.
    pub pi: Vec<Rat>,
    /// `Π = Σ (π_i - vol(X)/d)^2`.
    pub potential: Rat,
    pub total: Rat,
    pub steps: Vec<BalanceStep>,
    pub cap: u64,
}

/// `⌈2 d^3 ln(2/ε^2)⌉`.
pub fn balance_iteration_cap(d: usize, eps: &Rat) -> u64 {
    let ln_eps = rat::ln(eps);
    let v = 2.0 * (d as f64).powi(3) * (std::f64::consts::LN_2 - 2.0 * ln_eps);
    v.ceil().max(1.0) as u64
}

fn negative_masses<O: VolumeOracle + ?Sized>(oracle: &O, c: &RatVec) -> Vec<Rat> {
    (0..oracle.dim())
        .map(|i| oracle.pyramid_volume(&Pyramid { axis: i, sign: Sign::Neg, apex: c.clone() }))
        .collect()
}

fn potential(pi: &[Rat], mean: &Rat) -> Rat {
    pi.iter().fold(rat::zero(), |acc, p| {
        let dev = p - mean;
        acc + &dev * &dev
    })
}

/// Pulls toward the light pyramids until `Π <= ε^2`, so that every
/// `π_i >= vol(X)/d - ε`. Each iteration is checked against the guaranteed
/// potential drop `γ^2/2 - ε^2/(4 d^3)`, and coordinates never decrease.
pub fn balance_negative_pyramids<O: VolumeOracle + ?Sized>(
    oracle: &O,
    eps: &Rat,
) -> Result<BalanceState, CenterpointError> {
    let d = oracle.dim();
    let total = oracle.total_volume();
    if !rat::is_positive(&total) {
        return Err(CenterpointError::ZeroVolume);
    }
    if !rat::is_positive(eps) {
        return Err(CenterpointError::Precondition("balancing slack must be positive".into()));
    }
    let dd = Rat::from(d as u64);
    let d3 = Rat::from((d as u64).pow(3));
    let mean = &total / &dd;
    let eps_sq = eps * eps;
    let pull_slack = &eps_sq / (Rat::from(8u32) * &d3);
    let drop_slack = &eps_sq / (Rat::from(4u32) * &d3);
    let two = Rat::from(2u32);
    let cap = balance_iteration_cap(d, eps);

    let mut c = RatVec::filled(d, rat::one());
    let mut pi = negative_masses(oracle, &c);
    let sum: Rat = pi.iter().fold(rat::zero(), |a, p| a + p);
    if sum != total {
        return Err(CenterpointError::InvariantViolated(format!(
            "negative masses sum to {sum}, expected {total}"
        )));
    }
    let mut pot = potential(&pi, &mean);
    let mut steps = Vec::new();
    while pot > eps_sq {
        if steps.len() as u64 >= cap {
            return Err(CenterpointError::BalanceCapExceeded(cap));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| pi[b].cmp(&pi[a]));
        let mut k = 0;
        let mut gamma = &pi[order[0]] - &pi[order[1]];
        for j in 1..d - 1 {
            let g = &pi[order[j]] - &pi[order[j + 1]];
            if g > gamma {
                gamma = g;
                k = j;
            }
        }
        let mut u = vec![0i8; d];
        let mut light_mass = rat::zero();
        for &i in &order[k + 1..] {
            u[i] = 1;
            light_mass += &pi[i];
        }
        let target = light_mass + &gamma / &two;
        let out = pull(oracle, &PullRequest { start: c.clone(), direction: u.clone(), target, slack: pull_slack.clone() })?;
        if out.point.iter().zip(c.iter()).any(|(new, old)| new < old) {
            return Err(CenterpointError::InvariantViolated("a coordinate decreased".into()));
        }
        let new_pi = negative_masses(oracle, &out.point);
        let new_sum: Rat = new_pi.iter().fold(rat::zero(), |a, p| a + p);
        if new_sum != total {
            return Err(CenterpointError::InvariantViolated(format!(
                "negative masses sum to {new_sum}, expected {total}"
            )));
        }
        let new_pot = potential(&new_pi, &mean);
        let required = &gamma * &gamma / &two - &drop_slack;
        if &pot - &new_pot < required {
            return Err(CenterpointError::InvariantViolated(format!(
                "potential drop {} below guaranteed {}",
                &pot - &new_pot,
                required
            )));
        }
        steps.push(BalanceStep {
            gamma,
            k: k + 1,
            direction: u,
            alpha: out.alpha,
            potential_before: pot.clone(),
            potential_after: new_pot.clone(),
        });
        c = out.point;
        pi = new_pi;
        pot = new_pot;
    }
    Ok(BalanceState { c, pi, potential: pot, total, steps, cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SearchSpace;
    use crate::rat::frac;
    use crate::volume::VolumeEngine;

    #[test]
    fn one_dimension_needs_no_steps() {
        let x = SearchSpace::with_cuts(
            1,
            vec![Pyramid::new(0, Sign::Neg, RatVec::from_fracs(&[(1, 4)])).unwrap()],
        )
        .unwrap();
        let e = VolumeEngine::from_search_space(&x, true);
        let s = balance_negative_pyramids(&e, &frac(1, 100)).unwrap();
        assert_eq!(s.c, RatVec::from_ints(&[1]));
        assert_eq!(s.pi, vec![frac(3, 4)]);
        assert!(s.steps.is_empty());
    }

    #[test]
    fn cube_balances_on_diagonal() {
        let e = VolumeEngine::unit_cube(2, true);
        let eps = frac(1, 100);
        let s = balance_negative_pyramids(&e, &eps).unwrap();
        for p in &s.pi {
            assert!(*p >= frac(1, 2) - &eps && *p <= frac(1, 2) + &eps);
        }
    }

    #[test]
    fn unbalanced_square_takes_one_step() {
        let cut = Pyramid::new(0, Sign::Neg, RatVec::from_fracs(&[(1, 2), (1, 2)])).unwrap();
        let x = SearchSpace::with_cuts(2, vec![cut]).unwrap();
        let e = VolumeEngine::from_search_space(&x, true);
        let eps = frac(1, 20);
        let s = balance_negative_pyramids(&e, &eps).unwrap();
        assert_eq!(s.steps.len(), 1);
        assert!(s.potential <= &eps * &eps);
        assert!(s.c.iter().all(|ci| *ci >= 1u32));
    }

    #[test]
    fn cap_formula() {
        // 2 * 8 * ln(2 / 0.01) = 16 * 5.298... = 84.77
        assert_eq!(balance_iteration_cap(2, &frac(1, 10)), 85);
        assert!((rat::ln(&frac(1, 1000)) - (0.001f64).ln()).abs() < 1e-12);
    }
}
