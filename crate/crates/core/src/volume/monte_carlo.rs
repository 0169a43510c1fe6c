//! Floating-point sampling estimate of volumes, used only as an independent
//! cross-check of the exact routes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{HalfspaceDir, Pyramid, SearchSpace, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// True when `exact` is within `k` standard errors. A zero standard error
    /// (all samples agree) is widened to one sample's worth of resolution.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        let floor = 1.0 / self.samples as f64;
        (self.estimate - exact).abs() <= k * self.stderr.max(floor)
    }
}

#[derive(Debug, Clone)]
struct FloatPyramid {
    axis: usize,
    sign: f64,
    apex: Vec<f64>,
}

impl FloatPyramid {
    fn from(p: &Pyramid) -> Self {
        FloatPyramid {
            axis: p.axis,
            sign: if p.sign == Sign::Pos { 1.0 } else { -1.0 },
            apex: p.apex.to_f64(),
        }
    }

    fn contains(&self, y: &[f64]) -> bool {
        let lhs = self.sign * (y[self.axis] - self.apex[self.axis]);
        let norm = y.iter().zip(&self.apex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lhs >= norm
    }
}

/// Region whose volume (inside `X`) is estimated.
#[derive(Debug, Clone)]
pub enum McTarget {
    Space,
    Pyramid(Pyramid),
    Halfspace(HalfspaceDir, crate::geometry::RatVec),
}

fn estimate<F: FnMut(&[f64]) -> bool>(d: usize, samples: u64, seed: u64, mut hit: F) -> McEstimate {
    assert!(samples >= 1, "at least one sample required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; d];
    let mut hits = 0u64;
    for _ in 0..samples {
        for c in y.iter_mut() {
            *c = rng.gen::<f64>();
        }
        if hit(&y) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let stderr = (p * (1.0 - p) / samples as f64).sqrt();
    McEstimate { estimate: p, stderr, samples }
}

pub fn monte_carlo_volume(x: &SearchSpace, target: &McTarget, samples: u64, seed: u64) -> McEstimate {
    let cuts: Vec<FloatPyramid> = x.cuts().iter().map(FloatPyramid::from).collect();
    let in_x = |y: &[f64]| cuts.iter().all(|p| !p.contains(y));
    match target {
        McTarget::Space => estimate(x.dim(), samples, seed, in_x),
        McTarget::Pyramid(p) => {
            let fp = FloatPyramid::from(p);
            estimate(x.dim(), samples, seed, |y| fp.contains(y) && in_x(y))
        }
        McTarget::Halfspace(v, c) => {
            // Definitional test: at least as close to c as to c - δv, checked at a few δ.
            let c = c.to_f64();
            let v: Vec<f64> = v.signs().iter().map(|&s| s as f64).collect();
            estimate(x.dim(), samples, seed, |y| {
                in_x(y) && halfspace_contains_f64(&v, &c, y)
            })
        }
    }
}

pub(crate) fn halfspace_contains_f64(v: &[f64], c: &[f64], y: &[f64]) -> bool {
    let dist = |shift: f64| {
        y.iter().zip(c).zip(v).map(|((yi, ci), vi)| (yi - (ci - shift * vi)).abs()).fold(0.0, f64::max)
    };
    let base = dist(0.0);
    [1e-9, 1e-3, 1.0, 4.0].iter().all(|&delta| base <= dist(delta))
}

pub fn monte_carlo_pyramid(x: &SearchSpace, p: Option<&Pyramid>, samples: u64, seed: u64) -> McEstimate {
    match p {
        Some(p) => monte_carlo_volume(x, &McTarget::Pyramid(p.clone()), samples, seed),
        None => monte_carlo_volume(x, &McTarget::Space, samples, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RatVec;

    #[test]
    fn corner_pyramid_is_half() {
        let x = SearchSpace::new(2).unwrap();
        let p = Pyramid::new(0, Sign::Neg, RatVec::from_ints(&[1, 1])).unwrap();
        let e = monte_carlo_pyramid(&x, Some(&p), 100_000, 7);
        assert!(e.agrees_with(0.5, 3.0), "{e:?}");
    }

    #[test]
    fn deterministic_for_seed() {
        let x = SearchSpace::new(3).unwrap();
        let a = monte_carlo_pyramid(&x, None, 1000, 42);
        let b = monte_carlo_pyramid(&x, None, 1000, 42);
        assert_eq!(a, b);
        assert_eq!(a.estimate, 1.0);
    }

    #[test]
    fn zero_volume_query() {
        let cut = Pyramid::new(0, Sign::Neg, RatVec::from_fracs(&[(1, 2), (1, 2)])).unwrap();
        let x = SearchSpace::with_cuts(2, vec![cut.clone()]).unwrap();
        let e = monte_carlo_pyramid(&x, Some(&cut), 10_000, 1);
        assert_eq!(e.estimate, 0.0);
    }
}
