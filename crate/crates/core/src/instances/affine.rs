use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InstanceError;
use crate::geometry::RatVec;
use crate::rat::{self, Rat};
use crate::solver::{EvalError, Map};

/// `f(x) = clamp_{[0,1]^d}(A x + b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    a: Vec<Vec<Rat>>,
    b: RatVec,
}

impl AffineMap {
    pub fn new(a: Vec<Vec<Rat>>, b: RatVec) -> Result<Self, InstanceError> {
        let d = b.dim();
        if d == 0 {
            return Err(InstanceError::Invalid("affine map needs at least one coordinate".into()));
        }
        if a.len() != d || a.iter().any(|row| row.len() != d) {
            return Err(InstanceError::DimensionMismatch(format!(
                "matrix must be {d}x{d} to match the offset"
            )));
        }
        Ok(AffineMap { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.a
    }

    pub fn offset(&self) -> &RatVec {
        &self.b
    }

    /// Maximum absolute row sum, the ℓ∞ operator norm of `A`.
    pub fn row_sum_norm(&self) -> Rat {
        self.a
            .iter()
            .map(|row| row.iter().fold(rat::zero(), |acc, v| acc + rat::abs(v)))
            .max()
            .unwrap_or_else(rat::zero)
    }

    /// `A x + b` before clamping.
    pub fn affine_part(&self, x: &RatVec) -> RatVec {
        RatVec::new(
            self.a
                .iter()
                .zip(self.b.iter())
                .map(|(row, bi)| row.iter().zip(x.iter()).fold(bi.clone(), |acc, (aij, xj)| acc + aij * xj))
                .collect(),
        )
    }

    pub fn apply(&self, x: &RatVec) -> RatVec {
        let zero = rat::zero();
        let one = rat::one();
        RatVec::new(
            self.affine_part(x)
                .iter()
                .map(|v| rat::min_of(rat::max_of(v, &zero), &one).clone())
                .collect(),
        )
    }

    /// Solution of `(I - A) x = b`, if unique.
    pub fn pre_clamp_fixed_point(&self) -> Option<RatVec> {
        let d = self.dim();
        let mut m: Vec<Vec<Rat>> = (0..d)
            .map(|i| {
                let mut row: Vec<Rat> = (0..d)
                    .map(|j| if i == j { rat::one() - &self.a[i][j] } else { -self.a[i][j].clone() })
                    .collect();
                row.push(self.b[i].clone());
                row
            })
            .collect();
        for col in 0..d {
            let pivot = (col..d).find(|&r| !rat::is_zero(&m[r][col]))?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v /= &p;
            }
            for r in 0..d {
                if r != col && !rat::is_zero(&m[r][col]) {
                    let factor = m[r][col].clone();
                    for c in col..=d {
                        let delta = &factor * &m[col][c];
                        m[r][c] -= delta;
                    }
                }
            }
        }
        Some(RatVec::new(m.into_iter().map(|row| row[d].clone()).collect()))
    }

    /// Block-diagonal map acting on the concatenated coordinates.
    pub fn product(blocks: &[AffineMap]) -> Result<AffineMap, InstanceError> {
        let d: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut a = vec![vec![rat::zero(); d]; d];
        let mut b = Vec::with_capacity(d);
        let mut at = 0;
        for block in blocks {
            for i in 0..block.dim() {
                for j in 0..block.dim() {
                    a[at + i][at + j] = block.a[i][j].clone();
                }
                b.push(block.b[i].clone());
            }
            at += block.dim();
        }
        AffineMap::new(a, RatVec::new(b))
    }
}

impl Map for AffineMap {
    fn dim(&self) -> usize {
        AffineMap::dim(self)
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        if x.dim() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(self.apply(x))
    }
}

/// An affine map with a known interior fixed point.
#[derive(Debug, Clone)]
pub struct AffineInstance {
    pub map: AffineMap,
    pub lambda: Rat,
    pub fixed_point: RatVec,
}

/// Deterministic from `seed`: every row of `A` has absolute sum exactly `λ`
/// with random signs, `x*` is drawn from the interior grid `{8..56}/64`, and
/// `b = x* - A x*`.
pub fn random_affine(d: usize, lambda: &Rat, seed: u64) -> Result<AffineInstance, InstanceError> {
    if d == 0 {
        return Err(InstanceError::Invalid("dimension must be positive".into()));
    }
    if rat::is_negative(lambda) || *lambda >= 1u32 {
        return Err(InstanceError::Invalid(format!("random affine needs 0 <= lambda < 1, got {lambda}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(d);
    for _ in 0..d {
        let weights: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=16)).collect();
        let total: u32 = weights.iter().sum();
        let row = weights
            .iter()
            .map(|&w| {
                let v = lambda * Rat::from(w) / Rat::from(total);
                if rng.gen_bool(0.5) {
                    -v
                } else {
                    v
                }
            })
            .collect();
        a.push(row);
    }
    let x_star = RatVec::new((0..d).map(|_| rat::frac(rng.gen_range(8..=56), 64)).collect());
    let zero_offset = AffineMap::new(a.clone(), RatVec::zeros(d))?;
    let b = x_star.sub(&zero_offset.affine_part(&x_star));
    let map = AffineMap::new(a, b)?;
    Ok(AffineInstance { map, lambda: lambda.clone(), fixed_point: x_star })
}

/// `f(x) = 1/2 - λ (x - 1/2)`: the residual shrinks by exactly `λ` per Banach step.
pub fn reflection_affine(d: usize, lambda: &Rat) -> Result<AffineInstance, InstanceError> {
    if d == 0 {
        return Err(InstanceError::Invalid("dimension must be positive".into()));
    }
    let a = (0..d)
        .map(|i| (0..d).map(|j| if i == j { -lambda.clone() } else { rat::zero() }).collect())
        .collect();
    let b = RatVec::filled(d, (rat::one() + lambda) / Rat::from(2u32));
    let map = AffineMap::new(a, b)?;
    Ok(AffineInstance { map, lambda: lambda.clone(), fixed_point: RatVec::filled(d, rat::frac(1, 2)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linf_distance;
    use crate::rat::frac;

    #[test]
    fn random_is_deterministic_with_exact_fixed_point() {
        let a = random_affine(3, &frac(9, 10), 7).unwrap();
        let b = random_affine(3, &frac(9, 10), 7).unwrap();
        assert_eq!(a.map, b.map);
        assert_ne!(a.map, random_affine(3, &frac(9, 10), 8).unwrap().map);
        assert_eq!(a.map.row_sum_norm(), frac(9, 10));
        assert_eq!(a.map.apply(&a.fixed_point), a.fixed_point);
        assert_eq!(a.map.pre_clamp_fixed_point().unwrap(), a.fixed_point);
    }

    #[test]
    fn contraction_spot_check() {
        let inst = random_affine(2, &frac(99, 100), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = RatVec::new((0..2).map(|_| frac(rng.gen_range(0..=1000), 1000)).collect());
            let y = RatVec::new((0..2).map(|_| frac(rng.gen_range(0..=1000), 1000)).collect());
            let lhs = linf_distance(&inst.map.apply(&x), &inst.map.apply(&y));
            assert!(lhs <= &inst.lambda * linf_distance(&x, &y));
        }
    }

    #[test]
    fn reflection_and_product() {
        let r = reflection_affine(2, &frac(1, 2)).unwrap();
        assert_eq!(r.map.apply(&RatVec::zeros(2)), RatVec::filled(2, frac(3, 4)));
        let p = AffineMap::product(&[r.map.clone(), random_affine(1, &frac(1, 3), 1).unwrap().map]).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.matrix()[0][2], rat::zero());
        assert_eq!(p.matrix()[0][0], frac(-1, 2));
    }

    #[test]
    fn singular_system_has_no_unique_fixed_point() {
        let id = AffineMap::new(vec![vec![rat::one()]], RatVec::zeros(1)).unwrap();
        assert!(id.pre_clamp_fixed_point().is_none());
        assert!(AffineMap::new(vec![vec![rat::one(), rat::zero()]], RatVec::zeros(1)).is_err());
    }
}
