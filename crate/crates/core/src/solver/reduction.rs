use std::sync::Arc;

use super::{ContractionInstance, EvalError, Map};
use crate::geometry::RatVec;
use crate::rat::{self, Rat};

/// `x -> factor · inner(x)`, one inner query per evaluation.
pub struct ScaledMap {
    inner: ContractionInstance,
    factor: Rat,
}

impl ScaledMap {
    pub fn new(inner: ContractionInstance, factor: Rat) -> Self {
        ScaledMap { inner, factor }
    }

    pub fn factor(&self) -> &Rat {
        &self.factor
    }
}

impl Map for ScaledMap {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        Ok(self.inner.query(x)?.scale(&self.factor))
    }
}

/// True when the declared factor exceeds `1 - ε`.
pub fn needs_lambda_cap(inst: &ContractionInstance, eps: &Rat) -> bool {
    *inst.lambda() > rat::one() - eps
}

/// `g = (1 - ε/2) f`, contracting with factor `(1 - ε/2) λ`. An `ε/2`-approximate
/// fixed point of `g` is an `ε`-approximate fixed point of `f`, and every query
/// of `g` is exactly one query of `f`.
pub fn lambda_cap_reduction(inst: &ContractionInstance, eps: &Rat) -> ContractionInstance {
    let factor = rat::one() - eps / Rat::from(2u32);
    let lambda = inst.lambda() * &factor;
    let g = Arc::new(ScaledMap::new(inst.clone(), factor));
    let label = format!("{}*(1-eps/2)", inst.label());
    ContractionInstance::new(g, lambda).expect("scaled factor stays in [0, 1]").with_label(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linf_distance;
    use crate::rat::frac;

    #[test]
    fn identity_becomes_three_quarters() {
        let id = ContractionInstance::from_fn(1, rat::one(), |x| x.clone()).unwrap();
        let g = lambda_cap_reduction(&id, &frac(1, 2));
        assert_eq!(g.lambda(), &frac(3, 4));
        assert_eq!(g.query(&RatVec::from_ints(&[1])).unwrap(), RatVec::from_fracs(&[(3, 4)]));
        assert_eq!(g.queries(), 1);
        assert_eq!(id.queries(), 1);
        assert!(needs_lambda_cap(&id, &frac(1, 2)));
        let half = ContractionInstance::from_fn(1, frac(1, 2), |x| x.clone()).unwrap();
        assert!(!needs_lambda_cap(&half, &frac(1, 2)));
    }

    #[test]
    fn approximate_fixed_points_transfer() {
        // f(x) = 0.98 x + 0.01 has x* = 1/2; scan a grid for ε/2-points of g.
        let eps = frac(1, 20);
        let f = ContractionInstance::from_fn(1, frac(49, 50), |x| {
            RatVec::new(vec![frac(49, 50) * &x[0] + frac(1, 100)])
        })
        .unwrap();
        let g = lambda_cap_reduction(&f, &eps);
        let half_eps = &eps / Rat::from(2u32);
        let mut found = 0;
        for k in 0..=200 {
            let x = RatVec::new(vec![frac(k, 200)]);
            let gx = g.query(&x).unwrap();
            if linf_distance(&x, &gx) <= half_eps {
                found += 1;
                let fx = f.map().eval(&x).unwrap();
                assert!(linf_distance(&x, &fx) <= eps);
            }
        }
        assert!(found > 0);
        assert_eq!(g.queries(), 201);
    }
}
