//! Brute force in the plane: every point of the 1/64 grid is scored by its
//! exact worst halfspace, and the search result is compared with the best.

use linf_fixpoint::centerpoint::{find_centerpoint, verify_centerpoint, CenterpointConfig};
use linf_fixpoint::geometry::{Pyramid, RatVec, SearchSpace, Sign};
use linf_fixpoint::rat::{self, frac, Rat};
use linf_fixpoint::volume::VolumeEngine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: i64 = 64;

fn random_space(seed: u64, cuts: usize) -> SearchSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = SearchSpace::new(2).unwrap();
    let mut engine = VolumeEngine::from_search_space(&x, true);
    while x.cuts().len() < cuts {
        let apex = RatVec::new(vec![frac(rng.gen_range(0..=16), 16), frac(rng.gen_range(0..=16), 16)]);
        let sign = if rng.gen() { Sign::Pos } else { Sign::Neg };
        let p = Pyramid::new(rng.gen_range(0..2), sign, apex).unwrap();
        let next = engine.without_pyramid(&p);
        // Keep at least a quarter of the cube so the ratios stay meaningful.
        if next.total_volume() >= frac(1, 4) {
            x.push_cut(p).unwrap();
            engine = next;
        }
    }
    x
}

fn best_grid_ratio(engine: &VolumeEngine) -> (Rat, RatVec) {
    let mut best = (rat::zero(), RatVec::zeros(2));
    for i in 0..=STEPS {
        for j in 0..=STEPS {
            let c = RatVec::new(vec![frac(i, STEPS), frac(j, STEPS)]);
            let v = verify_centerpoint(engine, &c, &rat::zero()).unwrap();
            if v.ratio > best.0 {
                best = (v.ratio, c);
            }
        }
    }
    best
}

#[test]
fn grid_optimum_and_search_agree() {
    let floor = frac(1, 8);
    let config = CenterpointConfig::default();
    for seed in 0..4u64 {
        let x = random_space(seed, seed as usize + 1);
        let engine = VolumeEngine::from_search_space(&x, true);
        let (best, at) = best_grid_ratio(&engine);
        assert!(best >= floor, "seed {seed}: best grid ratio {best} at {at:?}");

        let cert = find_centerpoint(&engine, &config).unwrap();
        let found = verify_centerpoint(&engine, &cert.point, &rat::zero()).unwrap().ratio;
        assert!(found >= cert.quality, "seed {seed}: search returned ratio {found}");
        assert!(found >= floor);
    }
}
