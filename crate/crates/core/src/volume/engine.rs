//! Incremental volume oracle for search spaces that grow one cut at a time.
//!
//! The search space is kept as a list of convex pieces with pairwise disjoint
//! interiors. Removing a pyramid splits each piece it crosses; removing a whole
//! halfspace `H_v(c)` keeps only the complementary pyramids around `c`, which
//! costs one convex clip per kept pyramid. `vol(X ∩ P)` is the sum over pieces
//! of the clipped piece volumes. Results are memoised per engine, and an engine
//! is immutable once built, so the cache key is just the pyramid.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use super::arrangement::pyramid_inequalities;
use super::parallel;
use super::polytope::{Clip, ConvexCell, LinIneq};
use crate::geometry::{GeometryError, HalfspaceDir, Pyramid, RatVec, SearchSpace, Sign};
use crate::rat::{self, Rat};

#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicU64,
    pub misses: AtomicU64,
}

#[derive(Debug)]
pub struct VolumeEngine {
    dim: usize,
    pieces: Arc<Vec<ConvexCell>>,
    total: OnceLock<Rat>,
    cache: Option<Mutex<HashMap<Pyramid, Rat>>>,
    stats: CacheStats,
    version: u64,
}

impl Clone for VolumeEngine {
    fn clone(&self) -> Self {
        VolumeEngine::from_pieces(self.dim, self.pieces.clone(), self.cache.is_some(), self.version)
    }
}

/// Pieces of `cell \ P`: for bounding inequalities `h_1..h_k` of `P`, the
/// pieces are `cell ∩ h_1 ∩ .. ∩ h_{j-1} ∩ ¬h_j`.
fn subtract_convex(cell: &ConvexCell, hs: &[LinIneq], out: &mut Vec<ConvexCell>) {
    let mut inside = cell.clone();
    for h in hs {
        match inside.clip(&h.complement()) {
            Clip::Inside => {
                out.push(inside);
                return;
            }
            Clip::Empty => {}
            Clip::Cut(outside) => {
                out.push(outside);
                match inside.clip(h) {
                    Clip::Cut(rest) => inside = rest,
                    Clip::Inside => {}
                    Clip::Empty => return,
                }
            }
        }
    }
}

impl VolumeEngine {
    fn from_pieces(dim: usize, pieces: Arc<Vec<ConvexCell>>, caching: bool, version: u64) -> Self {
        VolumeEngine {
            dim,
            pieces,
            total: OnceLock::new(),
            cache: caching.then(|| Mutex::new(HashMap::new())),
            stats: CacheStats::default(),
            version,
        }
    }

    pub fn unit_cube(dim: usize, caching: bool) -> Self {
        assert!(dim >= 1);
        VolumeEngine::from_pieces(dim, Arc::new(vec![ConvexCell::unit_cube(dim)]), caching, 0)
    }

    pub fn from_search_space(x: &SearchSpace, caching: bool) -> Self {
        let mut e = VolumeEngine::unit_cube(x.dim(), caching);
        for p in x.cuts() {
            e = e.without_pyramid(p);
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Number of cuts applied since the unit cube.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn caching(&self) -> bool {
        self.cache.is_some()
    }

    pub fn cache_stats(&self) -> (u64, u64) {
        (self.stats.hits.load(Ordering::Relaxed), self.stats.misses.load(Ordering::Relaxed))
    }

    pub fn without_pyramid(&self, p: &Pyramid) -> VolumeEngine {
        assert_eq!(p.dim(), self.dim);
        let hs = pyramid_inequalities(p);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for piece in self.pieces.iter() {
            subtract_convex(piece, &hs, &mut pieces);
        }
        VolumeEngine::from_pieces(self.dim, Arc::new(pieces), self.caching(), self.version + 1)
    }

    /// `X \ H_v(c)`, which up to boundaries is `X ∩ ⋃_{v_i ≠ 0} P^{-sgn v_i}_i(c)`.
    pub fn without_halfspace(&self, v: &HalfspaceDir, c: &RatVec) -> Result<VolumeEngine, GeometryError> {
        if v.dim() != self.dim || c.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: v.dim().max(c.dim()) });
        }
        let kept: Vec<Pyramid> = v
            .signs()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(i, &s)| Pyramid { axis: i, sign: if s > 0 { Sign::Neg } else { Sign::Pos }, apex: c.clone() })
            .collect();
        let regions: Vec<Vec<LinIneq>> = if self.dim == 2 && kept.len() == 2 {
            // In the plane two complementary pyramids on different axes form the
            // halfplane v · (y - c) <= 0.
            let a: Vec<i32> = v.signs().iter().map(|&s| s as i32).collect();
            let b = v.signs().iter().zip(c.iter()).fold(rat::zero(), |acc, (&s, ci)| match s {
                1 => acc + ci,
                -1 => acc - ci,
                _ => acc,
            });
            vec![vec![LinIneq::new(a, b)]]
        } else {
            kept.iter().map(pyramid_inequalities).collect()
        };
        let mut pieces = Vec::new();
        for piece in self.pieces.iter() {
            for region in &regions {
                if let Some(p) = piece.clip_all(region) {
                    pieces.push(p);
                }
            }
        }
        Ok(VolumeEngine::from_pieces(self.dim, Arc::new(pieces), self.caching(), self.version + 1))
    }

    pub fn total_volume(&self) -> Rat {
        self.total
            .get_or_init(|| sum(parallel::map_refs(&self.pieces, |p| p.volume())))
            .clone()
    }

    pub fn pyramid_volume(&self, p: &Pyramid) -> Rat {
        assert_eq!(p.dim(), self.dim);
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.lock().expect("volume cache poisoned").get(p) {
                self.stats.hits.fetch_add(1, Ordering::Relaxed);
                return v.clone();
            }
        }
        self.stats.misses.fetch_add(1, Ordering::Relaxed);
        let hs = pyramid_inequalities(p);
        let v = sum(parallel::map_refs(&self.pieces, |piece| {
            piece.clip_all(&hs).map(|c| c.volume()).unwrap_or_else(rat::zero)
        }));
        if let Some(cache) = &self.cache {
            cache.lock().expect("volume cache poisoned").insert(p.clone(), v.clone());
        }
        v
    }

    /// Membership of a point in the union of the pieces (closed).
    pub fn contains(&self, y: &RatVec) -> bool {
        self.pieces.iter().any(|p| p.contains(y.coords()))
    }
}

fn sum(values: Vec<Rat>) -> Rat {
    values.into_iter().fold(rat::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::search_space_cut;
    use crate::rat::frac;
    use crate::volume::arrangement::{pyramid_intersection_volume, search_space_volume};

    #[test]
    fn halfspace_cut_matches_pyramid_cuts() {
        let c = RatVec::from_fracs(&[(2, 5), (3, 7)]);
        for signs in HalfspaceDir::enumerate(2) {
            let x = search_space_cut(&SearchSpace::new(2).unwrap(), &signs, &c).unwrap();
            let a = VolumeEngine::unit_cube(2, true).without_halfspace(&signs, &c).unwrap();
            let b = VolumeEngine::from_search_space(&x, true);
            assert_eq!(a.total_volume(), b.total_volume(), "{signs}");
            assert_eq!(a.total_volume(), search_space_volume(&x), "{signs}");
        }
    }

    #[test]
    fn three_dimensional_halfspace_cuts() {
        let c = RatVec::from_fracs(&[(1, 3), (1, 2), (3, 4)]);
        let q = Pyramid::new(1, Sign::Pos, RatVec::from_fracs(&[(1, 2), (1, 4), (1, 2)])).unwrap();
        for signs in HalfspaceDir::enumerate(3).into_iter().step_by(5) {
            let x = search_space_cut(&SearchSpace::new(3).unwrap(), &signs, &c).unwrap();
            let e = VolumeEngine::unit_cube(3, false).without_halfspace(&signs, &c).unwrap();
            assert_eq!(e.total_volume(), search_space_volume(&x), "{signs}");
            assert_eq!(e.pyramid_volume(&q), pyramid_intersection_volume(&x, &q), "{signs}");
        }
    }

    #[test]
    fn cache_records_hits() {
        let e = VolumeEngine::unit_cube(2, true);
        let p = Pyramid::new(0, Sign::Neg, RatVec::from_ints(&[1, 1])).unwrap();
        assert_eq!(e.pyramid_volume(&p), frac(1, 2));
        assert_eq!(e.pyramid_volume(&p), frac(1, 2));
        assert_eq!(e.cache_stats(), (1, 1));
        let n = VolumeEngine::unit_cube(2, false);
        n.pyramid_volume(&p);
        n.pyramid_volume(&p);
        assert_eq!(n.cache_stats(), (0, 2));
    }
}
