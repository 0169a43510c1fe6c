//! Hyperplane arrangements clipped to the unit cube, and the exact
//! pyramid-intersection volume computed from them.
//!
//! Every pyramid is cut out by `2(d-1)` hyperplanes of the form
//! `s(y_i - x_i) = ±(y_j - x_j)`. In the arrangement of all such hyperplanes
//! (for the cuts and the query pyramid) each cell lies entirely inside or
//! entirely outside each pyramid, so an interior witness classifies it.

use std::collections::HashSet;

use serde::Serialize;

use super::polytope::{Clip, ConvexCell, HPolytope, LinIneq};
use crate::geometry::{Pyramid, RatVec, SearchSpace, Sign};
use crate::rat::{self, Rat};

/// `a · y = b` with at most two nonzero coefficients in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Hyperplane {
    pub a: Vec<i32>,
    #[serde(with = "crate::rat::serde_rat")]
    pub b: Rat,
}

impl Hyperplane {
    /// Scales so the first nonzero coefficient is positive; equal sets compare equal.
    pub fn normalized(&self) -> Hyperplane {
        match self.a.iter().find(|&&x| x != 0) {
            Some(&x) if x < 0 => Hyperplane { a: self.a.iter().map(|v| -v).collect(), b: -self.b.clone() },
            _ => self.clone(),
        }
    }

    pub fn below(&self) -> LinIneq {
        LinIneq::new(self.a.clone(), self.b.clone())
    }

    pub fn above(&self) -> LinIneq {
        self.below().complement()
    }
}

/// Halfspaces `a · y <= b` whose intersection is the pyramid.
pub fn pyramid_inequalities(p: &Pyramid) -> Vec<LinIneq> {
    let d = p.dim();
    let i = p.axis;
    let s = p.sign.value() as i32;
    let x = &p.apex;
    if d == 1 {
        return vec![LinIneq::new(vec![-s], -Rat::from(s) * &x[0])];
    }
    let mut out = Vec::with_capacity(2 * (d - 1));
    for j in (0..d).filter(|&j| j != i) {
        for t in [1i32, -1] {
            // t(y_j - x_j) <= s(y_i - x_i)
            let mut a = vec![0; d];
            a[j] = t;
            a[i] = -s;
            let b = Rat::from(t) * &x[j] - Rat::from(s) * &x[i];
            out.push(LinIneq::new(a, b));
        }
    }
    out
}

pub fn pyramid_bounding_hyperplanes(p: &Pyramid) -> Vec<Hyperplane> {
    if p.dim() == 1 {
        return Vec::new();
    }
    pyramid_inequalities(p).into_iter().map(|h| Hyperplane { a: h.a, b: h.b }).collect()
}

#[derive(Debug, Clone)]
pub struct ArrangementCell {
    pub cell: ConvexCell,
    pub volume: Rat,
    pub witness: RatVec,
}

impl ArrangementCell {
    pub fn polytope(&self) -> HPolytope {
        HPolytope { dim: self.cell.dim(), ineqs: self.cell.inequalities().to_vec() }
    }
}

#[derive(Debug, Clone)]
pub struct CellDecomposition {
    pub dim: usize,
    pub hyperplanes: Vec<Hyperplane>,
    pub cells: Vec<ArrangementCell>,
}

impl CellDecomposition {
    pub fn total_volume(&self) -> Rat {
        self.cells.iter().fold(rat::zero(), |acc, c| acc + &c.volume)
    }
}

fn finish(dim: usize, hyperplanes: Vec<Hyperplane>, cells: Vec<ConvexCell>) -> CellDecomposition {
    let cells = super::parallel::map_cells(cells, |cell| {
        let volume = cell.volume();
        let witness = RatVec::new(cell.barycenter());
        ArrangementCell { cell, volume, witness }
    });
    CellDecomposition { dim, hyperplanes, cells }
}

fn dedup(hyperplanes: &[Hyperplane]) -> Vec<Hyperplane> {
    let mut seen = HashSet::new();
    hyperplanes.iter().map(Hyperplane::normalized).filter(|h| seen.insert(h.clone())).collect()
}

/// Full-dimensional cells of the arrangement inside `[0,1]^d`.
///
/// Sign vectors are explored depth first; a branch is abandoned as soon as its
/// partial sign assignment has no interior, so only realizable sign vectors
/// reach the leaves.
pub fn build_arrangement(hyperplanes: &[Hyperplane], d: usize) -> CellDecomposition {
    let hs = dedup(hyperplanes);
    let mut cells = vec![ConvexCell::unit_cube(d)];
    for h in &hs {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            match cell.clip(&h.below()) {
                Clip::Inside => next.push(cell),
                Clip::Empty => next.push(cell),
                Clip::Cut(lower) => {
                    next.push(lower);
                    if let Some(upper) = match cell.clip(&h.above()) {
                        Clip::Cut(c) => Some(c),
                        Clip::Inside => Some(cell),
                        Clip::Empty => None,
                    } {
                        next.push(upper);
                    }
                }
            }
        }
        cells = next;
    }
    finish(d, hs, cells)
}

/// Reference construction: tries every one of the `2^n` sign vectors. Only
/// usable for small `n`.
pub fn build_arrangement_bruteforce(hyperplanes: &[Hyperplane], d: usize) -> CellDecomposition {
    let hs = dedup(hyperplanes);
    assert!(hs.len() <= 20, "brute-force arrangement limited to 20 hyperplanes");
    let cube = ConvexCell::unit_cube(d);
    let mut cells = Vec::new();
    for mask in 0u64..(1u64 << hs.len()) {
        let ineqs: Vec<LinIneq> = hs
            .iter()
            .enumerate()
            .map(|(k, h)| if mask >> k & 1 == 0 { h.below() } else { h.above() })
            .collect();
        if let Some(c) = cube.clip_all(&ineqs) {
            cells.push(c);
        }
    }
    finish(d, hs, cells)
}

fn interval_volume_1d(x: &SearchSpace, targets: &[Pyramid]) -> Vec<Rat> {
    // Breakpoints split [0,1] into intervals; each open interval is uniformly
    // inside or outside each ray.
    let mut pts: Vec<Rat> = vec![rat::zero(), rat::one()];
    for p in x.cuts().iter().chain(targets) {
        let a = &p.apex[0];
        if *a > 0u32 && *a < 1u32 {
            pts.push(a.clone());
        }
    }
    pts.sort();
    pts.dedup();
    let two = Rat::from(2u32);
    let mut out = vec![rat::zero(); targets.len()];
    for w in pts.windows(2) {
        let mid = RatVec::new(vec![(&w[0] + &w[1]) / &two]);
        if !x.contains(&mid).unwrap_or(false) {
            continue;
        }
        let len = &w[1] - &w[0];
        for (o, p) in out.iter_mut().zip(targets) {
            if p.contains(&mid).unwrap_or(false) {
                *o += &len;
            }
        }
    }
    out
}

fn in_space(x: &SearchSpace, w: &RatVec) -> bool {
    x.cuts().iter().all(|p| !p.contains(w).unwrap_or(true))
}

/// `vol(X ∩ P)` for several pyramids from one shared arrangement.
pub fn pyramid_intersection_volumes(x: &SearchSpace, targets: &[Pyramid]) -> Vec<Rat> {
    let d = x.dim();
    if d == 1 {
        return interval_volume_1d(x, targets);
    }
    let hs: Vec<Hyperplane> =
        x.cuts().iter().chain(targets).flat_map(pyramid_bounding_hyperplanes).collect();
    let arr = build_arrangement(&hs, d);
    let mut out = vec![rat::zero(); targets.len()];
    for cell in &arr.cells {
        if !in_space(x, &cell.witness) {
            continue;
        }
        for (o, p) in out.iter_mut().zip(targets) {
            if p.contains(&cell.witness).unwrap_or(false) {
                *o += &cell.volume;
            }
        }
    }
    out
}

pub fn pyramid_intersection_volume(x: &SearchSpace, p: &Pyramid) -> Rat {
    pyramid_intersection_volumes(x, std::slice::from_ref(p)).pop().unwrap_or_else(rat::zero)
}

pub fn search_space_volume(x: &SearchSpace) -> Rat {
    let d = x.dim();
    if d == 1 {
        // The single ray P^+_0(0) covers [0,1].
        let all = Pyramid { axis: 0, sign: Sign::Pos, apex: RatVec::zeros(1) };
        return interval_volume_1d(x, &[all]).pop().unwrap_or_else(rat::zero);
    }
    let hs: Vec<Hyperplane> = x.cuts().iter().flat_map(pyramid_bounding_hyperplanes).collect();
    let arr = build_arrangement(&hs, d);
    arr.cells
        .iter()
        .filter(|c| in_space(x, &c.witness))
        .fold(rat::zero(), |acc, c| acc + &c.volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn half2() -> RatVec {
        RatVec::from_fracs(&[(1, 2), (1, 2)])
    }

    #[test]
    fn bounding_hyperplanes_of_negative_pyramid() {
        let p = Pyramid::new(0, Sign::Neg, half2()).unwrap();
        let hs: HashSet<Hyperplane> = pyramid_bounding_hyperplanes(&p).iter().map(|h| h.normalized()).collect();
        let want: HashSet<Hyperplane> = [
            Hyperplane { a: vec![1, 1], b: rat::one() },
            Hyperplane { a: vec![1, -1], b: rat::zero() },
        ]
        .into_iter()
        .collect();
        assert_eq!(hs, want);
        let p3 = Pyramid::new(2, Sign::Pos, RatVec::zeros(3)).unwrap();
        assert_eq!(pyramid_bounding_hyperplanes(&p3).len(), 4);
        let p1 = Pyramid::new(0, Sign::Pos, RatVec::zeros(1)).unwrap();
        assert!(pyramid_bounding_hyperplanes(&p1).is_empty());
    }

    #[test]
    fn arrangement_examples() {
        let empty = build_arrangement(&[], 2);
        assert_eq!(empty.cells.len(), 1);
        assert_eq!(empty.total_volume(), rat::one());
        let one = build_arrangement(&[Hyperplane { a: vec![1, 0], b: frac(1, 2) }], 2);
        assert_eq!(one.cells.len(), 2);
        assert!(one.cells.iter().all(|c| c.volume == frac(1, 2)));
    }

    #[test]
    fn arrangement_matches_bruteforce() {
        let a = Pyramid::new(0, Sign::Neg, RatVec::from_fracs(&[(1, 3), (3, 4)])).unwrap();
        let b = Pyramid::new(1, Sign::Pos, RatVec::from_fracs(&[(5, 8), (1, 5)])).unwrap();
        let hs: Vec<Hyperplane> = [a, b].iter().flat_map(pyramid_bounding_hyperplanes).collect();
        let fast = build_arrangement(&hs, 2);
        let slow = build_arrangement_bruteforce(&hs, 2);
        assert_eq!(fast.cells.len(), slow.cells.len());
        let mut va: Vec<Rat> = fast.cells.iter().map(|c| c.volume.clone()).collect();
        let mut vb: Vec<Rat> = slow.cells.iter().map(|c| c.volume.clone()).collect();
        va.sort();
        vb.sort();
        assert_eq!(va, vb);
        assert_eq!(fast.total_volume(), rat::one());
    }

    #[test]
    fn volume_examples() {
        let cube = SearchSpace::new(2).unwrap();
        let corner = Pyramid::new(0, Sign::Neg, RatVec::from_ints(&[1, 1])).unwrap();
        assert_eq!(pyramid_intersection_volume(&cube, &corner), frac(1, 2));

        let cut = Pyramid::new(0, Sign::Neg, half2()).unwrap();
        let x = SearchSpace::with_cuts(2, vec![cut.clone()]).unwrap();
        let other = Pyramid::new(1, Sign::Neg, half2()).unwrap();
        assert_eq!(pyramid_intersection_volume(&x, &other), frac(1, 4));
        assert_eq!(pyramid_intersection_volume(&x, &cut), rat::zero());
        assert_eq!(search_space_volume(&x), frac(3, 4));
        assert_eq!(search_space_volume(&cube), rat::one());
        let all = SearchSpace::with_cuts(2, Pyramid::all_around(&half2())).unwrap();
        assert_eq!(search_space_volume(&all), rat::zero());
    }

    #[test]
    fn one_dimensional_rays() {
        let apex = RatVec::from_fracs(&[(1, 3)]);
        let x = SearchSpace::with_cuts(1, vec![Pyramid::new(0, Sign::Neg, apex).unwrap()]).unwrap();
        assert_eq!(search_space_volume(&x), frac(2, 3));
        let q = Pyramid::new(0, Sign::Pos, RatVec::from_fracs(&[(1, 2)])).unwrap();
        assert_eq!(pyramid_intersection_volume(&x, &q), frac(1, 2));
        let q = Pyramid::new(0, Sign::Neg, RatVec::from_fracs(&[(1, 2)])).unwrap();
        assert_eq!(pyramid_intersection_volume(&x, &q), frac(1, 6));
    }

    #[test]
    fn cube_cap_3d() {
        let x = SearchSpace::new(3).unwrap();
        let p = Pyramid::new(2, Sign::Pos, RatVec::zeros(3)).unwrap();
        assert_eq!(pyramid_intersection_volume(&x, &p), frac(1, 3));
    }
}
