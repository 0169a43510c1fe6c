//! Exact convex cells with a double (inequality + vertex) description.
//!
//! A [`ConvexCell`] is always full-dimensional and bounded. Clipping by a
//! halfspace walks the vertex set: vertices on the kept side survive and every
//! edge that crosses the cutting hyperplane contributes its crossing point. Two
//! vertices span an edge exactly when the constraints tight at both have rank
//! `d - 1`. Volume comes from a pulling triangulation over the face lattice.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VolumeError {
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("inconsistent dimensions: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// `a · y <= b` with small integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LinIneq {
    pub a: Vec<i32>,
    #[serde(with = "crate::rat::serde_rat")]
    pub b: Rat,
}

impl LinIneq {
    pub fn new(a: Vec<i32>, b: Rat) -> Self {
        LinIneq { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `a · y - b`; non-positive on the feasible side.
    pub fn slack(&self, y: &[Rat]) -> Rat {
        let mut acc = -self.b.clone();
        for (&ai, yi) in self.a.iter().zip(y) {
            match ai {
                0 => {}
                1 => acc += yi,
                -1 => acc -= yi,
                k => acc += Rat::from(k) * yi,
            }
        }
        acc
    }

    pub fn slack_f64(&self, y: &[f64]) -> f64 {
        self.a.iter().zip(y).map(|(&a, &v)| a as f64 * v).sum::<f64>() - rat::to_f64(&self.b)
    }

    /// The opposite closed halfspace `a · y >= b`.
    pub fn complement(&self) -> LinIneq {
        LinIneq { a: self.a.iter().map(|x| -x).collect(), b: -self.b.clone() }
    }

    pub fn cube_bounds(d: usize) -> Vec<LinIneq> {
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut up = vec![0; d];
            up[i] = 1;
            out.push(LinIneq::new(up, rat::one()));
            let mut low = vec![0; d];
            low[i] = -1;
            out.push(LinIneq::new(low, rat::zero()));
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Vertex {
    point: Vec<Rat>,
    /// Sorted indices of constraints tight at this vertex.
    tight: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ConvexCell {
    dim: usize,
    ineqs: Vec<LinIneq>,
    verts: Vec<Vertex>,
}

pub enum Clip {
    /// The cell already lies in the halfspace.
    Inside,
    /// The intersection has no interior.
    Empty,
    Cut(ConvexCell),
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Rank of a set of small integer rows (fraction-free elimination).
fn integer_rank(rows: &[&[i32]], d: usize) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for r in m.iter_mut().skip(rank + 1) {
            if r[col] != 0 {
                let f = r[col];
                for k in col..d {
                    r[k] = r[k] * pivot[col] - pivot[k] * f;
                }
                let g = r.iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    r.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Determinant of a square rational matrix by Gaussian elimination.
pub(crate) fn determinant(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    match n {
        0 => return rat::one(),
        1 => return m[0][0].clone(),
        2 => return &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {}
    }
    let mut det = rat::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !rat::is_zero(&m[r][col])) else {
            return rat::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if rat::is_zero(&m[r][col]) {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for k in col..n {
                let delta = &f * &m[col][k];
                m[r][k] -= delta;
            }
        }
    }
    det
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl ConvexCell {
    pub fn unit_cube(d: usize) -> ConvexCell {
        assert!(d >= 1);
        let ineqs = LinIneq::cube_bounds(d);
        let mut verts = Vec::with_capacity(1 << d);
        for mask in 0u64..(1u64 << d) {
            let mut point = Vec::with_capacity(d);
            let mut tight = Vec::with_capacity(d);
            for i in 0..d {
                if mask >> i & 1 == 1 {
                    point.push(rat::one());
                    tight.push(2 * i);
                } else {
                    point.push(rat::zero());
                    tight.push(2 * i + 1);
                }
            }
            verts.push(Vertex { point, tight });
        }
        ConvexCell { dim: d, ineqs, verts }
    }

    /// Axis-aligned box `[-m, m]^d`, used to bound arbitrary H-descriptions.
    fn big_box(d: usize, m: &Rat) -> ConvexCell {
        let mut cell = ConvexCell::unit_cube(d);
        let lo = -m.clone();
        for ineq in &mut cell.ineqs {
            ineq.b = m.clone();
        }
        for v in &mut cell.verts {
            for c in &mut v.point {
                *c = if rat::is_zero(c) { lo.clone() } else { m.clone() };
            }
        }
        cell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[LinIneq] {
        &self.ineqs
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[Rat]> {
        self.verts.iter().map(|v| v.point.as_slice())
    }

    /// Exact barycenter of the vertex set; an interior point of the cell.
    pub fn barycenter(&self) -> Vec<Rat> {
        let n = Rat::from(self.verts.len() as u64);
        let mut acc = vec![rat::zero(); self.dim];
        for v in &self.verts {
            for (a, c) in acc.iter_mut().zip(&v.point) {
                *a += c;
            }
        }
        acc.into_iter().map(|a| a / &n).collect()
    }

    pub fn contains(&self, y: &[Rat]) -> bool {
        self.ineqs.iter().all(|h| !rat::is_positive(&h.slack(y)))
    }

    fn rank_of(&self, idx: &[usize]) -> usize {
        let rows: Vec<&[i32]> = idx.iter().map(|&i| self.ineqs[i].a.as_slice()).collect();
        integer_rank(&rows, self.dim)
    }

    pub fn clip(&self, h: &LinIneq) -> Clip {
        debug_assert_eq!(h.dim(), self.dim);
        let slacks: Vec<Rat> = self.verts.iter().map(|v| h.slack(&v.point)).collect();
        let any_out = slacks.iter().any(rat::is_positive);
        let any_in = slacks.iter().any(rat::is_negative);
        if !any_out {
            return Clip::Inside;
        }
        if !any_in {
            return Clip::Empty;
        }
        let k = self.ineqs.len();
        let mut verts = Vec::new();
        for (v, s) in self.verts.iter().zip(&slacks) {
            if rat::is_positive(s) {
                continue;
            }
            let mut tight = v.tight.clone();
            if rat::is_zero(s) {
                tight.push(k);
            }
            verts.push(Vertex { point: v.point.clone(), tight });
        }
        let need = self.dim - 1;
        for (iu, (u, su)) in self.verts.iter().zip(&slacks).enumerate() {
            if !rat::is_negative(su) {
                continue;
            }
            for (iw, (w, sw)) in self.verts.iter().zip(&slacks).enumerate() {
                if iw == iu || !rat::is_positive(sw) {
                    continue;
                }
                let common = intersect_sorted(&u.tight, &w.tight);
                if common.len() < need || self.rank_of(&common) != need {
                    continue;
                }
                let t = su / (su - sw);
                let point: Vec<Rat> =
                    u.point.iter().zip(&w.point).map(|(a, b)| a + &t * (b - a)).collect();
                let mut tight = common;
                tight.push(k);
                verts.push(Vertex { point, tight });
            }
        }
        let mut ineqs = self.ineqs.clone();
        ineqs.push(h.clone());
        let mut cell = ConvexCell { dim: self.dim, ineqs, verts };
        cell.prune();
        Clip::Cut(cell)
    }

    /// Intersect with several halfspaces; `None` when the result has no interior.
    pub fn clip_all(&self, hs: &[LinIneq]) -> Option<ConvexCell> {
        let mut cur: Option<ConvexCell> = None;
        for h in hs {
            let base = cur.as_ref().unwrap_or(self);
            match base.clip(h) {
                Clip::Inside => {}
                Clip::Empty => return None,
                Clip::Cut(c) => cur = Some(c),
            }
        }
        Some(cur.unwrap_or_else(|| self.clone()))
    }

    /// Drops constraints tight at fewer than `d` vertices (they cannot be facets).
    fn prune(&mut self) {
        let mut count = vec![0usize; self.ineqs.len()];
        for v in &self.verts {
            for &t in &v.tight {
                count[t] += 1;
            }
        }
        let mut remap = vec![usize::MAX; self.ineqs.len()];
        let mut kept = Vec::new();
        for (i, h) in self.ineqs.iter().enumerate() {
            if count[i] >= self.dim {
                remap[i] = kept.len();
                kept.push(h.clone());
            }
        }
        if kept.len() == self.ineqs.len() {
            return;
        }
        for v in &mut self.verts {
            v.tight = v.tight.iter().filter_map(|&t| (remap[t] != usize::MAX).then_some(remap[t])).collect();
        }
        self.ineqs = kept;
    }

    fn common_tight(&self, face: &[usize]) -> Vec<usize> {
        let mut common = self.verts[face[0]].tight.clone();
        for &v in &face[1..] {
            common = intersect_sorted(&common, &self.verts[v].tight);
        }
        common
    }

    /// Facets of a face (given by its vertex indices and dimension), as vertex sets.
    fn facets_of(&self, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
        let common = self.common_tight(face);
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        let mut candidates: Vec<usize> =
            face.iter().flat_map(|&v| self.verts[v].tight.iter().copied()).collect();
        candidates.sort_unstable();
        candidates.dedup();
        for c in candidates {
            if common.binary_search(&c).is_ok() {
                continue;
            }
            let sub: Vec<usize> =
                face.iter().copied().filter(|&v| self.verts[v].tight.binary_search(&c).is_ok()).collect();
            if sub.len() < dim || seen.contains(&sub) {
                continue;
            }
            let sub_common = self.common_tight(&sub);
            if self.dim - self.rank_of(&sub_common) != dim - 1 {
                continue;
            }
            seen.insert(sub.clone());
            out.push(sub);
        }
        out
    }

    fn triangulate(&self, face: &[usize], dim: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
        if dim == 0 {
            prefix.push(face[0]);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        let anchor = face[0];
        prefix.push(anchor);
        for facet in self.facets_of(face, dim) {
            if facet.contains(&anchor) {
                continue;
            }
            self.triangulate(&facet, dim - 1, out, prefix);
        }
        prefix.pop();
    }

    pub fn volume(&self) -> Rat {
        let d = self.dim;
        if self.verts.len() <= d {
            return rat::zero();
        }
        if d == 1 {
            let mut lo = &self.verts[0].point[0];
            let mut hi = lo;
            for v in &self.verts {
                lo = rat::min_of(lo, &v.point[0]);
                hi = rat::max_of(hi, &v.point[0]);
            }
            return hi - lo;
        }
        let all: Vec<usize> = (0..self.verts.len()).collect();
        let mut simplices = Vec::new();
        self.triangulate(&all, d, &mut simplices, &mut Vec::new());
        let mut total = rat::zero();
        for s in &simplices {
            let p0 = &self.verts[s[0]].point;
            let m: Vec<Vec<Rat>> = s[1..]
                .iter()
                .map(|&j| self.verts[j].point.iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            total += rat::abs(&determinant(m));
        }
        total / Rat::from(factorial(d))
    }
}

/// An H-description `{y : a_k · y <= b_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HPolytope {
    pub dim: usize,
    pub ineqs: Vec<LinIneq>,
}

impl HPolytope {
    pub fn new(dim: usize, ineqs: Vec<LinIneq>) -> Result<HPolytope, VolumeError> {
        if dim == 0 {
            return Err(VolumeError::ZeroDimension);
        }
        if let Some(h) = ineqs.iter().find(|h| h.dim() != dim) {
            return Err(VolumeError::DimensionMismatch { expected: dim, got: h.dim() });
        }
        Ok(HPolytope { dim, ineqs })
    }

    /// The cell, or `None` when it has no interior. Boundedness is checked
    /// against a box larger than any vertex a bounded system can have.
    pub fn to_cell(&self) -> Result<Option<ConvexCell>, VolumeError> {
        let d = self.dim;
        let max_a = self.ineqs.iter().flat_map(|h| h.a.iter()).map(|x| x.unsigned_abs()).max().unwrap_or(1).max(1);
        let max_b = self.ineqs.iter().map(|h| rat::abs(&h.b)).max().unwrap_or_else(rat::zero);
        // Cramer's rule: |vertex coordinate| <= d! * max_a^(d-1) * max_b.
        let bound = Rat::from(factorial(d)) * Rat::from(u64::from(max_a).pow(d as u32 - 1)) * (max_b + rat::one())
            + rat::one();
        let bx = ConvexCell::big_box(d, &bound);
        let Some(cell) = bx.clip_all(&self.ineqs) else {
            return Ok(None);
        };
        let lo = -bound.clone();
        for v in cell.vertices() {
            if v.iter().any(|c| *c == bound || *c == lo) {
                return Err(VolumeError::Unbounded);
            }
        }
        Ok(Some(cell))
    }
}

pub fn polytope_volume(p: &HPolytope) -> Result<Rat, VolumeError> {
    Ok(p.to_cell()?.map(|c| c.volume()).unwrap_or_else(rat::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn ineq(a: &[i32], b: Rat) -> LinIneq {
        LinIneq::new(a.to_vec(), b)
    }

    #[test]
    fn cube_volumes() {
        for d in 1..=4 {
            assert_eq!(ConvexCell::unit_cube(d).volume(), rat::one());
        }
    }

    #[test]
    fn standard_simplex() {
        let p = HPolytope::new(
            2,
            vec![ineq(&[-1, 0], int(0)), ineq(&[0, -1], int(0)), ineq(&[1, 1], int(1))],
        )
        .unwrap();
        assert_eq!(polytope_volume(&p).unwrap(), frac(1, 2));
        let p3 = HPolytope::new(
            3,
            vec![
                ineq(&[-1, 0, 0], int(0)),
                ineq(&[0, -1, 0], int(0)),
                ineq(&[0, 0, -1], int(0)),
                ineq(&[1, 1, 1], int(1)),
            ],
        )
        .unwrap();
        assert_eq!(polytope_volume(&p3).unwrap(), frac(1, 6));
    }

    #[test]
    fn cube_cap_of_positive_pyramid_at_origin() {
        let mut hs = LinIneq::cube_bounds(3);
        // y3 >= ±y1, y3 >= ±y2
        hs.push(ineq(&[1, 0, -1], int(0)));
        hs.push(ineq(&[-1, 0, -1], int(0)));
        hs.push(ineq(&[0, 1, -1], int(0)));
        hs.push(ineq(&[0, -1, -1], int(0)));
        let p = HPolytope::new(3, hs).unwrap();
        assert_eq!(polytope_volume(&p).unwrap(), frac(1, 3));
    }

    #[test]
    fn unbounded_is_detected() {
        let p = HPolytope::new(2, vec![ineq(&[-1, 0], int(0)), ineq(&[0, -1], int(0))]).unwrap();
        assert_eq!(polytope_volume(&p), Err(VolumeError::Unbounded));
    }

    #[test]
    fn degenerate_and_empty_have_zero_volume() {
        let mut hs = LinIneq::cube_bounds(2);
        hs.push(ineq(&[1, 0], int(0)));
        assert_eq!(polytope_volume(&HPolytope::new(2, hs).unwrap()).unwrap(), rat::zero());
        let mut hs = LinIneq::cube_bounds(2);
        hs.push(ineq(&[1, 1], int(-1)));
        assert_eq!(polytope_volume(&HPolytope::new(2, hs).unwrap()).unwrap(), rat::zero());
    }

    #[test]
    fn clipping_keeps_complementary_volumes() {
        let cube = ConvexCell::unit_cube(3);
        let h = ineq(&[1, -1, 1], frac(1, 3));
        let a = cube.clip_all(&[h.clone()]).unwrap().volume();
        let b = cube.clip_all(&[h.complement()]).unwrap().volume();
        assert_eq!(a + b, rat::one());
    }

    #[test]
    fn integer_rank_basics() {
        let r1: &[i32] = &[1, 1, 0];
        let r2: &[i32] = &[1, -1, 0];
        let r3: &[i32] = &[2, 0, 0];
        assert_eq!(integer_rank(&[r1, r2, r3], 3), 2);
        assert_eq!(integer_rank(&[r1], 3), 1);
        assert_eq!(integer_rank(&[], 3), 0);
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = vec![
            vec![int(2), int(0), int(1)],
            vec![int(1), int(3), int(2)],
            vec![int(1), int(1), int(1)],
        ];
        assert_eq!(determinant(m), int(2 * (3 - 2) - 0 + (1 - 3)));
    }
}
