//! Points, pyramids, ℓ∞-halfspaces and pyramid-cut search spaces.
//!
//! A pyramid `P^s_i(x)` is the closed cone of points `y` whose ℓ∞ distance to `x`
//! is attained by coordinate `i` with sign `s`. The `2d` pyramids around a point
//! cover space and meet only on their boundaries.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("halfspace direction has no nonzero entry")]
    ZeroDirection,
    #[error("query point is an exact fixed point")]
    ExactFixedPoint,
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("invalid sign {0}; expected -1 or +1")]
    InvalidSign(i64),
    #[error("invalid direction entry {0}; expected -1, 0 or +1")]
    InvalidDirectionEntry(i64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

fn check_dims(expected: usize, got: usize) -> Result<(), GeometryError> {
    if expected != got {
        return Err(GeometryError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// A point (or displacement) in `Q^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatVec(#[serde(with = "crate::rat::serde_rat_vec")] pub Vec<Rat>);

impl RatVec {
    pub fn new(coords: Vec<Rat>) -> Self {
        RatVec(coords)
    }

    pub fn zeros(d: usize) -> Self {
        RatVec(vec![rat::zero(); d])
    }

    pub fn filled(d: usize, value: Rat) -> Self {
        RatVec(vec![value; d])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        RatVec(values.iter().map(|&v| rat::int(v)).collect())
    }

    pub fn from_fracs(values: &[(i64, i64)]) -> Self {
        RatVec(values.iter().map(|&(n, d)| rat::frac(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.dim(), other.dim());
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.dim(), other.dim());
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, factor: &Rat) -> RatVec {
        RatVec(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self + alpha * u` for a sign vector `u`.
    pub fn add_signed(&self, u: &[i8], alpha: &Rat) -> RatVec {
        debug_assert_eq!(self.dim(), u.len());
        RatVec(
            self.0
                .iter()
                .zip(u)
                .map(|(a, &s)| match s {
                    0 => a.clone(),
                    1 => a + alpha,
                    _ => a - alpha,
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &RatVec) -> RatVec {
        let mut coords = self.0.clone();
        coords.extend(other.0.iter().cloned());
        RatVec(coords)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> RatVec {
        RatVec(self.0[range].to_vec())
    }

    pub fn in_unit_cube(&self) -> bool {
        self.0.iter().all(|c| *c >= 0u32 && *c <= 1u32)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat::to_f64).collect()
    }
}

impl Index<usize> for RatVec {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn linf_norm(x: &RatVec) -> Rat {
    x.iter().map(rat::abs).max().unwrap_or_else(rat::zero)
}

pub fn linf_distance(x: &RatVec, y: &RatVec) -> Rat {
    debug_assert_eq!(x.dim(), y.dim());
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| rat::abs(&(a - b)))
        .max()
        .unwrap_or_else(rat::zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Pos => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Sign, GeometryError> {
        match v {
            -1 => Ok(Sign::Neg),
            1 => Ok(Sign::Pos),
            other => Err(GeometryError::InvalidSign(other)),
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Neg => "-",
            Sign::Pos => "+",
        })
    }
}

/// The closed pyramid `P^sign_axis(apex)`; `axis` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pyramid {
    pub axis: usize,
    pub sign: Sign,
    pub apex: RatVec,
}

impl Pyramid {
    pub fn new(axis: usize, sign: Sign, apex: RatVec) -> Result<Pyramid, GeometryError> {
        if apex.dim() == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if axis >= apex.dim() {
            return Err(GeometryError::AxisOutOfRange { axis, dim: apex.dim() });
        }
        Ok(Pyramid { axis, sign, apex })
    }

    pub fn dim(&self) -> usize {
        self.apex.dim()
    }

    pub fn contains(&self, y: &RatVec) -> Result<bool, GeometryError> {
        pyramid_contains(self, y)
    }

    /// All `2d` pyramids around `apex`, ordered `P^-_0, P^+_0, P^-_1, ...`.
    pub fn all_around(apex: &RatVec) -> Vec<Pyramid> {
        (0..apex.dim())
            .flat_map(|i| {
                [Sign::Neg, Sign::Pos].map(|s| Pyramid { axis: i, sign: s, apex: apex.clone() })
            })
            .collect()
    }
}

impl fmt::Display for Pyramid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P^{}_{}{}", self.sign, self.axis, self.apex)
    }
}

pub fn pyramid_contains(p: &Pyramid, y: &RatVec) -> Result<bool, GeometryError> {
    check_dims(p.dim(), y.dim())?;
    let diff = y.sub(&p.apex);
    let lhs = match p.sign {
        Sign::Pos => diff[p.axis].clone(),
        Sign::Neg => -diff[p.axis].clone(),
    };
    Ok(lhs == linf_norm(&diff))
}

/// A sign vector `v ∈ {-1,0,+1}^d \ {0}` naming the halfspace `H_v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct HalfspaceDir(Vec<i8>);

impl HalfspaceDir {
    pub fn new(signs: Vec<i8>) -> Result<HalfspaceDir, GeometryError> {
        if let Some(&bad) = signs.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(GeometryError::InvalidDirectionEntry(bad as i64));
        }
        if signs.iter().all(|&s| s == 0) {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(HalfspaceDir(signs))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Every direction in dimension `d`, in lexicographic order of the sign vector.
    pub fn enumerate(d: usize) -> Vec<HalfspaceDir> {
        let total = 3usize.pow(d as u32);
        let mut out = Vec::with_capacity(total - 1);
        for code in 0..total {
            let mut rest = code;
            let mut signs = vec![0i8; d];
            for i in (0..d).rev() {
                signs[i] = (rest % 3) as i8 - 1;
                rest /= 3;
            }
            if signs.iter().any(|&s| s != 0) {
                out.push(HalfspaceDir(signs));
            }
        }
        out
    }
}

impl TryFrom<Vec<i64>> for HalfspaceDir {
    type Error = GeometryError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        let mut signs = Vec::with_capacity(v.len());
        for s in v {
            if !(-1..=1).contains(&s) {
                return Err(GeometryError::InvalidDirectionEntry(s));
            }
            signs.push(s as i8);
        }
        HalfspaceDir::new(signs)
    }
}

impl From<HalfspaceDir> for Vec<i64> {
    fn from(v: HalfspaceDir) -> Vec<i64> {
        v.0.into_iter().map(i64::from).collect()
    }
}

impl fmt::Display for HalfspaceDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Pyramids whose union is `H_v(x)`: `P^+_i` for `v_i >= 0` and `P^-_i` for `v_i <= 0`.
pub fn halfspace_decompose(v: &HalfspaceDir, x: &RatVec) -> Result<Vec<Pyramid>, GeometryError> {
    check_dims(v.dim(), x.dim())?;
    let mut out = Vec::with_capacity(2 * x.dim() - 1);
    for (i, &s) in v.signs().iter().enumerate() {
        if s >= 0 {
            out.push(Pyramid { axis: i, sign: Sign::Pos, apex: x.clone() });
        }
        if s <= 0 {
            out.push(Pyramid { axis: i, sign: Sign::Neg, apex: x.clone() });
        }
    }
    Ok(out)
}

/// `sgn(c - fc)`; an exact fixed point (`c == fc`) is reported as an error.
pub fn direction_from_displacement(c: &RatVec, fc: &RatVec) -> Result<HalfspaceDir, GeometryError> {
    check_dims(c.dim(), fc.dim())?;
    let signs: Vec<i8> = c.iter().zip(fc.iter()).map(|(a, b)| rat::signum(&(a - b))).collect();
    if signs.iter().all(|&s| s == 0) {
        return Err(GeometryError::ExactFixedPoint);
    }
    Ok(HalfspaceDir(signs))
}

/// `[0,1]^d` minus the union of `cuts`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    dim: usize,
    cuts: Vec<Pyramid>,
}

impl SearchSpace {
    pub fn new(dim: usize) -> Result<SearchSpace, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        Ok(SearchSpace { dim, cuts: Vec::new() })
    }

    pub fn with_cuts(dim: usize, cuts: Vec<Pyramid>) -> Result<SearchSpace, GeometryError> {
        let mut space = SearchSpace::new(dim)?;
        for p in cuts {
            space.push_cut(p)?;
        }
        Ok(space)
    }

    pub fn push_cut(&mut self, p: Pyramid) -> Result<(), GeometryError> {
        check_dims(self.dim, p.dim())?;
        self.cuts.push(p);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cuts(&self) -> &[Pyramid] {
        &self.cuts
    }

    pub fn complexity(&self) -> usize {
        self.cuts.len()
    }

    /// Exact membership: inside the closed cube and outside every closed cut.
    pub fn contains(&self, y: &RatVec) -> Result<bool, GeometryError> {
        check_dims(self.dim, y.dim())?;
        if !y.in_unit_cube() {
            return Ok(false);
        }
        for p in &self.cuts {
            if pyramid_contains(p, y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn search_space_cut(
    x: &SearchSpace,
    v: &HalfspaceDir,
    c: &RatVec,
) -> Result<SearchSpace, GeometryError> {
    check_dims(x.dim(), c.dim())?;
    let mut out = x.clone();
    for p in halfspace_decompose(v, c)? {
        out.push_cut(p)?;
    }
    Ok(out)
}
