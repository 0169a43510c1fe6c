//! The final two stages of the centerpoint search and the exhaustive checker.

use std::collections::BTreeMap;

use super::balance::balance_negative_pyramids;
use super::pulling::{pull, PullRequest};
use super::{pyramid_masses, CenterpointError, VolumeOracle};
use crate::geometry::{HalfspaceDir, RatVec};
use crate::rat::{self, Rat};

/// Largest dimension for which all `3^d - 1` halfspaces are enumerated.
pub const MAX_VERIFY_DIM: usize = 8;

#[derive(Debug, Clone)]
pub struct CenterpointConfig {
    /// The balancing slack is `vol(X) / (kappa d)`; the guaranteed quality is
    /// `(1 - 3/kappa) / (2d)`, so `kappa = 6` gives `1/(4d)` and larger values
    /// approach `1/(2d)` at the price of more balancing steps.
    pub kappa: Rat,
    /// Record every halfspace volume in the certificate (only for `d <= 3`).
    pub record_halfspaces: bool,
}

impl Default for CenterpointConfig {
    fn default() -> Self {
        CenterpointConfig { kappa: Rat::from(6u32), record_halfspaces: false }
    }
}

impl CenterpointConfig {
    pub fn quality(&self, d: usize) -> Rat {
        (rat::one() - Rat::from(3u32) / &self.kappa) / Rat::from(2 * d as u64)
    }
}

#[derive(Debug, Clone)]
pub struct CenterpointCertificate {
    pub point: RatVec,
    /// Guaranteed fraction of `vol(X)` in every halfspace around `point`.
    pub quality: Rat,
    pub total: Rat,
    /// Coordinates left unchanged by the projection.
    pub s_set: Vec<usize>,
    /// `[neg, pos]` pyramid volumes around `point`.
    pub masses: Vec<[Rat; 2]>,
    pub balance_steps: usize,
    pub halfspace_volumes: Option<BTreeMap<HalfspaceDir, Rat>>,
}

/// Slides `c` along `-1` until the positive pyramids hold `m/2` up to `eps`.
pub fn shift_to_diagonal<O: VolumeOracle + ?Sized>(
    oracle: &O,
    c: &RatVec,
    m: &Rat,
    eps: &Rat,
) -> Result<RatVec, CenterpointError> {
    let d = oracle.dim();
    let masses = pyramid_masses(oracle, c);
    if masses.iter().any(|[_, pos]| !rat::is_zero(pos)) {
        return Err(CenterpointError::Precondition("a positive pyramid is nonempty".into()));
    }
    if masses.iter().any(|[neg, _]| neg < m) {
        return Err(CenterpointError::Precondition(format!("a negative pyramid holds less than {m}")));
    }
    let half = m / Rat::from(2u32);
    let out = pull(oracle, &PullRequest { start: c.clone(), direction: vec![-1; d], target: half.clone(), slack: eps.clone() })?;
    let after = pyramid_masses(oracle, &out.point);
    let pos_sum = after.iter().fold(rat::zero(), |a, [_, pos]| a + pos);
    if pos_sum > half || pos_sum < &half - eps {
        return Err(CenterpointError::InvariantViolated(format!("positive mass {pos_sum} outside [{half} - {eps}, {half}]")));
    }
    if after.iter().any(|[neg, _]| *neg < half) {
        return Err(CenterpointError::InvariantViolated("a negative pyramid fell below m/2".into()));
    }
    Ok(out.point)
}

/// Clamps into `[0,1]^d`; the index list holds the coordinates that did not move.
pub fn project_to_cube(c: &RatVec) -> (RatVec, Vec<usize>) {
    let zero = rat::zero();
    let one = rat::one();
    let mut s = Vec::new();
    let coords = c
        .iter()
        .enumerate()
        .map(|(i, ci)| {
            if *ci < zero {
                zero.clone()
            } else if *ci > one {
                one.clone()
            } else {
                s.push(i);
                ci.clone()
            }
        })
        .collect();
    (RatVec::new(coords), s)
}

/// Volume of `H_v(c) ∩ X` from the `2d` pyramid masses around `c`.
pub fn halfspace_volume(masses: &[[Rat; 2]], v: &HalfspaceDir) -> Rat {
    let mut total = rat::zero();
    for (&s, [neg, pos]) in v.signs().iter().zip(masses) {
        if s >= 0 {
            total += pos;
        }
        if s <= 0 {
            total += neg;
        }
    }
    total
}

pub fn find_centerpoint<O: VolumeOracle + ?Sized>(
    oracle: &O,
    config: &CenterpointConfig,
) -> Result<CenterpointCertificate, CenterpointError> {
    let d = oracle.dim();
    if config.kappa <= 3u32 {
        return Err(CenterpointError::Precondition("kappa must exceed 3".into()));
    }
    let total = oracle.total_volume();
    if !rat::is_positive(&total) {
        return Err(CenterpointError::ZeroVolume);
    }
    let dd = Rat::from(d as u64);
    let eps = &total / (&config.kappa * &dd);
    let balanced = balance_negative_pyramids(oracle, &eps)?;
    let m = &total / &dd - &eps;
    let shifted = shift_to_diagonal(oracle, &balanced.c, &m, &eps)?;
    let (point, s_set) = project_to_cube(&shifted);
    let quality = config.quality(d);
    let need = &quality * &total;
    let masses = pyramid_masses(oracle, &point);
    if s_set.is_empty() {
        return Err(CenterpointError::InvariantViolated("projection moved every coordinate".into()));
    }
    let pos_on_s = s_set.iter().fold(rat::zero(), |a, &i| a + &masses[i][1]);
    if pos_on_s < need || s_set.iter().any(|&i| masses[i][0] < need) {
        return Err(CenterpointError::InvariantViolated(format!(
            "projected point misses the {quality} pyramid conditions"
        )));
    }
    let halfspace_volumes = (config.record_halfspaces && d <= 3).then(|| {
        HalfspaceDir::enumerate(d)
            .into_iter()
            .map(|v| {
                let vol = halfspace_volume(&masses, &v);
                (v, vol)
            })
            .collect()
    });
    Ok(CenterpointCertificate {
        point,
        quality,
        total,
        s_set,
        masses,
        balance_steps: balanced.steps.len(),
        halfspace_volumes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub certified: bool,
    /// First direction (lexicographically) attaining the minimum volume.
    pub worst: HalfspaceDir,
    pub worst_volume: Rat,
    pub total: Rat,
    /// `worst_volume / total`, zero when `X` is empty.
    pub ratio: Rat,
}

pub fn verify_centerpoint<O: VolumeOracle + ?Sized>(
    oracle: &O,
    c: &RatVec,
    alpha: &Rat,
) -> Result<Verification, CenterpointError> {
    let d = oracle.dim();
    if d > MAX_VERIFY_DIM {
        return Err(CenterpointError::DimensionGuard { max: MAX_VERIFY_DIM, got: d });
    }
    if c.dim() != d {
        return Err(crate::geometry::GeometryError::DimensionMismatch { expected: d, got: c.dim() }.into());
    }
    let total = oracle.total_volume();
    let masses = pyramid_masses(oracle, c);
    let mut worst: Option<(HalfspaceDir, Rat)> = None;
    for v in HalfspaceDir::enumerate(d) {
        let vol = halfspace_volume(&masses, &v);
        if worst.as_ref().map_or(true, |(_, w)| vol < *w) {
            worst = Some((v, vol));
        }
    }
    let (worst, worst_volume) = worst.expect("at least two directions exist for d >= 1");
    let ratio = if rat::is_positive(&total) { &worst_volume / &total } else { rat::zero() };
    let certified = worst_volume >= alpha * &total;
    Ok(Verification { certified, worst, worst_volume, total, ratio })
}
