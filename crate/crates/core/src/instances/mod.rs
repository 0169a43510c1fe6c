//! Test instances: clamped affine contractions with known fixed points, a toy
//! stochastic-game value operator, and their JSON form.
//!
//! ```json
//! {"type": "affine", "A": [["1/2"]], "b": ["1/4"], "lambda": "1/2", "fixed_point": ["1/2"]}
//! {"type": "toygame", "nodes": [{"kind": "max", "moves": [{"to": 0, "weight": "9/10"}, {"reward": "1/2"}]}]}
//! ```
//!
//! `lambda` defaults to the row-sum norm (affine) or the largest move weight
//! (game); a declared value below that is rejected. A given `fixed_point` must
//! be exact.

mod affine;
mod game;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::RatVec;
use crate::rat::{self, Rat};
use crate::solver::{ContractionInstance, Map, SolverError};

pub use affine::{random_affine, reflection_affine, AffineInstance, AffineMap};
pub use game::{GameMove, GameNode, NodeKind, ToyGame, MAX_GAME_NODES};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read instance file: {0}")]
    Io(#[from] std::io::Error),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("declared lambda {declared} is below the map's bound {bound}")]
    LambdaViolated { declared: String, bound: String },
    #[error("map is not non-expansive: bound {0} exceeds 1")]
    NotNonExpansive(String),
    #[error("declared fixed point is wrong: {0}")]
    BadFixedPoint(String),
    #[error("invalid toy game: {0}")]
    Game(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    #[serde(rename = "A", with = "rat::serde_rat_mat")]
    pub a: Vec<Vec<Rat>>,
    pub b: RatVec,
    #[serde(with = "rat::serde_rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<RatVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub nodes: Vec<GameNode>,
    #[serde(with = "rat::serde_rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<RatVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum InstanceSpec {
    Affine(AffineSpec),
    Toygame(GameSpec),
}

impl AffineInstance {
    pub fn instance(&self) -> ContractionInstance {
        ContractionInstance::new(Arc::new(self.map.clone()), self.lambda.clone())
            .and_then(|i| i.with_fixed_point(self.fixed_point.clone()))
            .expect("generated instances are valid by construction")
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec::Affine(AffineSpec {
            a: self.map.matrix().to_vec(),
            b: self.map.offset().clone(),
            lambda: Some(self.lambda.clone()),
            fixed_point: Some(self.fixed_point.clone()),
            name: None,
        })
    }
}

fn settle_lambda(declared: Option<Rat>, bound: Rat) -> Result<Rat, InstanceError> {
    match declared {
        Some(l) if l < bound => {
            Err(InstanceError::LambdaViolated { declared: rat::format_rat(&l), bound: rat::format_rat(&bound) })
        }
        Some(l) if l > 1u32 => Err(InstanceError::NotNonExpansive(rat::format_rat(&l))),
        Some(l) => Ok(l),
        None if bound > 1u32 => Err(InstanceError::NotNonExpansive(rat::format_rat(&bound))),
        None => Ok(bound),
    }
}

fn check_fixed_point(map: &dyn Map, x: &RatVec) -> Result<(), InstanceError> {
    if x.dim() != map.dim() {
        return Err(InstanceError::DimensionMismatch(format!(
            "fixed point has {} coordinates, map has {}",
            x.dim(),
            map.dim()
        )));
    }
    if !x.in_unit_cube() {
        return Err(InstanceError::BadFixedPoint("outside the unit cube".into()));
    }
    let fx = map.eval(x).map_err(|e| InstanceError::BadFixedPoint(e.to_string()))?;
    if &fx != x {
        return Err(InstanceError::BadFixedPoint(format!("f({x}) = {fx}")));
    }
    Ok(())
}

impl InstanceSpec {
    pub fn into_instance(self) -> Result<ContractionInstance, InstanceError> {
        let (map, lambda, fixed_point, name): (Arc<dyn Map>, _, _, _) = match self {
            InstanceSpec::Affine(s) => {
                let map = AffineMap::new(s.a, s.b)?;
                let lambda = settle_lambda(s.lambda, map.row_sum_norm())?;
                let fp = match s.fixed_point {
                    Some(x) => Some(x),
                    None => map.pre_clamp_fixed_point().filter(|x| x.in_unit_cube() && map.apply(x) == *x),
                };
                (Arc::new(map), lambda, fp, s.name.unwrap_or_else(|| "affine".into()))
            }
            InstanceSpec::Toygame(s) => {
                let game = ToyGame::new(s.nodes)?;
                let lambda = settle_lambda(s.lambda, game.contraction_factor())?;
                (Arc::new(game), lambda, s.fixed_point, s.name.unwrap_or_else(|| "toygame".into()))
            }
        };
        if let Some(x) = &fixed_point {
            check_fixed_point(map.as_ref(), x)?;
        }
        let mut inst = ContractionInstance::new(map, lambda)?.with_label(name);
        if let Some(x) = fixed_point {
            inst = inst.with_fixed_point(x)?;
        }
        Ok(inst)
    }
}

pub fn parse_instance(json: &str) -> Result<InstanceSpec, InstanceError> {
    Ok(serde_json::from_str(json)?)
}

pub fn load_instance_str(json: &str) -> Result<ContractionInstance, InstanceError> {
    parse_instance(json)?.into_instance()
}

pub fn load_instance(path: &Path) -> Result<ContractionInstance, InstanceError> {
    let text = std::fs::read_to_string(path)?;
    load_instance_str(&text)
}
