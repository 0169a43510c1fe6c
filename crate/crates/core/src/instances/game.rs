use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::geometry::RatVec;
use crate::rat::{self, Rat};
use crate::solver::{EvalError, Map};

/// Largest number of nodes in a toy game.
pub const MAX_GAME_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Min,
    Max,
    Average,
}

/// Moving earns `reward` and continues at `to` with weight `weight`; a move
/// without a target ends the play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameMove {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<usize>,
    #[serde(with = "rat::serde_rat", default = "rat::zero")]
    pub weight: Rat,
    #[serde(with = "rat::serde_rat", default = "rat::zero")]
    pub reward: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameNode {
    pub kind: NodeKind,
    pub moves: Vec<GameMove>,
}

/// Value iteration `f_i(x) = op_i over moves (reward + weight · x_to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyGame {
    nodes: Vec<GameNode>,
}

impl ToyGame {
    pub fn new(nodes: Vec<GameNode>) -> Result<Self, InstanceError> {
        let n = nodes.len();
        if n == 0 || n > MAX_GAME_NODES {
            return Err(InstanceError::Game(format!("a toy game has 1 to {MAX_GAME_NODES} nodes, got {n}")));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.moves.is_empty() {
                return Err(InstanceError::Game(format!("node {i} has no moves")));
            }
            for mv in &node.moves {
                if rat::is_negative(&mv.weight) || rat::is_negative(&mv.reward) {
                    return Err(InstanceError::Game(format!("node {i} has a negative weight or reward")));
                }
                if &mv.weight + &mv.reward > 1u32 {
                    return Err(InstanceError::Game(format!("node {i} has a move worth more than 1")));
                }
                match mv.to {
                    Some(t) if t >= n => {
                        return Err(InstanceError::Game(format!("node {i} moves to missing node {t}")))
                    }
                    None if !rat::is_zero(&mv.weight) => {
                        return Err(InstanceError::Game(format!("node {i} has a weighted move with no target")))
                    }
                    _ => {}
                }
            }
        }
        Ok(ToyGame { nodes })
    }

    pub fn nodes(&self) -> &[GameNode] {
        &self.nodes
    }

    /// Largest continuation weight; 1 means merely non-expansive.
    pub fn contraction_factor(&self) -> Rat {
        self.nodes
            .iter()
            .flat_map(|n| n.moves.iter().map(|m| m.weight.clone()))
            .max()
            .unwrap_or_else(rat::zero)
    }

    pub fn apply(&self, x: &RatVec) -> RatVec {
        RatVec::new(
            self.nodes
                .iter()
                .map(|node| {
                    let values = node.moves.iter().map(|m| match m.to {
                        Some(t) => &m.reward + &m.weight * &x[t],
                        None => m.reward.clone(),
                    });
                    match node.kind {
                        NodeKind::Min => values.min().expect("nonempty"),
                        NodeKind::Max => values.max().expect("nonempty"),
                        NodeKind::Average => {
                            let k = Rat::from(node.moves.len() as u64);
                            values.fold(rat::zero(), |a, v| a + v) / k
                        }
                    }
                })
                .collect(),
        )
    }
}

impl Map for ToyGame {
    fn dim(&self) -> usize {
        self.nodes.len()
    }
    fn eval(&self, x: &RatVec) -> Result<RatVec, EvalError> {
        if x.dim() != self.nodes.len() {
            return Err(EvalError::DimensionMismatch { expected: self.nodes.len(), got: x.dim() });
        }
        Ok(self.apply(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linf_distance;
    use crate::rat::frac;

    fn mv(to: Option<usize>, weight: Rat, reward: Rat) -> GameMove {
        GameMove { to, weight, reward }
    }

    fn two_node() -> ToyGame {
        ToyGame::new(vec![
            GameNode {
                kind: NodeKind::Max,
                moves: vec![mv(Some(1), frac(9, 10), rat::zero()), mv(None, rat::zero(), frac(1, 2))],
            },
            GameNode {
                kind: NodeKind::Average,
                moves: vec![mv(Some(0), rat::one(), rat::zero()), mv(None, rat::zero(), rat::one())],
            },
        ])
        .unwrap()
    }

    #[test]
    fn value_operator_by_hand() {
        let g = two_node();
        assert_eq!(g.contraction_factor(), rat::one());
        // node 0: max(0.9 * 1/2, 1/2) = 1/2; node 1: (0 + 1) / 2
        let y = g.apply(&RatVec::from_fracs(&[(0, 1), (1, 2)]));
        assert_eq!(y, RatVec::from_fracs(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn non_expansive_on_samples() {
        let g = two_node();
        for i in 0..=10 {
            for j in 0..=10 {
                let x = RatVec::from_fracs(&[(i, 10), (j, 10)]);
                let y = RatVec::from_fracs(&[(10 - j, 10), (i, 10)]);
                assert!(linf_distance(&g.apply(&x), &g.apply(&y)) <= linf_distance(&x, &y));
            }
        }
    }

    #[test]
    fn validation() {
        let bad_target = vec![GameNode { kind: NodeKind::Min, moves: vec![mv(Some(3), frac(1, 2), rat::zero())] }];
        assert!(ToyGame::new(bad_target).is_err());
        let too_rich = vec![GameNode { kind: NodeKind::Min, moves: vec![mv(Some(0), frac(3, 4), frac(1, 2))] }];
        assert!(ToyGame::new(too_rich).is_err());
        let dangling = vec![GameNode { kind: NodeKind::Min, moves: vec![mv(None, frac(1, 4), rat::zero())] }];
        assert!(ToyGame::new(dangling).is_err());
        assert!(ToyGame::new(vec![]).is_err());
    }
}
