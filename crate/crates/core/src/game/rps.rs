use super::{GameTree, Observability, Player, TreeBuilder};
use crate::scalar::Scalar;

/// Rock-Paper-Scissors as a sequential game: player 1 moves, then player 2
/// moves in a single information set that hides player 1's choice. Both
/// actions are revealed at the end of every round.
pub fn rps<S: Scalar>() -> (GameTree<S>, Observability) {
    let mut b = TreeBuilder::<S>::new();
    let p1 = b.infoset(Player::One, "P1", &["Rock", "Paper", "Scissors"]);
    let p2 = b.infoset(Player::Two, "P2", &["rock", "paper", "scissors"]);
    let mut p1_children = Vec::new();
    for mine in 0..3i64 {
        let leaves: Vec<_> = (0..3i64)
            .map(|theirs| {
                let payoff = match (mine - theirs).rem_euclid(3) {
                    0 => S::zero(),
                    1 => S::one(),
                    _ => -S::one(),
                };
                b.zero_sum_terminal(payoff)
            })
            .collect();
        p1_children.push(b.decision(Player::Two, p2, leaves));
    }
    let root = b.decision(Player::One, p1, p1_children);
    let tree = b.build(root).expect("RPS tree is well formed");
    let obs = Observability::full(tree.leaves().len());
    (tree, obs)
}
