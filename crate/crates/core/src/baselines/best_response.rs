use crate::error::{Error, Result};
use crate::game::Player;
use crate::scalar::Scalar;
use crate::sequence_form::{RealizationPlan, SequenceFormGame};

/// Pure best response of `player` to a fixed opponent realization plan, by
/// backward induction over the player's information sets (expectimax with
/// chance-weighted payoffs). Ties go to the first action in canonical order.
/// Returns the plan and its expected payoff to `player`.
pub fn best_response<S: Scalar>(
    game: &SequenceFormGame<S>,
    player: Player,
    opponent: &RealizationPlan<S>,
) -> Result<(RealizationPlan<S>, S)> {
    let residual = game.constraint_residual(player.opponent(), opponent)?;
    if residual > 1e-9 {
        return Err(Error::InfeasiblePlan { residual });
    }
    // value collected at each own sequence against the fixed opponent
    let direct = match player {
        Player::One => game.payoff_matrix(Player::One).mul_vec(opponent.as_slice()),
        Player::Two => game.payoff_matrix(Player::Two).tr_mul_vec(opponent.as_slice()),
    };
    let seqs = game.sequences_of(player);
    let mut cont = direct;
    let mut choice = vec![0usize; seqs.infoset_count()];
    for &i in seqs.top_down().iter().rev() {
        let mut actions = seqs.actions(i);
        let first = actions.next().expect("information sets have actions");
        let (mut best_seq, mut best) = (first, cont[first].clone());
        for s in actions {
            if cont[s] > best {
                best = cont[s].clone();
                best_seq = s;
            }
        }
        choice[i] = best_seq;
        let parent = seqs.parent(i);
        cont[parent] = cont[parent].clone() + best;
    }

    let mut plan = vec![S::zero(); seqs.len()];
    plan[0] = S::one();
    for &i in seqs.top_down() {
        let reach = plan[seqs.parent(i)].clone();
        plan[choice[i]] = reach;
    }
    Ok((RealizationPlan(plan), cont[0].clone()))
}
