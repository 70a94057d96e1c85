//! Player 1's equilibrium family in Kuhn poker: bet the jack with
//! probability `α`, the king with `3α`, never the queen; after check-bet
//! call with the king always, with the queen at `α + 1/3`, never with the
//! jack; `α ∈ [0, 1/3]`. Every member is certified against player 2's best
//! response before use.

use super::best_response::best_response;
use crate::error::{Error, Result};
use crate::game::Player;
use crate::scalar::{ratio, Scalar};
use crate::sequence_form::{BehavioralStrategy, RealizationPlan, SequenceFormGame};

/// Steps of the α grid searched by [`best_nash_kuhn`]: α = i/60.
pub const NASH_GRID_STEPS: i64 = 20;

/// Game value of Kuhn poker to player 1.
pub fn kuhn_game_value<S: Scalar>() -> S {
    ratio(-1, 18)
}

pub fn kuhn_equilibrium<S: Scalar>(game: &SequenceFormGame<S>, alpha: S) -> Result<RealizationPlan<S>> {
    if alpha < S::zero() || alpha > ratio(1, 3) {
        return Err(Error::Config(format!("equilibrium parameter {alpha} outside [0, 1/3]")));
    }
    let seqs = game.sequences_of(Player::One);
    let one = S::one();
    let mut probs = vec![Vec::new(); seqs.infoset_count()];
    let rules: [(&str, S); 6] = [
        ("K", ratio::<S>(3, 1) * alpha.clone()),
        ("K:Ch-b", one.clone()),
        ("Q", S::zero()),
        ("Q:Ch-b", alpha.clone() + ratio(1, 3)),
        ("J", alpha),
        ("J:Ch-b", S::zero()),
    ];
    for (label, first) in rules {
        let i = (0..seqs.infoset_count())
            .find(|&i| seqs.infoset_label(i) == label)
            .ok_or_else(|| Error::InvalidGame(format!("not Kuhn poker: no information set `{label}`")))?;
        probs[i] = vec![first.clone(), one.clone() - first];
    }
    if probs.iter().any(Vec::is_empty) {
        return Err(Error::InvalidGame("not Kuhn poker: unexpected information sets".into()));
    }
    game.behavioral_to_realization(Player::One, &BehavioralStrategy::new(probs))
}

/// Player 2's best-response payoff against `x`, negated: what `x`
/// guarantees player 1.
pub fn guaranteed_value<S: Scalar>(game: &SequenceFormGame<S>, x: &RealizationPlan<S>) -> Result<S> {
    let (_, v) = best_response(game, Player::Two, x)?;
    Ok(-v)
}

/// The equilibrium family member that earns the most against `y_star`,
/// searched over the α grid (the payoff is affine in α, so an endpoint
/// wins). Returns the plan and its payoff.
pub fn best_nash_kuhn<S: Scalar>(
    game: &SequenceFormGame<S>,
    y_star: &RealizationPlan<S>,
) -> Result<(RealizationPlan<S>, S)> {
    let mut best: Option<(RealizationPlan<S>, S)> = None;
    for i in 0..=NASH_GRID_STEPS {
        let x = kuhn_equilibrium(game, ratio(i, 3 * NASH_GRID_STEPS))?;
        let v = game.expected_payoff(&x, y_star)?;
        if best.as_ref().map_or(true, |(_, b)| v > *b) {
            best = Some((x, v));
        }
    }
    let (x, v) = best.expect("grid is non-empty");
    let guaranteed = guaranteed_value(game, &x)?;
    if (guaranteed.clone() - kuhn_game_value()).as_f64().abs() > 1e-10 {
        return Err(Error::Equilibrium(format!("family member guarantees {guaranteed}, not -1/18")));
    }
    Ok((x, v))
}
