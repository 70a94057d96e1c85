//! Rock-Paper-Scissors counterexamples showing that responses built from a
//! finite prior sample are not consistent: the model stays inside the convex
//! hull of the samples (BBR) or locks onto the sample nearest in likelihood
//! (BBR and MAP) even when the opponent's true strategy is elsewhere.

use crate::bayes::LikelihoodTerm;
use crate::error::Result;
use crate::game::{rps, Player};
use crate::linalg::dist2;
use crate::sequence_form::SequenceFormGame;
use crate::{Behavior, Plan, SeqGame};

use super::SampledPosterior;

pub const PROP1_OPPONENT: [f64; 3] = [0.8, 0.1, 0.1];
pub const PROP1_SAMPLES: [[f64; 3]; 3] = [[0.5, 0.3, 0.2], [0.3, 0.5, 0.2], [0.2, 0.3, 0.5]];
pub const PROP2_OPPONENT: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
pub const PROP2_SAMPLES: [[f64; 3]; 3] = [[0.2, 0.4, 0.4], [0.6, 0.3, 0.1], [0.2, 0.3, 0.5]];

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    pub horizon: usize,
    /// Smallest `‖M_t − σ*‖₂` of the BBR model over `t = 0..=horizon`.
    pub min_distance: f64,
    pub argmin: usize,
    /// Largest first component of the BBR model seen.
    pub max_rock: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop2Report {
    pub horizon: usize,
    /// Normalized weight of the first sample after `horizon` observations.
    pub final_weight: f64,
    /// First `t` from which the first sample's weight stays at or above
    /// 0.99 through the horizon.
    pub settled_at: Option<usize>,
    /// Whether the first sample's weight never decreases across complete
    /// rounds once it has settled.
    pub monotone_after_settling: bool,
    /// Worst relative error of the weight ratios `w1/w2` and `w1/w3` against
    /// the closed forms `(0.032/0.018)^{t/3}` and `(0.032/0.03)^{t/3}` at
    /// multiples of 3.
    pub ratio_rel_error: f64,
    /// Distance of the final BBR and MAP models to the opponent.
    pub bbr_distance: f64,
    pub map_distance: f64,
}

fn rps_setup(samples: &[[f64; 3]], opponent: [f64; 3]) -> Result<(SeqGame, SampledPosterior, Plan)> {
    let game = SequenceFormGame::derive(&rps::<f64>().0)?;
    let strategies = samples.iter().map(|s| Behavior::new(vec![s.to_vec()])).collect();
    let posterior = SampledPosterior::new(&game, Player::Two, strategies)?;
    let target = game.behavioral_to_realization(Player::Two, &Behavior::new(vec![opponent.to_vec()]))?;
    Ok((game, posterior, target))
}

/// Action of observation `t` (1-based) in a deterministic sequence whose
/// counts track `t · freq` as closely as possible: pick the action furthest
/// below its target, lowest index on ties.
pub fn exact_frequency_action(counts: &[u64], freq: &[f64], t: usize) -> usize {
    let mut best = 0;
    let mut best_gap = f64::NEG_INFINITY;
    for (a, (&c, &p)) in counts.iter().zip(freq).enumerate() {
        let gap = t as f64 * p - c as f64;
        if gap > best_gap + 1e-12 {
            best = a;
            best_gap = gap;
        }
    }
    best
}

/// BBR against `(0.8, 0.1, 0.1)` with three samples that all put at most
/// 0.5 on rock, fed observations at exact empirical frequencies.
pub fn proposition1(horizon: usize) -> Result<Prop1Report> {
    let (_, mut post, target) = rps_setup(&PROP1_SAMPLES, PROP1_OPPONENT)?;
    let mut counts = [0u64; 3];
    let mut report = Prop1Report { horizon, min_distance: f64::INFINITY, argmin: 0, max_rock: 0.0 };
    for t in 0..=horizon {
        if t > 0 {
            let a = exact_frequency_action(&counts, &PROP1_OPPONENT, t);
            counts[a] += 1;
            post.update_weights(&LikelihoodTerm::singleton(1 + a));
        }
        let model = post.bbr()?;
        let d = dist2(model.as_slice(), target.as_slice());
        if d < report.min_distance {
            report.min_distance = d;
            report.argmin = t;
        }
        report.max_rock = report.max_rock.max(model[1]);
    }
    Ok(report)
}

/// BBR and MAP against the uniform strategy, fed rock, paper, scissors in
/// rotation so every third observation the counts are exactly equal.
pub fn proposition2(horizon: usize) -> Result<Prop2Report> {
    let (_, mut post, target) = rps_setup(&PROP2_SAMPLES, PROP2_OPPONENT)?;
    let per_round: Vec<f64> = PROP2_SAMPLES.iter().map(|s| s.iter().product()).collect();
    let mut settled_at = None;
    let mut monotone = true;
    let mut last_round_weight = 0.0;
    let mut worst = 0.0f64;
    let mut final_weight = 0.0;
    for t in 1..=horizon {
        post.update_weights(&LikelihoodTerm::singleton(1 + (t - 1) % 3));
        let w = post.weights()?;
        final_weight = w[0];
        if w[0] >= 0.99 {
            settled_at.get_or_insert(t);
        } else {
            settled_at = None;
        }
        if t % 3 == 0 {
            let lw = post.log_weights();
            let rounds = (t / 3) as f64;
            for j in 1..3 {
                let got = lw[0] - lw[j];
                let want = rounds * (per_round[0] / per_round[j]).ln();
                // relative error of the ratio exp(got) against exp(want)
                worst = worst.max((got - want).exp_m1().abs());
            }
            if settled_at.is_some() && w[0] < last_round_weight {
                monotone = false;
            }
            last_round_weight = w[0];
        }
    }
    let bbr_distance = dist2(post.bbr()?.as_slice(), target.as_slice());
    let map_plan = &post.samples()[post.map_index()?].plan;
    let map_distance = dist2(map_plan.as_slice(), target.as_slice());
    Ok(Prop2Report {
        horizon,
        final_weight,
        settled_at,
        monotone_after_settling: monotone,
        ratio_rel_error: worst,
        bbr_distance,
        map_distance,
    })
}
