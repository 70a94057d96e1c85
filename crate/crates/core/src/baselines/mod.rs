//! Sampling-based opponent models (BBR, MAP, Thompson), best responses and
//! the fixed benchmark strategies.

mod best_response;
mod kuhn_nash;
pub mod propositions;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use best_response::best_response;
pub use kuhn_nash::{best_nash_kuhn, guaranteed_value, kuhn_equilibrium, kuhn_game_value, NASH_GRID_STEPS};

use crate::bayes::{DirichletPrior, LikelihoodTerm};
use crate::error::{Error, Result};
use crate::game::Player;
use crate::{Behavior, Plan, SeqGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResponseKind {
    Fmap,
    Bbr,
    Map,
    Thompson,
    BestNash,
    BestResponse,
}

impl ResponseKind {
    pub const ALL: [ResponseKind; 6] = [
        ResponseKind::Fmap,
        ResponseKind::Bbr,
        ResponseKind::Map,
        ResponseKind::Thompson,
        ResponseKind::BestNash,
        ResponseKind::BestResponse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResponseKind::Fmap => "FMAP",
            ResponseKind::Bbr => "BBR",
            ResponseKind::Map => "MAP",
            ResponseKind::Thompson => "Thompson",
            ResponseKind::BestNash => "BestNash",
            ResponseKind::BestResponse => "BestResponse",
        }
    }

    /// Builds its model from a sampled posterior.
    pub fn is_sampling(self) -> bool {
        matches!(self, ResponseKind::Bbr | ResponseKind::Map | ResponseKind::Thompson)
    }

    /// Plays a fixed strategy chosen with knowledge of the opponent.
    pub fn is_benchmark(self) -> bool {
        matches!(self, ResponseKind::BestNash | ResponseKind::BestResponse)
    }
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResponseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub strategy: Behavior,
    pub plan: Plan,
}

/// A fixed set of prior draws with running log posterior weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPosterior {
    samples: Vec<Sample>,
    log_weights: Vec<f64>,
}

impl SampledPosterior {
    pub fn new(game: &SeqGame, player: Player, strategies: Vec<Behavior>) -> Result<Self> {
        let samples = strategies
            .into_iter()
            .map(|strategy| {
                let plan = game.behavioral_to_realization(player, &strategy)?;
                Ok(Sample { strategy, plan })
            })
            .collect::<Result<Vec<_>>>()?;
        let log_weights = vec![0.0; samples.len()];
        Ok(Self { samples, log_weights })
    }

    /// Draws `k` strategies from the prior.
    pub fn from_prior<R: Rng + ?Sized>(game: &SeqGame, prior: &DirichletPrior<f64>, k: usize, rng: &mut R) -> Result<Self> {
        let strategies = (0..k).map(|_| prior.sample(rng)).collect();
        Self::new(game, prior.player(), strategies)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Adds `log Σ_j q_j y_j` of every sample. A sample that gives the
    /// observation zero probability drops to `-∞`.
    pub fn update_weights(&mut self, term: &LikelihoodTerm<f64>) {
        self.update_weights_by(term, 1);
    }

    /// Same as `multiplicity` calls to [`update_weights`](Self::update_weights).
    pub fn update_weights_by(&mut self, term: &LikelihoodTerm<f64>, multiplicity: u64) {
        for (lw, s) in self.log_weights.iter_mut().zip(&self.samples) {
            let l = term.likelihood(s.plan.as_slice());
            *lw += multiplicity as f64 * if l > 0.0 { l.ln() } else { f64::NEG_INFINITY };
        }
    }

    /// Posterior weights normalized with the max-log shift.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::EmptyPosterior);
        }
        let raw: Vec<f64> = self.log_weights.iter().map(|&lw| (lw - top).exp()).collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / total).collect())
    }

    /// Weighted average of the sample plans.
    pub fn bbr(&self) -> Result<Plan> {
        let w = self.weights()?;
        let mut y = vec![0.0; self.samples[0].plan.len()];
        for (wi, s) in w.iter().zip(&self.samples) {
            for (acc, v) in y.iter_mut().zip(s.plan.as_slice()) {
                *acc += wi * v;
            }
        }
        Ok(crate::RealizationPlan(y))
    }

    /// Index of the heaviest sample, lowest index on ties.
    pub fn map_index(&self) -> Result<usize> {
        let w = self.weights()?;
        let mut best = 0;
        for (i, &v) in w.iter().enumerate() {
            if v > w[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Sample index drawn in proportion to the weights.
    pub fn thompson_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let w = self.weights()?;
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        for (i, &v) in w.iter().enumerate() {
            cumulative += v;
            if cumulative > u {
                return Ok(i);
            }
        }
        Ok(w.iter().rposition(|&v| v > 0.0).unwrap_or(w.len() - 1))
    }

    /// The opponent model of a sampling algorithm.
    pub fn model<R: Rng + ?Sized>(&self, kind: ResponseKind, rng: &mut R) -> Result<Plan> {
        if self.samples.is_empty() {
            return Err(Error::EmptyPosterior);
        }
        match kind {
            ResponseKind::Bbr => self.bbr(),
            ResponseKind::Map => Ok(self.samples[self.map_index()?].plan.clone()),
            ResponseKind::Thompson => Ok(self.samples[self.thompson_index(rng)?].plan.clone()),
            other => Err(Error::Config(format!("{other} is not a sampling model"))),
        }
    }
}
