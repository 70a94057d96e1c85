//! Repeated play against static opponents drawn from the prior.
//!
//! Each opponent match runs every requested algorithm against the same
//! opponent with common random numbers: the same card deals, the same
//! randomization thresholds at every information set, and (for the sampling
//! algorithms) the same `k` prior samples. Scoring uses expected payoffs,
//! not the realized outcome of the hand.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{best_nash_kuhn, best_response, guaranteed_value, ResponseKind, SampledPosterior};
use crate::bayes::{DirichletPrior, ObservationLog};
use crate::error::{Error, Result};
use crate::fmap::{Fmap, PgdConfig};
use crate::game::{kuhn, rps, Outcome, Player};
use crate::linalg::dist2;
use crate::{Behavior, Game, Observability, Plan, SeqGame, SequenceFormGame};

/// Sub-streams of an opponent seed.
pub mod stream {
    pub const OPPONENT: u64 = 0;
    pub const DEAL: u64 = 1;
    pub const THRESHOLD: u64 = 2;
    pub const THOMPSON: u64 = 3;
    pub const SAMPLES: u64 = 4;
}

/// Generator for stream `index` of `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed of child `index` of `parent` (first word of the child's stream).
pub fn child_seed(parent: u64, index: u64) -> u64 {
    stream_rng(parent, index).next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameId {
    Kuhn,
    Rps,
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameId::Kuhn => "kuhn",
            GameId::Rps => "rps",
        })
    }
}

impl FromStr for GameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kuhn" => Ok(GameId::Kuhn),
            "rps" => Ok(GameId::Rps),
            _ => Err(Error::Config(format!("unknown game `{s}` (expected kuhn or rps)"))),
        }
    }
}

/// A game with everything a match needs.
#[derive(Debug, Clone)]
pub struct GameBundle {
    pub id: GameId,
    pub tree: Game,
    pub observability: Observability,
    pub game: SeqGame,
}

impl GameBundle {
    pub fn load(id: GameId) -> Result<Self> {
        let (tree, observability) = match id {
            GameId::Kuhn => kuhn::<f64>(),
            GameId::Rps => rps::<f64>(),
        };
        observability.validate(&tree)?;
        let game = SequenceFormGame::derive(&tree)?;
        Ok(Self { id, tree, observability, game })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub game: GameId,
    pub iterations: usize,
    pub opponents: usize,
    pub samples: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(with = "algo_names")]
    pub algorithms: Vec<ResponseKind>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            game: GameId::Kuhn,
            iterations: 3000,
            opponents: 100,
            samples: 10,
            alpha: 2.0,
            seed: 42,
            algorithms: ResponseKind::ALL.to_vec(),
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.iterations == 0 {
            return fail("iterations must be at least 1");
        }
        if self.opponents == 0 {
            return fail("opponent count must be at least 1");
        }
        if self.samples == 0 {
            return fail("sample count must be at least 1");
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("prior alpha must be a finite value >= 1, got {}", self.alpha)));
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms requested");
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::Config(format!("algorithm {a} requested twice")));
            }
        }
        Ok(())
    }

    pub fn opponent_seed(&self, opponent: usize) -> u64 {
        child_seed(self.seed, opponent as u64)
    }
}

mod algo_names {
    use super::ResponseKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(algos: &[ResponseKind], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(algos.iter().map(|a| a.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ResponseKind>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|n| n.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub algorithm: ResponseKind,
    pub opponent: usize,
    /// 1-based game iteration.
    pub iteration: usize,
    /// `xᵀ A y*` of the strategy played this iteration, in antes per hand.
    pub expected_payoff: f64,
    /// `‖M_t − σ*‖₂` over the full sequence-form vector; absent for
    /// BestNash, which keeps no model.
    pub model_l2: Option<f64>,
}

/// Random numbers of one game iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// One uniform per chance node.
    pub chance: Vec<f64>,
    /// One threshold per information set of each player.
    pub thresholds: [Vec<f64>; 2],
}

/// Per-iteration chance outcomes and thresholds of one opponent match.
/// Every algorithm in the match replays the same sequence.
#[derive(Debug, Clone)]
pub struct SharedRandomness {
    deal: ChaCha8Rng,
    threshold: ChaCha8Rng,
    chance_nodes: usize,
    infosets: [usize; 2],
}

impl SharedRandomness {
    pub fn new(tree: &Game, seed: u64) -> Self {
        Self {
            deal: stream_rng(seed, stream::DEAL),
            threshold: stream_rng(seed, stream::THRESHOLD),
            chance_nodes: tree.chance_node_count(),
            infosets: [tree.infosets(Player::One).len(), tree.infosets(Player::Two).len()],
        }
    }

    pub fn next_round(&mut self) -> Round {
        let chance = (0..self.chance_nodes).map(|_| self.deal.gen::<f64>()).collect();
        let thresholds = Player::BOTH.map(|p| (0..self.infosets[p.index()]).map(|_| self.threshold.gen::<f64>()).collect());
        Round { chance, thresholds }
    }
}

fn chance_outcome(outcomes: &[Outcome<f64>], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, o) in outcomes.iter().enumerate() {
        cumulative += o.prob;
        if cumulative > u {
            return i;
        }
    }
    outcomes.iter().rposition(|o| o.prob > 0.0).unwrap_or(outcomes.len() - 1)
}

/// Plays one hand with `round`'s randomness and returns the leaf reached.
pub fn play_hand(tree: &Game, round: &Round, strategies: [&Behavior; 2]) -> usize {
    tree.play_out(
        |index, outcomes| chance_outcome(outcomes, round.chance[index]),
        |player, infoset| strategies[player.index()].sample_with_threshold(infoset, round.thresholds[player.index()][infoset]),
    )
}

/// The member of player 1's equilibrium set that earns the most against
/// `y_star`, with its payoff. Rock-Paper-Scissors has the uniform strategy
/// as its only equilibrium.
pub fn best_nash(bundle: &GameBundle, y_star: &Plan) -> Result<(Plan, f64)> {
    match bundle.id {
        GameId::Kuhn => best_nash_kuhn(&bundle.game, y_star),
        GameId::Rps => {
            let x = bundle.game.uniform_plan(Player::One);
            if guaranteed_value(&bundle.game, &x)?.abs() > 1e-12 {
                return Err(Error::Equilibrium("uniform strategy is not an equilibrium".into()));
            }
            let v = bundle.game.expected_payoff(&x, y_star)?;
            Ok((x, v))
        }
    }
}

/// Draws the opponent of a match from the prior.
pub fn draw_opponent(bundle: &GameBundle, config: &MatchConfig, seed: u64) -> Result<Behavior> {
    let prior = DirichletPrior::symmetric(&bundle.game, Player::Two, config.alpha)?;
    Ok(prior.sample(&mut stream_rng(seed, stream::OPPONENT)))
}

enum Modeler {
    Fmap { solver: Fmap<f64>, log: ObservationLog<f64>, last: Option<Plan> },
    Sampled { posterior: SampledPosterior, rng: ChaCha8Rng },
}

/// Runs one algorithm against one opponent. `seed` is the opponent seed;
/// every algorithm given the same seed sees the same randomness.
pub fn run_match(
    bundle: &GameBundle,
    opponent: &Behavior,
    algorithm: ResponseKind,
    config: &MatchConfig,
    opponent_index: usize,
    seed: u64,
) -> Result<Vec<IterationRecord>> {
    run_match_observed(bundle, opponent, algorithm, config, opponent_index, seed, |_, _, _| {})
}

/// [`run_match`] calling `observe(t, round, leaf)` after every hand played.
#[allow(clippy::too_many_arguments)]
pub fn run_match_observed(
    bundle: &GameBundle,
    opponent: &Behavior,
    algorithm: ResponseKind,
    config: &MatchConfig,
    opponent_index: usize,
    seed: u64,
    mut observe: impl FnMut(usize, &Round, usize),
) -> Result<Vec<IterationRecord>> {
    let game = &bundle.game;
    let y_star = game.behavioral_to_realization(Player::Two, opponent)?;
    let record = |iteration, expected_payoff, model_l2| IterationRecord {
        algorithm,
        opponent: opponent_index,
        iteration,
        expected_payoff,
        model_l2,
    };

    let constant = match algorithm {
        ResponseKind::BestResponse => Some((best_response(game, Player::One, &y_star)?.1, Some(0.0))),
        ResponseKind::BestNash => Some((best_nash(bundle, &y_star)?.1, None)),
        _ => None,
    };
    if let Some((payoff, dist)) = constant {
        return Ok((1..=config.iterations).map(|t| record(t, payoff, dist)).collect());
    }

    let prior = DirichletPrior::symmetric(game, Player::Two, config.alpha)?;
    let mut modeler = if algorithm == ResponseKind::Fmap {
        Modeler::Fmap { solver: Fmap::new(game, prior, PgdConfig::default())?, log: ObservationLog::new(), last: None }
    } else {
        let posterior = SampledPosterior::from_prior(game, &prior, config.samples, &mut stream_rng(seed, stream::SAMPLES))?;
        Modeler::Sampled { posterior, rng: stream_rng(seed, stream::THOMPSON) }
    };
    let mut randomness = SharedRandomness::new(&bundle.tree, seed);
    let mut records = Vec::with_capacity(config.iterations);
    for t in 1..=config.iterations {
        let model = match &mut modeler {
            Modeler::Fmap { solver, log, last } => {
                let est = solver.estimate(log, last.as_ref())?.estimate;
                *last = Some(est.clone());
                est
            }
            Modeler::Sampled { posterior, rng } => posterior.model(algorithm, rng)?,
        };
        let (x, _) = best_response(game, Player::One, &model)?;
        let payoff = game.expected_payoff(&x, &y_star)?;
        records.push(record(t, payoff, Some(dist2(model.as_slice(), y_star.as_slice()))));

        let response = game.realization_to_behavioral(Player::One, &x)?;
        let round = randomness.next_round();
        let leaf = play_hand(&bundle.tree, &round, [&response, opponent]);
        observe(t, &round, leaf);
        match &mut modeler {
            Modeler::Fmap { log, .. } => {
                log.append_observation(game, &bundle.observability, Player::Two, leaf)?;
            }
            Modeler::Sampled { posterior, .. } => {
                let term = crate::bayes::observation_term(game, &bundle.observability, Player::Two, leaf)?;
                posterior.update_weights(&term);
            }
        }
    }
    Ok(records)
}

/// All records of an experiment, ordered by algorithm (in configuration
/// order), opponent and iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub config: MatchConfig,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub algorithm: ResponseKind,
    pub iteration: usize,
    pub mean_payoff: f64,
    pub mean_model_l2: Option<f64>,
}

/// Runs every configured algorithm against `config.opponents` prior-drawn
/// opponents on `jobs` threads (0 uses all cores). Results do not depend on
/// `jobs`.
pub fn run_experiment(config: &MatchConfig, jobs: usize) -> Result<ExperimentTable> {
    run_experiment_with_progress(config, jobs, &|_| {})
}

/// [`run_experiment`] calling `done(opponent)` as each opponent finishes.
pub fn run_experiment_with_progress(
    config: &MatchConfig,
    jobs: usize,
    done: &(dyn Fn(usize) + Sync),
) -> Result<ExperimentTable> {
    config.validate()?;
    let bundle = GameBundle::load(config.game)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let per_opponent: Vec<Vec<Vec<IterationRecord>>> = pool.install(|| {
        (0..config.opponents)
            .into_par_iter()
            .map(|o| {
                let seed = config.opponent_seed(o);
                let opponent = draw_opponent(&bundle, config, seed)?;
                let runs = config
                    .algorithms
                    .iter()
                    .map(|&a| {
                        run_match(&bundle, &opponent, a, config, o, seed)
                            .map_err(|e| e.context(format!("{a} against opponent {o}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                done(o);
                Ok(runs)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(config.algorithms.len() * config.opponents * config.iterations);
    for a in 0..config.algorithms.len() {
        for runs in &per_opponent {
            records.extend_from_slice(&runs[a]);
        }
    }
    Ok(ExperimentTable { config: config.clone(), records })
}

impl ExperimentTable {
    /// Per-iteration means across opponents, summed in opponent order.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let (n, iters) = (self.config.opponents, self.config.iterations);
        let mut rows = Vec::with_capacity(self.config.algorithms.len() * iters);
        for (a, chunk) in self.records.chunks(n * iters).enumerate() {
            for t in 0..iters {
                let mut payoff = 0.0;
                let mut dist = Some(0.0);
                for o in 0..n {
                    let r = &chunk[o * iters + t];
                    payoff += r.expected_payoff;
                    dist = dist.zip(r.model_l2).map(|(s, d)| s + d);
                }
                rows.push(AggregateRow {
                    algorithm: self.config.algorithms[a],
                    iteration: t + 1,
                    mean_payoff: payoff / n as f64,
                    mean_model_l2: dist.map(|d| d / n as f64),
                });
            }
        }
        rows
    }

    /// Mean payoff of `algorithm` at the last iteration.
    pub fn final_mean_payoff(&self, algorithm: ResponseKind) -> Option<f64> {
        self.mean_at(algorithm, self.config.iterations).map(|r| r.mean_payoff)
    }

    pub fn mean_at(&self, algorithm: ResponseKind, iteration: usize) -> Option<AggregateRow> {
        let a = self.config.algorithms.iter().position(|&k| k == algorithm)?;
        let (n, iters) = (self.config.opponents, self.config.iterations);
        if iteration == 0 || iteration > iters {
            return None;
        }
        let chunk = &self.records[a * n * iters..(a + 1) * n * iters];
        let rows: Vec<_> = (0..n).map(|o| chunk[o * iters + iteration - 1]).collect();
        let payoff = rows.iter().map(|r| r.expected_payoff).sum::<f64>() / n as f64;
        let dist = rows.iter().try_fold(0.0, |s, r| r.model_l2.map(|d| s + d)).map(|d| d / n as f64);
        Some(AggregateRow { algorithm, iteration, mean_payoff: payoff, mean_model_l2: dist })
    }

    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algo", "opponent", "iter", "expected_payoff", "model_l2"])?;
        for r in &self.records {
            w.write_record([
                r.algorithm.name().to_string(),
                r.opponent.to_string(),
                r.iteration.to_string(),
                r.expected_payoff.to_string(),
                optional(r.model_l2),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_aggregate_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algo", "iter", "mean_payoff", "mean_model_l2"])?;
        for r in self.aggregate() {
            w.write_record([
                r.algorithm.name().to_string(),
                r.iteration.to_string(),
                r.mean_payoff.to_string(),
                optional(r.mean_model_l2),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(|d| d.to_string()).unwrap_or_default()
}
