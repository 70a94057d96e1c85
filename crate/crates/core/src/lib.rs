//! Bayesian opponent modeling for static opponents in two-player
//! imperfect-information games.
//!
//! The crate is organized bottom-up:
//!
//! - [`game`]: extensive-form trees with chance, information sets and
//!   per-player observability functions, plus exact builders for Kuhn poker
//!   and Rock-Paper-Scissors.
//! - [`sequence_form`]: the `E`, `F`, `e`, `f`, `A`, `B` representation,
//!   behavioral/realization conversions and expected payoffs.
//! - [`bayes`]: Dirichlet priors, the compressed observation log and the
//!   negative log posterior over the opponent's realization plan.
//! - [`fmap`]: projected gradient descent with Armijo backtracking over the
//!   sequence-form polytope (full MAP estimation).
//! - [`baselines`]: sampled posteriors (BBR, MAP, Thompson), expectimax best
//!   responses and the Kuhn equilibrium family.
//! - [`sim`]: the repeated-game harness with common random numbers.
//!
//! Game and sequence-form types are generic over a [`Scalar`]; the solver
//! side is generic over a [`Real`]. Concrete aliases for the usual choices
//! live at the crate root.

pub mod baselines;
pub mod bayes;
mod error;
pub mod fmap;
pub mod game;
mod linalg;
mod scalar;
pub mod sequence_form;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::{ratio, Real, Scalar};

pub use game::{GameTree, Observability, Player};
pub use sequence_form::{BehavioralStrategy, RealizationPlan, SequenceFormGame};

/// Exact rational scalar used for table-exact game construction.
pub type Rational = num_rational::Rational64;

/// Floating-point game tree.
pub type Game = GameTree<f64>;
/// Game tree with exact rational chance probabilities and payoffs.
pub type ExactGame = GameTree<Rational>;
/// Floating-point sequence-form game.
pub type SeqGame = SequenceFormGame<f64>;
/// Sequence-form game with exact rational matrices.
pub type ExactSeqGame = SequenceFormGame<Rational>;
/// Realization plan over `f64`.
pub type Plan = RealizationPlan<f64>;
/// Behavioral strategy over `f64`.
pub type Behavior = BehavioralStrategy<f64>;
