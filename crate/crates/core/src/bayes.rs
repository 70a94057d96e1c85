//! Dirichlet priors over behavioral strategies, the compressed log of
//! observations, and the negative log posterior over realization plans.
//!
//! With per-sequence prior exponents `α_i` and one likelihood term
//! `Σ_j q_j y_j` per observed hand, the minimized objective is
//!
//! ```text
//! f(y) = -Σ_i (α_i - 1) log y_i - Σ_t log(Σ_{j ∈ o(ℓ_t)} q_j y_j)
//! ```
//!
//! where `q_j` is the chance probability of candidate `j` normalized over the
//! observation set. The observer's own reach probability is the same for
//! every candidate and drops out.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::game::{Observability, Player};
use crate::scalar::{convert, Real, Scalar};
use crate::sequence_form::{BehavioralStrategy, SequenceFormGame, Sequences};

/// Independent Dirichlet distributions, one per information set of the
/// modeled player.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPrior<T> {
    player: Player,
    alphas: Vec<Vec<T>>,
    // exponent of each sequence: the alpha of its last action (1 for the
    // empty sequence, which then contributes nothing)
    exponents: Vec<T>,
}

impl<T: Real> DirichletPrior<T> {
    /// The same concentration `alpha` for every action.
    pub fn symmetric<S: Scalar>(game: &SequenceFormGame<S>, player: Player, alpha: T) -> Result<Self> {
        let seqs = game.sequences_of(player);
        let alphas = (0..seqs.infoset_count()).map(|i| vec![alpha; seqs.actions(i).len()]).collect();
        Self::new(seqs, player, alphas)
    }

    pub fn new(seqs: &Sequences, player: Player, alphas: Vec<Vec<T>>) -> Result<Self> {
        if alphas.len() != seqs.infoset_count() {
            return Err(Error::InvalidPrior(format!(
                "{} information sets, {} concentration vectors",
                seqs.infoset_count(),
                alphas.len()
            )));
        }
        let mut exponents = vec![T::one(); seqs.len()];
        for (i, a) in alphas.iter().enumerate() {
            if a.len() != seqs.actions(i).len() {
                return Err(Error::InvalidPrior(format!("wrong action count at information set {i}")));
            }
            if a.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidPrior(format!("non-positive concentration at information set {i}")));
            }
            for (s, &v) in seqs.actions(i).zip(a) {
                exponents[s] = v;
            }
        }
        Ok(Self { player, alphas, exponents })
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn alphas(&self) -> &[Vec<T>] {
        &self.alphas
    }

    /// Per-sequence exponents `α_i`, indexed like a realization plan.
    pub fn exponents(&self) -> &[T] {
        &self.exponents
    }

    /// Fails unless every `α_i ≥ 1`, the condition for a log-concave
    /// posterior.
    pub fn check_log_concave(&self) -> Result<()> {
        match self.exponents.iter().position(|&a| a < T::one()) {
            Some(s) => Err(Error::NonConcavePrior { sequence: s, alpha: self.exponents[s].to_f64().unwrap_or(f64::NAN) }),
            None => Ok(()),
        }
    }

    /// Draws a behavioral strategy: per information set, normalized
    /// Gamma(α, 1) variates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BehavioralStrategy<T> {
        let probs = self
            .alphas
            .iter()
            .map(|alphas| {
                let draws: Vec<f64> = alphas
                    .iter()
                    .map(|a| {
                        Gamma::new(a.to_f64().expect("finite alpha"), 1.0)
                            .expect("positive alpha")
                            .sample(rng)
                    })
                    .collect();
                let total: f64 = draws.iter().sum();
                if total > 0.0 {
                    draws.iter().map(|d| T::lit(d / total)).collect()
                } else {
                    vec![T::lit(1.0 / draws.len() as f64); draws.len()]
                }
            })
            .collect();
        BehavioralStrategy::new(probs)
    }
}

/// Samples an opponent strategy from the prior.
pub fn sample_opponent<T: Real, R: Rng + ?Sized>(prior: &DirichletPrior<T>, rng: &mut R) -> BehavioralStrategy<T> {
    prior.sample(rng)
}

/// One observed hand: the candidate sequences of the modeled player and
/// their normalized chance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTerm<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Real> LikelihoodTerm<T> {
    /// Merges repeated sequences and normalizes the weights to sum to one.
    pub fn from_weights(weights: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for (j, w) in weights {
            if !(w > T::zero()) {
                return Err(Error::InvalidGame(format!("non-positive candidate weight for sequence {j}")));
            }
            let slot = merged.entry(j).or_insert_with(T::zero);
            *slot = *slot + w;
        }
        if merged.is_empty() {
            return Err(Error::InvalidGame("empty observation".into()));
        }
        let total = merged.values().fold(T::zero(), |acc, &w| acc + w);
        Ok(Self { entries: merged.into_iter().map(|(j, w)| (j, w / total)).collect() })
    }

    /// A fully observed sequence.
    pub fn singleton(sequence: usize) -> Self {
        Self { entries: vec![(sequence, T::one())] }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    /// `Σ_j q_j y_j`.
    pub fn likelihood(&self, y: &[T]) -> T {
        self.entries.iter().fold(T::zero(), |acc, &(j, q)| acc + q * y[j])
    }

    fn key(&self) -> Vec<(usize, u64)> {
        self.entries
            .iter()
            .map(|&(j, q)| (j, q.to_f64().unwrap_or(f64::NAN).to_bits()))
            .collect()
    }
}

/// Builds the likelihood term for a hand ending at `leaf`, as seen by the
/// opponent of `modeled`.
pub fn observation_term<S: Scalar, T: Real>(
    game: &SequenceFormGame<S>,
    obs: &Observability,
    modeled: Player,
    leaf: usize,
) -> Result<LikelihoodTerm<T>> {
    let observer = modeled.opponent();
    let candidates = obs.observe(observer, leaf)?;
    let weights = candidates
        .iter()
        .map(|&c| {
            let l = game.leaves().get(c).ok_or_else(|| Error::UnknownLeaf(c.to_string()))?;
            Ok((l.sequences[modeled.index()], convert::<S, T>(&l.chance_prob)))
        })
        .collect::<Result<Vec<_>>>()?;
    LikelihoodTerm::from_weights(weights)
}

/// Multiset of likelihood terms. Identical observations share one entry with
/// a multiplicity, so evaluation cost grows with the number of distinct
/// observations rather than with the number of hands played.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationLog<T> {
    terms: BTreeMap<Vec<(usize, u64)>, (LikelihoodTerm<T>, u64)>,
    total: u64,
}

impl<T: Real> Default for ObservationLog<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ObservationLog<T> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new(), total: 0 }
    }

    /// Records the hand ending at `leaf` and returns its term.
    pub fn append_observation<S: Scalar>(
        &mut self,
        game: &SequenceFormGame<S>,
        obs: &Observability,
        modeled: Player,
        leaf: usize,
    ) -> Result<LikelihoodTerm<T>> {
        let term = observation_term(game, obs, modeled, leaf)?;
        self.add(term.clone(), 1);
        Ok(term)
    }

    pub fn add(&mut self, term: LikelihoodTerm<T>, multiplicity: u64) {
        if multiplicity == 0 {
            return;
        }
        let entry = self.terms.entry(term.key()).or_insert((term, 0));
        entry.1 += multiplicity;
        self.total += multiplicity;
    }

    /// Number of hands recorded.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Distinct terms with their multiplicities.
    pub fn terms(&self) -> impl Iterator<Item = (&LikelihoodTerm<T>, u64)> {
        self.terms.values().map(|(t, c)| (t, *c))
    }
}

fn check_dims<T: Real>(y: &[T], prior: &DirichletPrior<T>) -> Result<()> {
    if y.len() != prior.exponents().len() {
        return Err(Error::DimensionMismatch { expected: prior.exponents().len(), got: y.len() });
    }
    Ok(())
}

fn count<T: Real>(c: u64) -> T {
    T::from_u64(c).expect("multiplicity fits the scalar")
}

/// Negative log posterior (up to an additive constant).
pub fn neg_log_posterior<T: Real>(y: &[T], prior: &DirichletPrior<T>, log: &ObservationLog<T>) -> Result<T> {
    check_dims(y, prior)?;
    let mut value = T::zero();
    for (i, (&yi, &alpha)) in y.iter().zip(prior.exponents()).enumerate() {
        if alpha == T::one() {
            continue;
        }
        if !(yi > T::zero()) {
            return Err(Error::Domain(i));
        }
        value = value - (alpha - T::one()) * yi.ln();
    }
    for (term, c) in log.terms() {
        let l = term.likelihood(y);
        if !(l > T::zero()) {
            return Err(Error::Domain(term.entries()[0].0));
        }
        value = value - count::<T>(c) * l.ln();
    }
    Ok(value)
}

/// Analytic gradient of [`neg_log_posterior`]:
/// `(1 - α_i) / y_i - Σ_t q_i / (Σ_j q_j y_j)`.
pub fn gradient<T: Real>(y: &[T], prior: &DirichletPrior<T>, log: &ObservationLog<T>) -> Result<Vec<T>> {
    check_dims(y, prior)?;
    let mut grad = vec![T::zero(); y.len()];
    for (i, (&yi, &alpha)) in y.iter().zip(prior.exponents()).enumerate() {
        if alpha == T::one() {
            continue;
        }
        if !(yi > T::zero()) {
            return Err(Error::Domain(i));
        }
        grad[i] = (T::one() - alpha) / yi;
    }
    for (term, c) in log.terms() {
        let l = term.likelihood(y);
        if !(l > T::zero()) {
            return Err(Error::Domain(term.entries()[0].0));
        }
        let scale = count::<T>(c) / l;
        for &(j, q) in term.entries() {
            grad[j] = grad[j] - scale * q;
        }
    }
    Ok(grad)
}
