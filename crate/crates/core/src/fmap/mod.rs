//! Full maximum-a-posteriori (FMAP) estimation of the opponent's realization
//! plan: projected gradient descent on the negative log posterior with
//! Armijo backtracking.

mod dykstra;
mod projection;

use std::io::Write;

pub use dykstra::{dykstra_project, DykstraConfig};
pub use projection::{kkt_residual, project, Projector};

use crate::bayes::{gradient, neg_log_posterior, DirichletPrior, ObservationLog};
use crate::error::{Error, Result};
use crate::game::Player;
use crate::linalg::dist2;
use crate::scalar::{convert, Real, Scalar};
use crate::sequence_form::{RealizationPlan, SequenceFormGame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdConfig<T> {
    /// Initial step size tried at every iteration.
    pub initial_step: T,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_c: T,
    /// Step shrink factor.
    pub backtrack: T,
    /// Give up when the step falls below this.
    pub min_step: T,
    /// Stop when consecutive iterates are closer than this (Euclidean).
    pub tolerance: T,
    pub max_iterations: usize,
    /// Lower bound imposed on every sequence weight.
    pub floor: T,
}

impl<T: Real> Default for PgdConfig<T> {
    fn default() -> Self {
        Self {
            initial_step: T::one(),
            armijo_c: T::lit(1e-4),
            backtrack: T::lit(0.5),
            min_step: T::lit(1e-16),
            tolerance: T::lit(1e-7),
            max_iterations: 1000,
            floor: T::lit(1e-6),
        }
    }
}

impl<T: Real> PgdConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if !unit(self.armijo_c) || !unit(self.backtrack) {
            return Err(Error::Config("Armijo constant and backtracking factor must lie in (0, 1)".into()));
        }
        if !(self.floor > T::zero() && self.tolerance > T::zero() && self.initial_step > T::zero()) {
            return Err(Error::Config("floor, tolerance and initial step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    StepSafeguard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult<T> {
    pub estimate: RealizationPlan<T>,
    pub objective: T,
    pub iterations: usize,
    pub termination: Termination,
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub objective: T,
    pub step: T,
}

/// FMAP estimator bound to one game, modeled player and prior.
#[derive(Debug, Clone)]
pub struct Fmap<T> {
    projector: Projector<T>,
    prior: DirichletPrior<T>,
    config: PgdConfig<T>,
    start: Vec<T>,
}

impl<T: Real> Fmap<T> {
    pub fn new<S: Scalar>(game: &SequenceFormGame<S>, prior: DirichletPrior<T>, config: PgdConfig<T>) -> Result<Self> {
        config.validate()?;
        prior.check_log_concave()?;
        let player = prior.player();
        let f = game.constraint(player).map(convert::<S, T>);
        let rhs: Vec<T> = game.constraint_rhs(player).iter().map(convert::<S, T>).collect();
        let projector = Projector::new(&f, &rhs, config.floor)?;
        // cold start: the uniform behavioral strategy, lifted onto the floor
        // if the tree is deep enough to need it
        let uniform: Vec<T> = game.uniform_plan(player).as_slice().iter().map(convert::<S, T>).collect();
        let start = if projector.infeasibility(&uniform) > T::zero() {
            projector.project(&uniform)?
        } else {
            uniform
        };
        Ok(Self { projector, prior, config, start })
    }

    pub fn player(&self) -> Player {
        self.prior.player()
    }

    pub fn prior(&self) -> &DirichletPrior<T> {
        &self.prior
    }

    pub fn config(&self) -> &PgdConfig<T> {
        &self.config
    }

    pub fn projector(&self) -> &Projector<T> {
        &self.projector
    }

    pub fn estimate(&self, log: &ObservationLog<T>, warm_start: Option<&RealizationPlan<T>>) -> Result<SolverResult<T>> {
        self.run(log, warm_start, None)
    }

    pub fn estimate_traced(
        &self,
        log: &ObservationLog<T>,
        warm_start: Option<&RealizationPlan<T>>,
    ) -> Result<(SolverResult<T>, Vec<TraceRow<T>>)> {
        let mut trace = Vec::new();
        let result = self.run(log, warm_start, Some(&mut trace))?;
        Ok((result, trace))
    }

    fn run(
        &self,
        log: &ObservationLog<T>,
        warm_start: Option<&RealizationPlan<T>>,
        mut trace: Option<&mut Vec<TraceRow<T>>>,
    ) -> Result<SolverResult<T>> {
        let cfg = &self.config;
        let mut y = match warm_start {
            Some(w) => {
                if w.len() != self.projector.dim() {
                    return Err(Error::DimensionMismatch { expected: self.projector.dim(), got: w.len() });
                }
                let bad = self.projector.infeasibility(w.as_slice());
                let eq_ok = bad <= T::lit(1e-8);
                let floor_ok = w.as_slice().iter().all(|&v| v >= cfg.floor - T::lit(1e-10));
                if !(eq_ok && floor_ok) {
                    return Err(Error::InfeasiblePlan { residual: bad.to_f64().unwrap_or(f64::NAN) });
                }
                w.as_slice().to_vec()
            }
            None => self.start.clone(),
        };
        let mut value = neg_log_posterior(&y, &self.prior, log)?;
        let mut grad = gradient(&y, &self.prior, log)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow { iteration: 0, objective: value, step: T::zero() });
        }
        let done = |y: Vec<T>, objective, iterations, termination| SolverResult {
            estimate: RealizationPlan(y),
            objective,
            iterations,
            termination,
        };

        let grad_norm = grad.iter().fold(T::zero(), |acc, &g| acc.max(g.abs()));
        if grad_norm < T::lit(1e-14) {
            return Ok(done(y, value, 0, Termination::Converged));
        }

        for k in 0..cfg.max_iterations {
            let mut step = cfg.initial_step;
            let (next, next_value) = loop {
                let z: Vec<T> = y.iter().zip(&grad).map(|(&v, &g)| v - step * g).collect();
                let candidate = self.projector.project_from(&z, &y)?;
                let decrease = grad
                    .iter()
                    .zip(candidate.iter().zip(&y))
                    .fold(T::zero(), |acc, (&g, (&c, &v))| acc + g * (c - v));
                let candidate_value = neg_log_posterior(&candidate, &self.prior, log)?;
                if candidate_value <= value + cfg.armijo_c * decrease {
                    break (candidate, candidate_value);
                }
                step = step * cfg.backtrack;
                if step < cfg.min_step {
                    return Ok(done(y, value, k, Termination::StepSafeguard));
                }
            };
            debug_assert!(next_value <= value + T::lit(1e-12));
            let moved = dist2(&next, &y);
            // a roundoff-sized move means y is already stationary; keep it
            // exactly so ties downstream are decided by y, not by noise
            if moved < T::lit(1e-12) {
                return Ok(done(y, value, k, Termination::Converged));
            }
            y = next;
            value = next_value;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceRow { iteration: k + 1, objective: value, step });
            }
            if moved < cfg.tolerance {
                return Ok(done(y, value, k + 1, Termination::Converged));
            }
            grad = gradient(&y, &self.prior, log)?;
        }
        Ok(done(y, value, cfg.max_iterations, Termination::MaxIterations))
    }
}

/// One-shot FMAP estimate; see [`Fmap`].
pub fn estimate<S: Scalar, T: Real>(
    game: &SequenceFormGame<S>,
    prior: &DirichletPrior<T>,
    log: &ObservationLog<T>,
    warm_start: Option<&RealizationPlan<T>>,
    config: PgdConfig<T>,
) -> Result<SolverResult<T>> {
    Fmap::new(game, prior.clone(), config)?.estimate(log, warm_start)
}

/// Writes a solver trace as `iteration,objective,step` CSV.
pub fn write_trace_csv<T: Real, W: Write>(trace: &[TraceRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective", "step"])?;
    for row in trace {
        w.write_record([row.iteration.to_string(), row.objective.to_string(), row.step.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::LikelihoodTerm;
    use crate::game::{kuhn, rps};

    #[test]
    fn prior_mode_is_uniform() {
        for tree in [rps::<f64>().0, kuhn::<f64>().0] {
            let g = SequenceFormGame::derive(&tree).unwrap();
            let prior = DirichletPrior::symmetric(&g, Player::Two, 2.0).unwrap();
            let res = estimate(&g, &prior, &ObservationLog::new(), None, PgdConfig::default()).unwrap();
            let uniform = g.uniform_plan(Player::Two);
            assert!(dist2(res.estimate.as_slice(), uniform.as_slice()) < 1e-6);
            assert_eq!(res.termination, Termination::Converged);
        }
    }

    #[test]
    fn rps_counts_give_dirichlet_mode() {
        let g = SequenceFormGame::derive(&rps::<f64>().0).unwrap();
        let prior = DirichletPrior::symmetric(&g, Player::Two, 2.0).unwrap();
        let mut log = ObservationLog::new();
        log.add(LikelihoodTerm::singleton(1), 998);
        log.add(LikelihoodTerm::singleton(2), 1);
        log.add(LikelihoodTerm::singleton(3), 1);
        let res = estimate(&g, &prior, &log, None, PgdConfig::default()).unwrap();
        let expect: [f64; 3] = [999.0 / 1003.0, 2.0 / 1003.0, 2.0 / 1003.0];
        for (got, want) in res.estimate.as_slice()[1..].iter().zip(expect) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_sub_unit_alpha_and_bad_warm_start() {
        let g = SequenceFormGame::derive(&rps::<f64>().0).unwrap();
        let prior = DirichletPrior::symmetric(&g, Player::Two, 0.9).unwrap();
        assert!(matches!(
            estimate(&g, &prior, &ObservationLog::new(), None, PgdConfig::default()),
            Err(Error::NonConcavePrior { .. })
        ));
        let prior = DirichletPrior::symmetric(&g, Player::Two, 2.0).unwrap();
        let warm = RealizationPlan(vec![1.0, 0.5, 0.5, 0.5]);
        assert!(matches!(
            estimate(&g, &prior, &ObservationLog::new(), Some(&warm), PgdConfig::default()),
            Err(Error::InfeasiblePlan { .. })
        ));
    }

    #[test]
    fn flat_prior_without_data_returns_immediately() {
        let g = SequenceFormGame::derive(&rps::<f64>().0).unwrap();
        let prior = DirichletPrior::symmetric(&g, Player::Two, 1.0).unwrap();
        let res = estimate(&g, &prior, &ObservationLog::new(), None, PgdConfig::default()).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.termination, Termination::Converged);
    }

    #[test]
    fn trace_is_monotone() {
        let g = SequenceFormGame::derive(&kuhn::<f64>().0).unwrap();
        let prior = DirichletPrior::symmetric(&g, Player::Two, 2.0).unwrap();
        let mut log = ObservationLog::new();
        log.add(LikelihoodTerm::from_weights([(2, 0.5), (6, 0.5)]).unwrap(), 40);
        log.add(LikelihoodTerm::singleton(1), 3);
        let fmap = Fmap::new(&g, prior, PgdConfig::default()).unwrap();
        let (res, trace) = fmap.estimate_traced(&log, None).unwrap();
        assert_eq!(trace.len(), res.iterations + 1);
        for w in trace.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("iteration,objective,step\n"));
    }
}
