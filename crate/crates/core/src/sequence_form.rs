//! Sequence-form representation of a two-player game tree.
//!
//! Rows of the constraint matrices are information sets (plus an initial row
//! for the empty information set) and columns are sequences (plus the empty
//! sequence), so `E x = e` and `F y = f` constrain realization plans `x`, `y`
//! of player 1 and player 2.

use std::io::Write;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::game::{GameTree, Player};
use crate::linalg::{dot, Matrix};
use crate::scalar::{convert, Real, Scalar};

/// Label used for the empty sequence.
pub const EMPTY_SEQUENCE: &str = "∅";

/// Sequence bookkeeping for one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequences {
    labels: Vec<String>,
    infoset_labels: Vec<String>,
    infoset_parent: Vec<usize>,
    infoset_first: Vec<usize>,
    infoset_len: Vec<usize>,
    seq_infoset: Vec<Option<usize>>,
    // information sets ordered so that parents come first
    topo: Vec<usize>,
}

impl Sequences {
    /// Number of sequences including the empty one.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn infoset_count(&self) -> usize {
        self.infoset_parent.len()
    }

    pub fn infoset_label(&self, infoset: usize) -> &str {
        &self.infoset_labels[infoset]
    }

    /// Sequence leading to the information set.
    pub fn parent(&self, infoset: usize) -> usize {
        self.infoset_parent[infoset]
    }

    /// Sequences ending at the information set, in canonical action order.
    pub fn actions(&self, infoset: usize) -> std::ops::Range<usize> {
        let first = self.infoset_first[infoset];
        first..first + self.infoset_len[infoset]
    }

    /// Information set at which the sequence's last action is taken.
    pub fn infoset_of(&self, sequence: usize) -> Option<usize> {
        self.seq_infoset[sequence]
    }

    /// Information sets in an order where every parent sequence is set
    /// before its children.
    pub fn top_down(&self) -> &[usize] {
        &self.topo
    }

    /// Finds a sequence by label, ignoring whitespace.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        let key = squash(label);
        self.labels.iter().position(|l| squash(l) == key)
    }
}

/// Where a leaf lands in sequence space.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSequences<S> {
    pub sequences: [usize; 2],
    pub chance_prob: S,
}

/// The matrices `E`, `F`, vectors `e`, `f`, and payoff matrices `A`, `B` of a
/// two-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFormGame<S> {
    players: [Sequences; 2],
    constraints: [Matrix<S>; 2],
    rhs: [Vec<S>; 2],
    payoffs: [Matrix<S>; 2],
    leaves: Vec<LeafSequences<S>>,
    zero_sum: bool,
}

/// A sequence-form strategy: one realization weight per sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationPlan<S>(pub Vec<S>);

impl<S> RealizationPlan<S> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> Index<usize> for RealizationPlan<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

/// One distribution over actions per information set.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralStrategy<S> {
    probs: Vec<Vec<S>>,
}

impl<S: Scalar> BehavioralStrategy<S> {
    pub fn new(probs: Vec<Vec<S>>) -> Self {
        Self { probs }
    }

    pub fn infoset_count(&self) -> usize {
        self.probs.len()
    }

    pub fn at(&self, infoset: usize) -> &[S] {
        &self.probs[infoset]
    }

    pub fn distributions(&self) -> &[Vec<S>] {
        &self.probs
    }

    /// Checks shape against `seqs` and that every distribution is a
    /// probability vector within `tol`.
    pub fn validate(&self, seqs: &Sequences, tol: f64) -> Result<()> {
        if self.probs.len() < seqs.infoset_count() {
            return Err(Error::MissingInfoSet(self.probs.len()));
        }
        for i in 0..seqs.infoset_count() {
            let dist = &self.probs[i];
            if dist.len() != seqs.actions(i).len() {
                return Err(Error::BadDistribution {
                    infoset: i,
                    reason: format!("{} probabilities for {} actions", dist.len(), seqs.actions(i).len()),
                });
            }
            if dist.iter().any(|p| p.as_f64() < -tol) {
                return Err(Error::BadDistribution { infoset: i, reason: "negative probability".into() });
            }
            let total = dist.iter().fold(S::zero(), |acc, p| acc + p.clone());
            if (total.as_f64() - 1.0).abs() > tol {
                return Err(Error::BadDistribution { infoset: i, reason: format!("sums to {total}") });
            }
        }
        Ok(())
    }

    /// Action chosen by inverting the CDF at `threshold` in canonical order:
    /// the first action whose cumulative probability exceeds the threshold.
    pub fn sample_with_threshold(&self, infoset: usize, threshold: f64) -> usize {
        let dist = &self.probs[infoset];
        let mut cumulative = 0.0;
        for (a, p) in dist.iter().enumerate() {
            cumulative += p.as_f64();
            if cumulative > threshold {
                return a;
            }
        }
        // rounding left the total just below the threshold
        dist.iter().rposition(|p| p.as_f64() > 0.0).unwrap_or(dist.len() - 1)
    }
}

impl<S: Scalar> SequenceFormGame<S> {
    /// Builds the sequence form of a perfect-recall tree. `A[i][j]` sums
    /// player 1's payoff times the chance probability over all leaves whose
    /// last sequences are `i` and `j`.
    pub fn derive(tree: &GameTree<S>) -> Result<Self> {
        let parents = tree.check_perfect_recall()?;
        let players = [
            Self::sequences(tree, Player::One, &parents[0]),
            Self::sequences(tree, Player::Two, &parents[1]),
        ];
        let constraints = [Self::constraint_matrix(&players[0]), Self::constraint_matrix(&players[1])];
        let rhs = [Self::unit(players[0].infoset_count() + 1), Self::unit(players[1].infoset_count() + 1)];

        let (d1, d2) = (players[0].len(), players[1].len());
        let mut a: Matrix<S> = Matrix::zeros(d1, d2);
        let mut b: Matrix<S> = Matrix::zeros(d1, d2);
        let mut leaves = Vec::with_capacity(tree.leaves().len());
        for leaf in tree.leaves() {
            let [i, j] = leaf.sequences;
            a[(i, j)] = a[(i, j)].clone() + leaf.payoffs[0].clone() * leaf.chance_prob.clone();
            b[(i, j)] = b[(i, j)].clone() + leaf.payoffs[1].clone() * leaf.chance_prob.clone();
            leaves.push(LeafSequences { sequences: leaf.sequences, chance_prob: leaf.chance_prob.clone() });
        }
        Ok(Self { players, constraints, rhs, payoffs: [a, b], leaves, zero_sum: tree.is_zero_sum() })
    }

    fn sequences(tree: &GameTree<S>, player: Player, parents: &[usize]) -> Sequences {
        let infosets = tree.infosets(player);
        let mut labels = vec![EMPTY_SEQUENCE.to_string()];
        let mut seq_infoset = vec![None];
        let mut infoset_first = Vec::new();
        let mut infoset_len = Vec::new();
        for (i, info) in infosets.iter().enumerate() {
            infoset_first.push(labels.len());
            infoset_len.push(info.actions.len());
            for _ in &info.actions {
                labels.push(String::new());
                seq_infoset.push(Some(i));
            }
        }
        // labels are the parent label followed by the action; resolve in
        // depth order
        let depth = |mut i: usize| {
            let mut d = 0;
            while let Some(j) = seq_infoset[parents[i]] {
                i = j;
                d += 1;
            }
            d
        };
        let mut topo: Vec<usize> = (0..infosets.len()).collect();
        topo.sort_by_key(|&i| (depth(i), i));
        for &i in &topo {
            let parent = parents[i];
            for (a, action) in infosets[i].actions.iter().enumerate() {
                labels[infoset_first[i] + a] = if parent == 0 {
                    action.clone()
                } else {
                    format!("{} {}", labels[parent], action)
                };
            }
        }
        Sequences {
            labels,
            infoset_labels: infosets.iter().map(|i| i.label.clone()).collect(),
            infoset_parent: parents.to_vec(),
            infoset_first,
            infoset_len,
            seq_infoset,
            topo,
        }
    }

    fn constraint_matrix(seqs: &Sequences) -> Matrix<S> {
        let mut m = Matrix::zeros(seqs.infoset_count() + 1, seqs.len());
        m[(0, 0)] = S::one();
        for i in 0..seqs.infoset_count() {
            m[(i + 1, seqs.parent(i))] = -S::one();
            for s in seqs.actions(i) {
                m[(i + 1, s)] = S::one();
            }
        }
        m
    }

    fn unit(n: usize) -> Vec<S> {
        let mut v = vec![S::zero(); n];
        v[0] = S::one();
        v
    }

    pub fn sequences_of(&self, player: Player) -> &Sequences {
        &self.players[player.index()]
    }

    /// `E` for player 1, `F` for player 2.
    pub fn constraint(&self, player: Player) -> &Matrix<S> {
        &self.constraints[player.index()]
    }

    /// `e` for player 1, `f` for player 2.
    pub fn constraint_rhs(&self, player: Player) -> &[S] {
        &self.rhs[player.index()]
    }

    /// `A` for player 1, `B` for player 2; rows are always player 1's
    /// sequences.
    pub fn payoff_matrix(&self, player: Player) -> &Matrix<S> {
        &self.payoffs[player.index()]
    }

    pub fn leaves(&self) -> &[LeafSequences<S>] {
        &self.leaves
    }

    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SequenceFormGame<T> {
        SequenceFormGame {
            players: self.players.clone(),
            constraints: [self.constraints[0].map(&f), self.constraints[1].map(&f)],
            rhs: [self.rhs[0].iter().map(&f).collect(), self.rhs[1].iter().map(&f).collect()],
            payoffs: [self.payoffs[0].map(&f), self.payoffs[1].map(&f)],
            leaves: self
                .leaves
                .iter()
                .map(|l| LeafSequences { sequences: l.sequences, chance_prob: f(&l.chance_prob) })
                .collect(),
            zero_sum: self.zero_sum,
        }
    }

    /// Floating-point copy of the game.
    pub fn to_real<T: Real + Scalar>(&self) -> SequenceFormGame<T> {
        self.map_scalar(convert::<S, T>)
    }

    /// Largest absolute violation of the realization constraints, including
    /// negativity.
    pub fn constraint_residual(&self, player: Player, plan: &RealizationPlan<S>) -> Result<f64> {
        self.check_len(player, plan)?;
        let lhs = self.constraint(player).mul_vec(plan.as_slice());
        let eq = lhs
            .iter()
            .zip(self.constraint_rhs(player))
            .map(|(l, r)| (l.clone() - r.clone()).as_f64().abs())
            .fold(0.0, f64::max);
        let neg = plan.0.iter().map(|v| -v.as_f64()).fold(0.0, f64::max);
        Ok(eq.max(neg))
    }

    fn check_len(&self, player: Player, plan: &RealizationPlan<S>) -> Result<()> {
        let expected = self.sequences_of(player).len();
        if plan.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: plan.len() });
        }
        Ok(())
    }

    /// Realization weight of a sequence is the product of the behavioral
    /// probabilities along it.
    pub fn behavioral_to_realization(
        &self,
        player: Player,
        strategy: &BehavioralStrategy<S>,
    ) -> Result<RealizationPlan<S>> {
        let seqs = self.sequences_of(player);
        if strategy.infoset_count() < seqs.infoset_count() {
            return Err(Error::MissingInfoSet(strategy.infoset_count()));
        }
        let mut y = vec![S::zero(); seqs.len()];
        y[0] = S::one();
        for &i in seqs.top_down() {
            let dist = strategy.at(i);
            if dist.len() != seqs.actions(i).len() {
                return Err(Error::BadDistribution {
                    infoset: i,
                    reason: format!("{} probabilities for {} actions", dist.len(), seqs.actions(i).len()),
                });
            }
            let parent = y[seqs.parent(i)].clone();
            for (s, p) in seqs.actions(i).zip(dist) {
                y[s] = parent.clone() * p.clone();
            }
        }
        Ok(RealizationPlan(y))
    }

    /// Behavioral probability of an action is its sequence weight over the
    /// parent weight; information sets the plan never reaches get the uniform
    /// distribution.
    pub fn realization_to_behavioral(
        &self,
        player: Player,
        plan: &RealizationPlan<S>,
    ) -> Result<BehavioralStrategy<S>> {
        let residual = self.constraint_residual(player, plan)?;
        if residual > 1e-9 {
            return Err(Error::InfeasiblePlan { residual });
        }
        let seqs = self.sequences_of(player);
        let probs = (0..seqs.infoset_count())
            .map(|i| {
                let parent = plan[seqs.parent(i)].clone();
                let n = seqs.actions(i).len();
                if parent <= S::zero() {
                    vec![S::one() / S::from_usize(n).expect("action count"); n]
                } else {
                    seqs.actions(i).map(|s| plan[s].clone() / parent.clone()).collect()
                }
            })
            .collect();
        Ok(BehavioralStrategy::new(probs))
    }

    pub fn uniform_behavioral(&self, player: Player) -> BehavioralStrategy<S> {
        let seqs = self.sequences_of(player);
        BehavioralStrategy::new(
            (0..seqs.infoset_count())
                .map(|i| {
                    let n = seqs.actions(i).len();
                    vec![S::one() / S::from_usize(n).expect("action count"); n]
                })
                .collect(),
        )
    }

    pub fn uniform_plan(&self, player: Player) -> RealizationPlan<S> {
        self.behavioral_to_realization(player, &self.uniform_behavioral(player))
            .expect("uniform strategy covers every information set")
    }

    /// Player 1's expected payoff `xᵀ A y`.
    pub fn expected_payoff(&self, x: &RealizationPlan<S>, y: &RealizationPlan<S>) -> Result<S> {
        self.payoff_to(Player::One, x, y)
    }

    /// `xᵀ A y` or `xᵀ B y`.
    pub fn payoff_to(&self, player: Player, x: &RealizationPlan<S>, y: &RealizationPlan<S>) -> Result<S> {
        self.check_len(Player::One, x)?;
        self.check_len(Player::Two, y)?;
        let ay = self.payoff_matrix(player).mul_vec(y.as_slice());
        Ok(dot(x.as_slice(), &ay))
    }

    /// Writes a matrix as CSV with sequence labels as the header row and
    /// row labels in the first column.
    pub fn write_csv<W: Write>(&self, which: SequenceMatrix, out: W) -> Result<()> {
        let (matrix, row_labels, col_labels): (&Matrix<S>, Vec<String>, &[String]) = match which {
            SequenceMatrix::E | SequenceMatrix::F => {
                let player = if which == SequenceMatrix::E { Player::One } else { Player::Two };
                let seqs = self.sequences_of(player);
                let mut rows = vec![EMPTY_SEQUENCE.to_string()];
                rows.extend((0..seqs.infoset_count()).map(|i| seqs.infoset_label(i).to_string()));
                (self.constraint(player), rows, seqs.labels())
            }
            SequenceMatrix::A | SequenceMatrix::B => {
                let player = if which == SequenceMatrix::A { Player::One } else { Player::Two };
                (
                    self.payoff_matrix(player),
                    self.sequences_of(Player::One).labels().to_vec(),
                    self.sequences_of(Player::Two).labels(),
                )
            }
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(col_labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(matrix.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMatrix {
    E,
    F,
    A,
    B,
}
