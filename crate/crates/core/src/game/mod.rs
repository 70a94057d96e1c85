//! Two-player extensive-form games with chance moves, information sets and
//! observability functions.
//!
//! Trees are assembled bottom-up with [`TreeBuilder`] and are immutable once
//! built. Leaves are numbered in depth-first order and carry a label made of
//! the non-chance action labels along their trajectory (`"Ch_K b_Q F_K"`).

mod kuhn;
mod rps;

use std::fmt;

pub use kuhn::{kuhn, KUHN_CARDS};
pub use rps::rps;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.index() + 1)
    }
}

pub type NodeId = usize;

/// An information set: its label and the ordered action labels shared by
/// every node it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoSet {
    pub label: String,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Outcome<S> {
    pub label: String,
    pub prob: S,
    pub child: NodeId,
}

#[derive(Debug, Clone)]
pub enum Node<S> {
    /// `index` numbers chance nodes in depth-first order.
    Chance { index: usize, outcomes: Vec<Outcome<S>> },
    Decision { player: Player, infoset: usize, children: Vec<NodeId> },
    Terminal { leaf: usize },
}

#[derive(Debug, Clone)]
pub struct Leaf<S> {
    pub label: String,
    /// Payoff to player 1 and player 2.
    pub payoffs: [S; 2],
    /// Product of chance probabilities along the trajectory.
    pub chance_prob: S,
    /// Last own sequence of each player (0 is the empty sequence).
    pub sequences: [usize; 2],
    pub node: NodeId,
}

#[derive(Debug, Clone)]
pub struct GameTree<S> {
    nodes: Vec<Node<S>>,
    root: NodeId,
    infosets: [Vec<InfoSet>; 2],
    seq_offsets: [Vec<usize>; 2],
    leaves: Vec<Leaf<S>>,
    chance_count: usize,
    zero_sum: bool,
}

impl<S: Scalar> GameTree<S> {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node<S> {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> &[Leaf<S>] {
        &self.leaves
    }

    pub fn leaf(&self, id: usize) -> Result<&Leaf<S>> {
        self.leaves.get(id).ok_or_else(|| Error::UnknownLeaf(id.to_string()))
    }

    pub fn infosets(&self, player: Player) -> &[InfoSet] {
        &self.infosets[player.index()]
    }

    pub fn chance_node_count(&self) -> usize {
        self.chance_count
    }

    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    /// Number of sequences of `player`, including the empty sequence.
    pub fn sequence_count(&self, player: Player) -> usize {
        1 + self.infosets(player).iter().map(|i| i.actions.len()).sum::<usize>()
    }

    /// Index of the sequence ending with `action` at `infoset`.
    pub fn sequence(&self, player: Player, infoset: usize, action: usize) -> usize {
        self.seq_offsets[player.index()][infoset] + action
    }

    /// Looks a leaf up by label; whitespace is ignored, so `"B_Kca_Q"` and
    /// `"B_K ca_Q"` name the same leaf.
    pub fn leaf_by_label(&self, label: &str) -> Result<usize> {
        let key = squash(label);
        self.leaves
            .iter()
            .position(|l| squash(&l.label) == key)
            .ok_or_else(|| Error::UnknownLeaf(label.to_string()))
    }

    /// Verifies perfect recall in the sequence sense (all nodes of an
    /// information set are reached by the same own sequence) and returns the
    /// parent sequence of every information set of each player.
    pub fn check_perfect_recall(&self) -> Result<[Vec<usize>; 2]> {
        let mut parents: [Vec<Option<usize>>; 2] =
            [vec![None; self.infosets[0].len()], vec![None; self.infosets[1].len()]];
        let mut stack = vec![(self.root, [0usize; 2])];
        while let Some((id, seqs)) = stack.pop() {
            match &self.nodes[id] {
                Node::Chance { outcomes, .. } => {
                    stack.extend(outcomes.iter().map(|o| (o.child, seqs)));
                }
                Node::Decision { player, infoset, children } => {
                    let p = player.index();
                    let own = seqs[p];
                    match parents[p][*infoset] {
                        None => parents[p][*infoset] = Some(own),
                        Some(prev) if prev != own => {
                            return Err(Error::ImperfectRecall { player: *player, infoset: *infoset });
                        }
                        Some(_) => {}
                    }
                    for (a, &child) in children.iter().enumerate() {
                        let mut next = seqs;
                        next[p] = self.sequence(*player, *infoset, a);
                        stack.push((child, next));
                    }
                }
                Node::Terminal { .. } => {}
            }
        }
        let collect = |p: usize| -> Result<Vec<usize>> {
            parents[p]
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    s.ok_or_else(|| {
                        Error::InvalidGame(format!(
                            "information set `{}` of {} contains no node",
                            self.infosets[p][i].label,
                            Player::BOTH[p]
                        ))
                    })
                })
                .collect()
        };
        Ok([collect(0)?, collect(1)?])
    }

    /// Plays the game from the root. `chance` picks an outcome index at each
    /// chance node (given its depth-first index and outcomes); `act` picks an
    /// action index for a player at an information set. Returns the leaf.
    pub fn play_out(
        &self,
        mut chance: impl FnMut(usize, &[Outcome<S>]) -> usize,
        mut act: impl FnMut(Player, usize) -> usize,
    ) -> usize {
        let mut id = self.root;
        loop {
            match &self.nodes[id] {
                Node::Chance { index, outcomes } => id = outcomes[chance(*index, outcomes)].child,
                Node::Decision { player, infoset, children } => id = children[act(*player, *infoset)],
                Node::Terminal { leaf } => return *leaf,
            }
        }
    }

    /// Converts every scalar in the tree.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GameTree<T> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Chance { index, outcomes } => Node::Chance {
                    index: *index,
                    outcomes: outcomes
                        .iter()
                        .map(|o| Outcome { label: o.label.clone(), prob: f(&o.prob), child: o.child })
                        .collect(),
                },
                Node::Decision { player, infoset, children } => {
                    Node::Decision { player: *player, infoset: *infoset, children: children.clone() }
                }
                Node::Terminal { leaf } => Node::Terminal { leaf: *leaf },
            })
            .collect();
        let leaves = self
            .leaves
            .iter()
            .map(|l| Leaf {
                label: l.label.clone(),
                payoffs: [f(&l.payoffs[0]), f(&l.payoffs[1])],
                chance_prob: f(&l.chance_prob),
                sequences: l.sequences,
                node: l.node,
            })
            .collect();
        GameTree {
            nodes,
            root: self.root,
            infosets: self.infosets.clone(),
            seq_offsets: self.seq_offsets.clone(),
            leaves,
            chance_count: self.chance_count,
            zero_sum: self.zero_sum,
        }
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

enum Pending<S> {
    Chance(Vec<(String, S, NodeId)>),
    Decision(Player, usize, Vec<NodeId>),
    Terminal([S; 2]),
}

/// Bottom-up tree construction. Information sets are declared first; their
/// declaration order fixes the canonical sequence order of each player.
pub struct TreeBuilder<S> {
    nodes: Vec<Pending<S>>,
    infosets: [Vec<InfoSet>; 2],
}

impl<S: Scalar> Default for TreeBuilder<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> TreeBuilder<S> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), infosets: [Vec::new(), Vec::new()] }
    }

    pub fn infoset(&mut self, player: Player, label: &str, actions: &[&str]) -> usize {
        let sets = &mut self.infosets[player.index()];
        sets.push(InfoSet {
            label: label.to_string(),
            actions: actions.iter().map(|a| a.to_string()).collect(),
        });
        sets.len() - 1
    }

    pub fn terminal(&mut self, p1: S, p2: S) -> NodeId {
        self.push(Pending::Terminal([p1, p2]))
    }

    pub fn zero_sum_terminal(&mut self, p1: S) -> NodeId {
        let p2 = -p1.clone();
        self.terminal(p1, p2)
    }

    pub fn decision(&mut self, player: Player, infoset: usize, children: Vec<NodeId>) -> NodeId {
        self.push(Pending::Decision(player, infoset, children))
    }

    pub fn chance(&mut self, outcomes: Vec<(String, S, NodeId)>) -> NodeId {
        self.push(Pending::Chance(outcomes))
    }

    fn push(&mut self, node: Pending<S>) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn build(self, root: NodeId) -> Result<GameTree<S>> {
        let n = self.nodes.len();
        if root >= n {
            return Err(Error::InvalidGame(format!("root {root} out of range")));
        }
        let mut seq_offsets: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for p in 0..2 {
            let mut next = 1;
            for info in &self.infosets[p] {
                if info.actions.is_empty() {
                    return Err(Error::InvalidGame(format!("information set `{}` has no actions", info.label)));
                }
                seq_offsets[p].push(next);
                next += info.actions.len();
            }
        }

        let mut visited = vec![false; n];
        let mut nodes: Vec<Option<Node<S>>> = (0..n).map(|_| None).collect();
        let mut leaves = Vec::new();
        let mut chance_count = 0;
        let tol = 1e-12;

        // (node, chance prob, labels so far, own sequences)
        let mut stack = vec![(root, S::one(), Vec::<String>::new(), [0usize; 2])];
        let mut order = Vec::new();
        while let Some((id, prob, path, seqs)) = stack.pop() {
            if id >= n {
                return Err(Error::InvalidGame(format!("child {id} out of range")));
            }
            if std::mem::replace(&mut visited[id], true) {
                return Err(Error::InvalidGame(format!("node {id} has more than one parent")));
            }
            order.push(id);
            match &self.nodes[id] {
                Pending::Chance(outs) => {
                    if outs.is_empty() {
                        return Err(Error::InvalidGame(format!("chance node {id} has no outcomes")));
                    }
                    let total = outs.iter().fold(S::zero(), |acc, o| acc + o.1.clone());
                    if (total.as_f64() - 1.0).abs() > tol || outs.iter().any(|o| o.1 <= S::zero()) {
                        return Err(Error::InvalidGame(format!(
                            "chance probabilities at node {id} must be positive and sum to 1"
                        )));
                    }
                    nodes[id] = Some(Node::Chance {
                        index: chance_count,
                        outcomes: outs
                            .iter()
                            .map(|(l, p, c)| Outcome { label: l.clone(), prob: p.clone(), child: *c })
                            .collect(),
                    });
                    chance_count += 1;
                    for (_, p, c) in outs.iter().rev() {
                        stack.push((*c, prob.clone() * p.clone(), path.clone(), seqs));
                    }
                }
                Pending::Decision(player, infoset, children) => {
                    let info = self.infosets[player.index()].get(*infoset).ok_or_else(|| {
                        Error::InvalidGame(format!("node {id} refers to unknown information set {infoset}"))
                    })?;
                    if info.actions.len() != children.len() {
                        return Err(Error::InvalidGame(format!(
                            "node {id} has {} children but information set `{}` has {} actions",
                            children.len(),
                            info.label,
                            info.actions.len()
                        )));
                    }
                    nodes[id] = Some(Node::Decision {
                        player: *player,
                        infoset: *infoset,
                        children: children.clone(),
                    });
                    for (a, &c) in children.iter().enumerate().rev() {
                        let mut next_path = path.clone();
                        next_path.push(info.actions[a].clone());
                        let mut next = seqs;
                        next[player.index()] = seq_offsets[player.index()][*infoset] + a;
                        stack.push((c, prob.clone(), next_path, next));
                    }
                }
                Pending::Terminal(payoffs) => {
                    nodes[id] = Some(Node::Terminal { leaf: leaves.len() });
                    leaves.push(Leaf {
                        label: path.join(" "),
                        payoffs: payoffs.clone(),
                        chance_prob: prob,
                        sequences: seqs,
                        node: id,
                    });
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidGame(format!("{} nodes unreachable from the root", n - order.len())));
        }
        let zero_sum = leaves
            .iter()
            .all(|l| (l.payoffs[0].clone() + l.payoffs[1].clone()).is_zero());
        Ok(GameTree {
            nodes: nodes.into_iter().map(|n| n.expect("visited")).collect(),
            root,
            infosets: self.infosets,
            seq_offsets,
            leaves,
            chance_count,
            zero_sum,
        })
    }
}

/// Per-player observability functions: for each leaf, the set of leaves a
/// player cannot tell apart from it once the hand is over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observability {
    sets: [Vec<Vec<usize>>; 2],
}

impl Observability {
    pub fn new(p1: Vec<Vec<usize>>, p2: Vec<Vec<usize>>) -> Self {
        Self { sets: [p1, p2] }
    }

    /// Both players see the whole trajectory.
    pub fn full(leaf_count: usize) -> Self {
        let singletons: Vec<Vec<usize>> = (0..leaf_count).map(|l| vec![l]).collect();
        Self::new(singletons.clone(), singletons)
    }

    pub fn observe(&self, player: Player, leaf: usize) -> Result<&[usize]> {
        self.sets[player.index()]
            .get(leaf)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownLeaf(leaf.to_string()))
    }

    /// [`observe`](Self::observe) with leaves named by label.
    pub fn observe_label<'a, S: Scalar>(
        &self,
        tree: &'a GameTree<S>,
        player: Player,
        label: &str,
    ) -> Result<Vec<&'a str>> {
        let leaf = tree.leaf_by_label(label)?;
        Ok(self
            .observe(player, leaf)?
            .iter()
            .map(|&l| tree.leaves()[l].label.as_str())
            .collect())
    }

    /// Checks that every observation set is non-empty, contains its leaf and
    /// agrees on the observer's own sequence.
    pub fn validate<S: Scalar>(&self, tree: &GameTree<S>) -> Result<()> {
        for player in Player::BOTH {
            let sets = &self.sets[player.index()];
            if sets.len() != tree.leaves().len() {
                return Err(Error::InvalidGame(format!(
                    "observability of {player} covers {} of {} leaves",
                    sets.len(),
                    tree.leaves().len()
                )));
            }
            for (leaf, set) in sets.iter().enumerate() {
                if !set.contains(&leaf) {
                    return Err(Error::InvalidGame(format!(
                        "o_{}({}) does not contain the leaf itself",
                        player.index() + 1,
                        tree.leaves()[leaf].label
                    )));
                }
                let own = tree.leaves()[leaf].sequences[player.index()];
                for &other in set {
                    let other_leaf = tree.leaf(other)?;
                    if other_leaf.sequences[player.index()] != own {
                        return Err(Error::InvalidGame(format!(
                            "o_{}({}) mixes different own sequences",
                            player.index() + 1,
                            tree.leaves()[leaf].label
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
